use serde::{Deserialize, Serialize};

use super::records::GrowthRecord;
use crate::error::{Error, Result};
use crate::stats::{linear_fit, max_relative_spread, mean, pearson, LinearFit};

/// Trend of one scenario's magnitudes against `log N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub scenario: String,
    pub n: Vec<u64>,
    pub magnitudes: Vec<f64>,
    pub fit: LinearFit,
    pub correlation: f64,
    pub strictly_increasing: bool,
    /// `max |ratio / mean ratio - 1|` of `magnitude / log N`.
    pub ratio_spread: f64,
    pub mean_ratio: f64,
}

pub fn records_for<'a>(records: &'a [GrowthRecord], scenario: &str) -> Vec<&'a GrowthRecord> {
    records.iter().filter(|r| r.scenario == scenario).collect()
}

pub fn analyze_growth(records: &[GrowthRecord], scenario: &str) -> Result<GrowthFit> {
    let rows = records_for(records, scenario);
    if rows.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "growth fit of `{scenario}` needs at least two N values, found {}",
            rows.len()
        )));
    }
    let n: Vec<u64> = rows.iter().map(|r| r.n).collect();
    let log_n: Vec<f64> = n.iter().map(|v| (*v as f64).ln()).collect();
    let magnitudes: Vec<f64> = rows.iter().map(|r| r.magnitude).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio_log_n).collect();
    Ok(GrowthFit {
        scenario: scenario.to_string(),
        fit: linear_fit(&log_n, &magnitudes),
        correlation: pearson(&log_n, &magnitudes),
        strictly_increasing: magnitudes.windows(2).all(|w| w[1] > w[0]),
        ratio_spread: max_relative_spread(&ratios),
        mean_ratio: mean(&ratios),
        n,
        magnitudes,
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::experiments::Position;

    #[test]
    fn exact_log_law() {
        let recs: Vec<GrowthRecord> = [16u64, 36, 64, 100]
            .iter()
            .map(|n| GrowthRecord::new("g", *n, 0, 0.0, Position::Infinity, Complex64::new(0.2 * (*n as f64).ln(), 0.0)))
            .collect();
        let g = analyze_growth(&recs, "g").unwrap();
        assert!((g.fit.slope - 0.2).abs() < 1e-12 && g.fit.r2 > 0.999_999);
        assert!(g.strictly_increasing && g.ratio_spread < 1e-12);
        assert!(analyze_growth(&recs, "missing").is_err());
    }
}
