//! Correlation and half-line transforms, the discrete Riesz projection,
//! inverse-law fits and the weak-L2 estimator.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{simpson_weight, PhaseWalk};
use crate::signal::{SampledSignal, Spectrum};

pub use crate::report::{Diagnostic, Report};

/// Largest embedded grid accepted by the autocorrelation.
pub const CORRELATION_BUDGET: usize = 1 << 23;

/// Autocorrelation `h(w) = \int F(t) F(t + w) dt` on the lattice lags
/// `w = -l dx`, `l >= 0` (h is even).
#[derive(Clone, Debug)]
pub struct Autocorrelation {
    dx: f64,
    max_carrier: f64,
    lags: Vec<f64>,
}

impl Autocorrelation {
    pub fn new(signal: &SampledSignal) -> Result<Self> {
        let segs = signal.segments();
        let first = segs[0].start;
        let last = segs[segs.len() - 1].end();
        let len = (last - first + 1) as usize;
        if len > CORRELATION_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "autocorrelation grid of {len} lags exceeds {CORRELATION_BUDGET}"
            )));
        }
        let size = (2 * len).next_power_of_two();
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for s in segs {
            let off = (s.start - first) as usize;
            for (i, v) in s.samples.iter().enumerate() {
                buf[off + i].re = *v;
            }
        }
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(size).process(&mut buf);
        for z in buf.iter_mut() {
            *z = Complex64::new(z.norm_sqr(), 0.0);
        }
        planner.plan_fft_inverse(size).process(&mut buf);
        let scale = signal.dx() / size as f64;
        let mut lags: Vec<f64> = buf[..len].iter().map(|z| z.re * scale).collect();
        if lags.len() % 2 == 0 {
            lags.push(0.0);
        }
        Ok(Self { dx: signal.dx(), max_carrier: signal.max_carrier(), lags })
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `\int_{w<0} e^{2ikw} h(w) dw` by composite Simpson over the lags.
    pub fn half_line(&self, k: f64) -> Result<Complex64> {
        let phase_step = (2.0 * k.abs() + 2.0 * self.max_carrier) * self.dx;
        if phase_step > crate::signal::PHASE_LIMIT * (1.0 + 1e-9) {
            return Err(Error::UnresolvedPhase { k, phase_step, limit: crate::signal::PHASE_LIMIT });
        }
        let count = self.lags.len();
        let walk = PhaseWalk::new(0.0, -2.0 * k * self.dx);
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, (h, z)) in self.lags.iter().zip(walk).enumerate() {
            acc += z * (h * simpson_weight(l, count));
        }
        Ok(acc * (self.dx / 3.0))
    }
}

/// `T_2(F, F)(k, +inf)` through the correlation route, i.e. `H_-(|F^|^2)(k)`.
pub fn correlation_transform(signal: &SampledSignal, k: f64) -> Result<Complex64> {
    Autocorrelation::new(signal)?.half_line(k)
}

/// Result of the discrete Riesz projection.
#[derive(Clone, Debug)]
pub struct RieszProjection {
    pub spectrum: Spectrum,
    /// Largest edge magnitude relative to the peak of the input.
    pub edge_ratio: f64,
}

impl RieszProjection {
    pub const EDGE_LIMIT: f64 = 1e-6;

    pub fn edges_decayed(&self) -> bool {
        self.edge_ratio <= Self::EDGE_LIMIT
    }
}

/// Keeps the nonpositive frequencies of `g` in the variable conjugate to `k`
/// (the components `e^{2 i xi k}` with `xi <= 0`), halving `xi = 0`.
///
/// The window is zero padded to at least four times its length. Output decays
/// only like `1/k`, so accuracy is limited by the window.
pub fn riesz_minus_grid(g: &Spectrum) -> Result<RieszProjection> {
    if g.is_empty() {
        return Err(Error::Empty("spectrum"));
    }
    g.uniform_step().ok_or(Error::NonUniformGrid)?;
    let len = g.len();
    let peak = g.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let edge = g.values[0].norm().max(g.values[len - 1].norm());
    let edge_ratio = if peak > 0.0 { edge / peak } else { 0.0 };

    let size = (4 * len).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    buf[..len].copy_from_slice(&g.values);
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(size).process(&mut buf);
    // DFT bin m carries e^{2 pi i m n / size}, i.e. xi proportional to +m:
    // keep the negative bins, halve the zero bin, drop the rest
    buf[0] *= 0.5;
    for z in buf[1..=size / 2].iter_mut() {
        *z = Complex64::new(0.0, 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let scale = 1.0 / size as f64;
    let values = buf[..len].iter().map(|z| z * scale).collect();
    Ok(RieszProjection { spectrum: Spectrum::new(g.k.clone(), values)?, edge_ratio })
}

/// Offsets `d = j - j0` used by an inverse-law fit: `min_abs <= |d| <= max_abs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub min_abs: i64,
    pub max_abs: i64,
}

impl FitWindow {
    pub fn contains(&self, d: i64) -> bool {
        d != 0 && d.abs() >= self.min_abs && d.abs() <= self.max_abs
    }

    /// `2 <= |d| <= N/4`.
    pub fn default_for(n: u64) -> Self {
        Self { min_abs: 2, max_abs: (n / 4) as i64 }
    }
}

/// Fit of `value(d) ~ constant / d + background + decay / d^2`.
///
/// The `background` term absorbs contributions that vary slowly with `d`
/// (for the block transforms: the mirror peak at negative frequency, of size
/// `O(1/N)`), so the envelope test sees only the genuine residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub constant: Complex64,
    pub background: Complex64,
    pub decay: Complex64,
    pub residual_norm: f64,
    pub r2: f64,
    pub window: FitWindow,
    pub points: usize,
    /// Quadratic envelope `K = max |d|^2 |value - constant/d - background|`
    /// over the inner half of the window, and the largest ratio of
    /// `|d|^2 |residual|` over the whole window to `K` (1 when the residual
    /// decays at least quadratically).
    pub envelope: f64,
    pub envelope_ratio: f64,
}

impl FitResult {
    /// JSON object `{constant_re, constant_im, residual, r2, window}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "constant_re": self.constant.re,
            "constant_im": self.constant.im,
            "residual": self.residual_norm,
            "r2": self.r2,
            "window": [self.window.min_abs, self.window.max_abs],
        })
    }
}

/// Solves the symmetric 3x3 system `m x = r` by Gaussian elimination with
/// partial pivoting; `None` if singular.
fn solve3(mut m: [[f64; 3]; 3], mut r: [Complex64; 3]) -> Option<[Complex64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    for c in 0..3 {
        let p = (c..3).max_by(|x, y| m[*x][c].abs().total_cmp(&m[*y][c].abs()))?;
        if m[p][c].abs() <= 1e-13 * scale {
            return None;
        }
        m.swap(c, p);
        r.swap(c, p);
        for row in c + 1..3 {
            let f = m[row][c] / m[c][c];
            for col in c..3 {
                m[row][col] -= f * m[c][col];
            }
            r[row] = r[row] - r[c] * f;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for c in (0..3).rev() {
        let mut acc = r[c];
        for col in c + 1..3 {
            acc -= x[col] * m[c][col];
        }
        x[c] = acc / m[c][c];
    }
    Some(x)
}

pub fn fit_inverse_law(values: &BTreeMap<i64, Complex64>, window: FitWindow) -> Result<FitResult> {
    let pts: Vec<(f64, Complex64)> = values
        .iter()
        .filter(|(d, _)| window.contains(**d))
        .map(|(d, v)| (*d as f64, *v))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Empty("inverse-law fit window"));
    }
    let basis = |d: f64| [1.0 / d, 1.0, 1.0 / (d * d)];
    let mut m = [[0.0; 3]; 3];
    let mut r = [Complex64::new(0.0, 0.0); 3];
    for (d, v) in &pts {
        let u = basis(*d);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += u[i] * u[j];
            }
            r[i] += v * u[i];
        }
    }
    // one-sided windows make `1` and `1/d^2` nearly collinear only for
    // degenerate inputs; fall back to the leading law alone
    let [constant, background, decay] = solve3(m, r).unwrap_or_else(|| {
        let zero = Complex64::new(0.0, 0.0);
        [r[0] / m[0][0], zero, zero]
    });

    let mean = pts.iter().map(|p| p.1).sum::<Complex64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|(_, v)| (v - mean).norm_sqr()).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|(d, v)| (v - constant / d - background - decay / (d * d)).norm_sqr())
        .sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };

    let scaled: Vec<(f64, f64)> =
        pts.iter().map(|(d, v)| (d.abs(), (v - constant / d - background).norm() * d * d)).collect();
    let split = 0.5 * (window.min_abs + window.max_abs) as f64;
    let envelope = scaled.iter().filter(|(d, _)| *d <= split).map(|p| p.1).fold(0.0, f64::max);
    let worst = scaled.iter().map(|p| p.1).fold(0.0, f64::max);
    let envelope_ratio = if envelope > 0.0 {
        worst / envelope
    } else if worst == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(FitResult {
        constant,
        background,
        decay,
        residual_norm: ss_res.sqrt(),
        r2,
        window,
        points: pts.len(),
        envelope,
        envelope_ratio,
    })
}

/// `sup_lambda lambda * (cell * #{v >= lambda})^{1/2}` with lambda swept over
/// the sample values; `cell` is the measure carried by one sample.
pub fn weak_l2_quasinorm(values: &[f64], cell: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("weak-L2 samples"));
    }
    if values.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParameter("weak-L2 samples must be nonnegative".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut best = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let lambda = sorted[i];
        let mut count = i + 1;
        while count < sorted.len() && sorted[count] == lambda {
            count += 1;
        }
        best = best.max(lambda * (cell * count as f64).sqrt());
        i = count;
    }
    Ok(best)
}

/// Weak-L2 estimator of a spectrum of nonnegative reals on a uniform grid.
pub fn weak_l2_of_spectrum(samples: &Spectrum) -> Result<f64> {
    let cell = match samples.len() {
        0 => return Err(Error::Empty("weak-L2 samples")),
        1 => return Err(Error::InvalidParameter("weak-L2 needs a grid spacing".into())),
        _ => samples.uniform_step().ok_or(Error::NonUniformGrid)?,
    };
    let vals: Vec<f64> = samples.values.iter().map(|v| v.re).collect();
    weak_l2_quasinorm(&vals, cell)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_l2_constant_and_half_indicator() {
        let m = 3.0;
        let count = 300;
        let cell = m / count as f64;
        let v = vec![2.0; count];
        assert!((weak_l2_quasinorm(&v, cell).unwrap() - 2.0 * m.sqrt()).abs() < 1e-12);
        let half: Vec<f64> = (0..count).map(|i| if i < count / 2 { 1.0 } else { 0.0 }).collect();
        assert!((weak_l2_quasinorm(&half, cell).unwrap() - (m / 2.0).sqrt()).abs() < 1e-12);
        assert!(weak_l2_quasinorm(&[], 1.0).is_err());
    }

    #[test]
    fn inverse_law_exact_input() {
        let c0 = Complex64::new(0.1, -0.3);
        let values: BTreeMap<i64, Complex64> =
            (-10..=10).filter(|d| *d != 0).map(|d| (d, c0 / d as f64)).collect();
        let fit = fit_inverse_law(&values, FitWindow { min_abs: 2, max_abs: 9 }).unwrap();
        assert!((fit.constant - c0).norm() < 1e-14);
        assert!(fit.residual_norm < 1e-14);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert_eq!(fit.points, 16);
    }

    #[test]
    fn inverse_law_separates_background_and_flags_slow_residuals() {
        let (c0, b0, k0) = (Complex64::new(0.0, 0.03), Complex64::new(0.0, -3e-4), Complex64::new(2e-3, 0.0));
        let values: BTreeMap<i64, Complex64> = (-10..=10)
            .filter(|d| *d != 0)
            .map(|d| {
                let x = d as f64;
                (d, c0 / x + b0 + k0 / (x * x))
            })
            .collect();
        let fit = fit_inverse_law(&values, FitWindow { min_abs: 2, max_abs: 10 }).unwrap();
        assert!((fit.constant - c0).norm() < 1e-14 && (fit.background - b0).norm() < 1e-14);
        assert!((fit.decay - k0).norm() < 1e-13);
        assert!((fit.envelope_ratio - 1.0).abs() < 1e-9);
        // an outer deviation far above K / d^2 escapes the envelope
        let mut slow = values.clone();
        *slow.get_mut(&10).unwrap() += Complex64::new(1e-3, 0.0);
        let fit = fit_inverse_law(&slow, FitWindow { min_abs: 2, max_abs: 10 }).unwrap();
        assert!(fit.envelope_ratio > 1.2, "{}", fit.envelope_ratio);
    }

    #[test]
    fn inverse_law_rejects_alternating_input() {
        let values: BTreeMap<i64, Complex64> = (2..=40)
            .map(|d| (d, Complex64::new(if d % 2 == 0 { 1.0 } else { -1.0 }, 0.0)))
            .collect();
        let fit = fit_inverse_law(&values, FitWindow { min_abs: 2, max_abs: 40 }).unwrap();
        assert!(fit.r2 < 0.1, "r2 = {}", fit.r2);
    }

    #[test]
    fn inverse_law_empty_window() {
        let values: BTreeMap<i64, Complex64> = [(1, Complex64::new(1.0, 0.0))].into_iter().collect();
        assert!(fit_inverse_law(&values, FitWindow { min_abs: 2, max_abs: 5 }).is_err());
    }

    fn gaussian_spectrum(shift: f64, carrier: f64) -> Spectrum {
        let k: Vec<f64> = (0..2048).map(|i| -20.0 + 40.0 * i as f64 / 2048.0).collect();
        let values = k
            .iter()
            .map(|x| Complex64::cis(2.0 * carrier * x) * (-(x - shift).powi(2)).exp())
            .collect();
        Spectrum::new(k, values).unwrap()
    }

    #[test]
    fn riesz_projection_partitions_real_even_peaks() {
        let g = gaussian_spectrum(0.0, 0.0);
        let p = riesz_minus_grid(&g).unwrap();
        assert!(p.edges_decayed());
        for (a, b) in p.spectrum.values.iter().zip(&g.values) {
            assert!((a + a.conj() - b).norm() < 1e-6);
        }
    }

    #[test]
    fn riesz_projection_keeps_negative_and_drops_positive_frequencies() {
        let neg = gaussian_spectrum(0.0, -8.0);
        let pos = gaussian_spectrum(0.0, 8.0);
        let pn = riesz_minus_grid(&neg).unwrap();
        let pp = riesz_minus_grid(&pos).unwrap();
        for i in 0..neg.len() {
            assert!((pn.spectrum.values[i] - neg.values[i]).norm() < 1e-8);
            assert!(pp.spectrum.values[i].norm() < 1e-8);
        }
        // idempotence on spectra without a zero-frequency component
        let twice = riesz_minus_grid(&pn.spectrum).unwrap();
        for (a, b) in twice.spectrum.values.iter().zip(&pn.spectrum.values) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn riesz_zero_and_nonuniform() {
        let z = Spectrum::new(vec![0.0, 1.0, 2.0], vec![Complex64::new(0.0, 0.0); 3]).unwrap();
        assert!(riesz_minus_grid(&z).unwrap().spectrum.values.iter().all(|v| v.norm() == 0.0));
        let bad = Spectrum::new(vec![0.0, 1.0, 3.0], vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        assert!(matches!(riesz_minus_grid(&bad), Err(Error::NonUniformGrid)));
    }
}
