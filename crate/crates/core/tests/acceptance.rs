//! End-to-end acceptance: the twelve desk-scale criteria, one PASS/FAIL line
//! each. Runs the default configuration; exits nonzero on any failure.

use std::process::ExitCode;
use std::time::Instant;

use chirplab::experiments::{
    analyze_growth, records_for, run_boundedness, run_identities, run_t2_growth, run_t3_growth, to_csv_string, Context,
    GrowthFit, GrowthRecord, RunConfig, Scenario, Tolerances,
};
use chirplab::Report;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Self::new(false, format!("error: {e}"))
    }
}

fn growth_outcome(fit: &GrowthFit, tol: &Tolerances) -> Outcome {
    let pass = fit.strictly_increasing
        && fit.fit.slope > 0.0
        && fit.fit.r2 >= tol.growth_r2
        && fit.ratio_spread <= tol.ratio_band;
    Outcome::new(
        pass,
        format!(
            "magnitudes={:?} increasing={} slope={:.4e} r2={:.4} ratio_spread={:.3}",
            fit.magnitudes.iter().map(|m| format!("{m:.5}")).collect::<Vec<_>>(),
            fit.strictly_increasing,
            fit.fit.slope,
            fit.fit.r2,
            fit.ratio_spread
        ),
    )
}

/// All reports whose label starts with one of `prefixes` must pass.
fn reports_outcome(reports: &[Report], prefixes: &[&str]) -> Outcome {
    let picked: Vec<&Report> = reports
        .iter()
        .filter(|r| prefixes.iter().any(|p| r.label.starts_with(p)))
        .collect();
    if picked.is_empty() {
        return Outcome::new(false, format!("no checks matched {prefixes:?}"));
    }
    let failed: Vec<String> = picked.iter().filter(|r| !r.pass).map(|r| r.to_string()).collect();
    let worst = picked
        .iter()
        .map(|r| format!("{}={:.2e}/{:.0e}", r.label, r.max_error, r.tolerance))
        .collect::<Vec<_>>()
        .join(" ");
    if failed.is_empty() {
        Outcome::new(true, worst)
    } else {
        Outcome::new(false, failed.join(" | "))
    }
}

fn max_magnitude(records: &[GrowthRecord], scenario: &str) -> f64 {
    records_for(records, scenario).iter().map(|r| r.magnitude).fold(0.0, f64::max)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let base = RunConfig::new(Scenario::T2Growth);
    let tol = base.tolerances;
    let ctx = match Context::new(&base) {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("A = {} (selected in {:.1?})", ctx.a, start.elapsed());

    let t2_cfg = base.clone();
    let t3_cfg = RunConfig::new(Scenario::T3Growth);
    let bounded_cfg = RunConfig::new(Scenario::Boundedness);
    let identity_cfg = RunConfig::new(Scenario::Identities);

    let t2 = run_t2_growth(&t2_cfg, &ctx);
    let t3 = run_t3_growth(&t3_cfg, &ctx);
    let bounded = run_boundedness(&bounded_cfg, &ctx);
    let identities = run_identities(&identity_cfg, &ctx);

    let mut outcomes: Vec<(&str, Outcome)> = Vec::new();

    let t2_fit = t2.as_ref().map_err(|e| e.to_string()).and_then(|r| analyze_growth(r, "t2_region").map_err(|e| e.to_string()));
    outcomes.push((
        "1 T2 divergence at the region point",
        match &t2_fit {
            Ok(f) => growth_outcome(f, &tol),
            Err(e) => Outcome::error(e),
        },
    ));

    outcomes.push((
        "2 T3 divergence at +inf",
        match t3.as_ref().map_err(|e| e.to_string()).and_then(|r| analyze_growth(r, "t3_inf").map_err(|e| e.to_string())) {
            Ok(f) => growth_outcome(&f, &tol),
            Err(e) => Outcome::error(e),
        },
    ));

    outcomes.push((
        "3 boundedness contrast and conservation",
        match (&bounded, &t2_fit) {
            (Ok(recs), Ok(t2f)) => match analyze_growth(recs, "bounded_b") {
                Ok(b) => {
                    let drift = max_magnitude(recs, "bounded_drift");
                    let limit = tol.slope_fraction * t2f.fit.slope;
                    let controls = records_for(recs, "bounded_control_a").iter().all(|r| r.magnitude == 1.0)
                        && records_for(recs, "bounded_control_b").iter().all(|r| r.magnitude == 0.0);
                    Outcome::new(
                        b.fit.slope <= limit && drift <= tol.conservation && controls,
                        format!(
                            "slope_b={:.4e} (|slope_b|={:.4e}) limit={:.4e} max|b|={:.4} max_drift={:.2e} controls={}",
                            b.fit.slope,
                            b.fit.slope.abs(),
                            limit,
                            max_magnitude(recs, "bounded_b"),
                            drift,
                            controls
                        ),
                    )
                }
                Err(e) => Outcome::error(e),
            },
            (Err(e), _) => Outcome::error(e),
            (_, Err(e)) => Outcome::error(e),
        },
    ));

    let groups: [(&str, &[&str]); 7] = [
        ("4 T2 recursion vs correlation", &["t2 recursion vs correlation"]),
        ("5 factorization oracles", &["factorization", "t2 split", "t3 split"]),
        ("6 brute-force simplex oracle", &["brute force"]),
        ("7 inverse law of the block transforms", &["inverse law", "riesz"]),
        ("8 transfer structure", &["transfer"]),
        ("9 series validity boundary", &["series"]),
        ("10 scattering identity", &["scattering identity"]),
    ];
    for (name, prefixes) in groups {
        outcomes.push((
            name,
            match &identities {
                Ok(reports) => reports_outcome(reports, prefixes),
                Err(e) => Outcome::error(e),
            },
        ));
    }

    outcomes.push((
        "11 weak-L2 estimator grows with log N",
        match t2.as_ref().map_err(|e| e.to_string()).and_then(|r| analyze_growth(r, "t2_weak_l2").map_err(|e| e.to_string())) {
            Ok(f) => Outcome::new(
                f.correlation >= tol.weak_correlation,
                format!("values={:?} correlation={:.4}", f.magnitudes.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(), f.correlation),
            ),
            Err(e) => Outcome::error(e),
        },
    ));

    // identical configurations apart from the worker count
    let other_workers = if t2_cfg.workers == 3 { 2 } else { 3 };
    let rerun = |cfg: &RunConfig, first: &Result<Vec<GrowthRecord>, chirplab::Error>, f: fn(&RunConfig, &Context) -> chirplab::Result<Vec<GrowthRecord>>| {
        let mut again = cfg.clone();
        again.workers = other_workers;
        match (first, f(&again, &ctx)) {
            (Ok(a), Ok(b)) => Ok(to_csv_string(a) == to_csv_string(&b)),
            (Err(e), _) => Err(e.to_string()),
            (_, Err(e)) => Err(e.to_string()),
        }
    };
    let same = [
        ("t2max", rerun(&t2_cfg, &t2, run_t2_growth)),
        ("t3inf", rerun(&t3_cfg, &t3, run_t3_growth)),
        ("bounded", rerun(&bounded_cfg, &bounded, run_boundedness)),
    ];
    outcomes.push((
        "12 determinism across worker counts",
        match same.iter().find_map(|(_, r)| r.as_ref().err()) {
            Some(e) => Outcome::error(e),
            None => Outcome::new(
                same.iter().all(|(_, r)| *r.as_ref().unwrap()),
                format!(
                    "workers {} vs {other_workers}: {}",
                    t2_cfg.workers,
                    same.iter().map(|(n, r)| format!("{n}={}", if *r.as_ref().unwrap() { "identical" } else { "DIFFERENT" })).collect::<Vec<_>>().join(" ")
                ),
            ),
        },
    ));

    let mut all = true;
    for (name, o) in &outcomes {
        all &= o.pass;
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("total {:.1?}", start.elapsed());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
