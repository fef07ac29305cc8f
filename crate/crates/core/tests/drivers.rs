//! Scenario drivers on reduced N lists.

mod common;

use std::path::PathBuf;

use chirplab::experiments::{
    analyze_growth, records_for, run_boundedness, run_identities, run_t2_growth, run_t3_growth, to_csv_string,
    RunConfig, Scenario,
};

fn value(recs: &[chirplab::experiments::GrowthRecord], name: &str, n: u64) -> chirplab::Complex64 {
    recs.iter().find(|r| r.scenario == name && r.n == n).unwrap().value()
}

#[test]
fn t2_cross_block_part_is_negligible_at_36() {
    let mut cfg = RunConfig::new(Scenario::T2Growth);
    cfg.n_list = vec![36];
    cfg.weak_points = 8;
    let recs = run_t2_growth(&cfg, &common::context()).unwrap();
    let total = value(&recs, "t2_region", 36);
    let (jj, jjp) = (value(&recs, "t2_jj", 36), value(&recs, "t2_jjp", 36));
    assert!(jjp.norm() <= cfg.tolerances.cross_fraction * total.norm(), "{jjp} vs {total}");
    assert!((jj + jjp - total).norm() <= 1e-10 * total.norm());
    assert!(records_for(&recs, "t2_weak_l2")[0].x.to_string() == "sup");
    // j0 = round(1.75 N)
    assert!(recs.iter().all(|r| r.j0 == 63));
}

#[test]
fn t3_split_reassembles_and_the_bounded_pieces_stay_flat() {
    let cfg = RunConfig::new(Scenario::T3Growth);
    let recs = run_t3_growth(&cfg, &common::context()).unwrap();
    for &n in &cfg.n_list {
        let total = value(&recs, "t3_inf", n);
        let sum: chirplab::Complex64 =
            ["t3_kkk", "t3_kkp", "t3_kpp", "t3_klm"].iter().map(|s| value(&recs, s, n)).sum();
        assert!((sum - total).norm() <= 1e-8 * total.norm(), "N={n}");
        assert_eq!(records_for(&recs, "t3_inf").iter().find(|r| r.n == n).unwrap().j0, (1.5 * n as f64).round() as i64);
    }
    let total = analyze_growth(&recs, "t3_inf").unwrap().fit.slope;
    assert!(total > 0.0);
    for piece in ["t3_kkk", "t3_klm"] {
        let slope = analyze_growth(&recs, piece).unwrap().fit.slope;
        assert!(slope.abs() <= cfg.tolerances.slope_fraction * total, "{piece}: {slope} vs {total}");
    }
    let dominant = analyze_growth(&recs, "t3_dominant").unwrap();
    assert!(dominant.strictly_increasing && dominant.fit.r2 >= 0.95);
}

#[test]
fn boundedness_controls_conservation_and_dumps() {
    let dir = std::env::temp_dir().join(format!("chirplab-dump-{}", std::process::id()));
    let mut cfg = RunConfig::new(Scenario::Boundedness);
    cfg.n_list = vec![16, 36];
    cfg.dump_profiles = Some(dir.clone());
    cfg.profile_stride = 1024;
    let recs = run_boundedness(&cfg, &common::context()).unwrap();
    assert_eq!(records_for(&recs, "bounded_control_a")[0].magnitude, 1.0);
    assert_eq!(records_for(&recs, "bounded_control_b")[0].magnitude, 0.0);
    for r in records_for(&recs, "bounded_drift") {
        assert!(r.magnitude <= 1e-8);
    }
    for r in records_for(&recs, "bounded_a") {
        assert!(r.magnitude >= 1.0);
    }
    for n in [16, 36] {
        let path: PathBuf = dir.join(format!("ab_profile_N{n}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,re_a,im_a,re_b,im_b\n"));
        assert!(text.lines().count() > 10);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_is_independent_of_worker_count() {
    let mut cfg = RunConfig::new(Scenario::T3Growth);
    cfg.n_list = vec![16, 36];
    let ctx = common::context();
    let runs: Vec<String> = [1, 2, 5]
        .iter()
        .map(|w| {
            cfg.workers = *w;
            to_csv_string(&run_t3_growth(&cfg, &ctx).unwrap())
        })
        .collect();
    assert!(runs.windows(2).all(|p| p[0] == p[1]));
}

#[test]
fn unresolved_grid_fails_checks_but_bad_config_is_an_error() {
    let mut cfg = RunConfig::new(Scenario::Identities);
    cfg.oversample = 0.5;
    let reports = run_identities(&cfg, &common::context()).unwrap();
    assert!(reports.iter().any(|r| !r.pass && r.notes.iter().any(|n| n.contains("does not resolve"))));

    cfg.oversample = 2.0;
    cfg.n_list = vec![17];
    assert_eq!(run_identities(&cfg, &common::context()).unwrap_err().exit_code(), 2);
}
