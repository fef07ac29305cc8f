use super::{with_pool, Context, RunConfig, BUMP_TOL};
use crate::error::Result;
use crate::report::Report;
use crate::signal::{
    build_chirp, cell_centered_grid, check_a_condition, fourier_envelope, make_bump, select_a_with, verify_block_ft,
    ASearch, BumpProfile, DEFAULT_J_MAX, DEFAULT_XI_GRID, SUPPORT_RADIUS,
};

/// Closed-form block transforms agree with quadrature to this level.
pub const BLOCK_FT_TOL: f64 = 1e-8;

/// Bump invariants and, for the first configured N, the block-transform
/// closed form at three blocks.
pub fn run_bump_check(cfg: &RunConfig, ctx: &Context) -> Result<Vec<Report>> {
    cfg.validate()?;
    let bump = &ctx.bump;
    let mut out = vec![
        Report::new("bump mass", (bump.mass() - 1.0).abs(), BUMP_TOL),
        Report::new(
            "bump vanishes at the support edge",
            bump.eval(SUPPORT_RADIUS).abs().max(bump.eval(-SUPPORT_RADIUS).abs()),
            0.0,
        )
        .with("phi_0", bump.eval(0.0)),
        Report::new("bump transform at 0", (bump.fourier(0.0).re - 1.0).abs(), BUMP_TOL),
    ];
    // cos(2 xi x) >= cos(1/2) on the support when |xi| <= 1
    let low = (0..=200).map(|i| bump.fourier(-1.0 + i as f64 / 100.0).re).fold(f64::INFINITY, f64::min);
    out.push(Report::new("bump transform real part on [-1, 1]", (0.8775 - low).max(0.0), 0.0).with("min_re", low));
    let e: Vec<f64> = [10.0, 20.0, 40.0, 80.0].iter().map(|xi| fourier_envelope(bump, *xi)).collect();
    let ratios: Vec<f64> = e.windows(2).map(|w| w[1] / w[0]).collect();
    let shrinking = ratios.windows(2).all(|r| r[1] < r[0]);
    out.push(
        Report::new("bump transform decay ratios shrink", if shrinking { 0.0 } else { 1.0 }, 0.0)
            .with("ratio_10_20", ratios[0])
            .with("ratio_20_40", ratios[1])
            .with("ratio_40_80", ratios[2]),
    );

    let n = cfg.n_list[0];
    let spec = build_chirp(n, ctx.a, bump.clone())?;
    let ks = cell_centered_grid(0.5 * ctx.a, 3.0 * ctx.a, 32);
    let (lo, hi) = (*spec.block_indices().start(), *spec.block_indices().end());
    with_pool(cfg.workers, || {
        for j in [lo, (lo + hi) / 2, hi] {
            out.push(match verify_block_ft(&spec, j, &ks, BLOCK_FT_TOL) {
                Ok(r) => r,
                Err(e) => Report::failed(format!("block_ft j={j}"), e.to_string()),
            });
        }
        Ok(())
    })?;
    Ok(out)
}

fn condition_report(bump: &BumpProfile, a: f64, grid: usize, label: &str) -> Report {
    let c = check_a_condition(bump, a, grid, DEFAULT_J_MAX);
    Report::new(label, c.worst_ratio, 1.0)
        .with("A", a)
        .with("worst_xi", c.worst_xi)
        .with("max_tail", c.max_tail)
        .with("xi_grid", grid as f64)
}

/// Runs the search for `A` (or takes the override) and re-checks the
/// condition on the search grid and a four times finer one.
pub fn run_select_a(cfg: &RunConfig) -> Result<Vec<Report>> {
    cfg.validate()?;
    with_pool(cfg.workers, || {
        let bump = make_bump(cfg.bump, BUMP_TOL)?;
        let a = match cfg.a_override {
            Some(a) => a,
            None => select_a_with(&bump, &ASearch::default())?.a,
        };
        Ok(vec![
            condition_report(&bump, a, DEFAULT_XI_GRID, "A condition on the search grid"),
            condition_report(&bump, a, 4 * DEFAULT_XI_GRID, "A condition on a 4x finer grid"),
        ])
    })
}
