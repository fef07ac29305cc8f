use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::growth::{t2_split, t3_split};
use super::{with_pool, Context, RunConfig};
use crate::error::{Error, Result};
use crate::multilinear::{brute_force_simplex, factorized_value, t_infinity, Sign};
use crate::report::Report;
use crate::scattering::{
    block_transfer, compose_product, integrate_system, scan_system, scattering_identity_value, series_vs_ode,
    total_transfer, transfer_asymptotics, IdentityWindow, SERIES_MAX_ORDER, SERIES_NORM_LIMIT,
};
use crate::signal::{
    block_ft_closed_form, cell_centered_grid, fourier_at, sample_blocks, Block, BlockSignal, BumpProfile, ChirpSpec,
    SampledSignal, SignalMeta, Spectrum,
};
use crate::spectral::{correlation_transform, fit_inverse_law, riesz_minus_grid, FitWindow};

/// Chirp size of the scattering-identity check; the quadrature needs about
/// a thousand full integrations, so the smallest admissible N is used.
pub const SCATTERING_IDENTITY_N: u64 = 16;
pub const SCATTERING_INTERVALS: usize = 1024;
/// Amplitude of the weak-coupling run.
pub const WEAK_COUPLING: f64 = 0.1;
/// Number of `k` samples per block in the recursion/correlation check.
const T2_IDENTITY_KS: usize = 9;
/// Half-width of the closed-form spectrum around each peak, in `xi = N k - A j`.
const RIESZ_REACH: f64 = 1500.0;

fn rel(a: Complex64, b: Complex64) -> f64 {
    let scale = b.norm();
    if scale == 0.0 {
        a.norm()
    } else {
        (a - b).norm() / scale
    }
}

/// Two unit-width bumps with different carriers, support 2 units.
pub fn toy_signal(bump: Arc<BumpProfile>) -> Result<SampledSignal> {
    let blocks = vec![
        Block { index: 0, center: 1.0, scale: 2.0, amplitude: 1.0, carrier: 0.3 },
        Block { index: 1, center: 2.6, scale: 2.0, amplitude: -0.7, carrier: 0.8 },
    ];
    sample_blocks(&BlockSignal::new(bump, blocks)?, 0.01, usize::MAX, SignalMeta::default())
}

/// Three four-unit bumps, support 12 units.
pub fn wide_toy_signal(bump: Arc<BumpProfile>) -> Result<SampledSignal> {
    let blocks = vec![
        Block { index: 0, center: 3.0, scale: 8.0, amplitude: 0.6, carrier: 0.2 },
        Block { index: 1, center: 8.5, scale: 8.0, amplitude: -0.4, carrier: 0.5 },
        Block { index: 2, center: 14.0, scale: 8.0, amplitude: 0.5, carrier: 0.9 },
    ];
    sample_blocks(&BlockSignal::new(bump, blocks)?, 0.02, usize::MAX, SignalMeta::default())
}

/// Runs `f`, turning an error into a failed report.
fn guarded(label: &str, f: impl FnOnce() -> Result<Vec<Report>>) -> Vec<Report> {
    f().unwrap_or_else(|e| vec![Report::failed(label, e.to_string())])
}

/// Every cross-module check on the first configured N, as one report list.
/// Numerical failures become failing reports; only configuration errors are
/// returned as `Err`.
pub fn run_identities(cfg: &RunConfig, ctx: &Context) -> Result<Vec<Report>> {
    cfg.validate()?;
    let n = cfg.n_list[0];
    let j0 = cfg.j0_for(n)?;
    with_pool(cfg.workers, || {
        let tol = &cfg.tolerances;
        let mut out = Vec::new();
        let sampled = ctx.sample(n, cfg.oversample);
        let (spec, signal) = match sampled {
            Ok(v) => v,
            Err(e) if e.exit_code() == 2 => return Err(e),
            Err(e) => return Ok(vec![Report::failed(format!("sampling N={n}"), e.to_string())]),
        };
        let k0 = ctx.a * j0 as f64 / n as f64;

        out.extend(guarded("t2 recursion vs correlation", || {
            Ok(vec![t2_identity(&spec, &signal, ctx.a, tol.identity)?])
        }));
        out.extend(guarded("factorizations", || factorizations(&spec, &signal, k0, j0, tol.factorization)));
        out.extend(guarded("brute force", || brute_force(ctx, tol.brute_force)));
        out.extend(guarded("inverse law", || inverse_law(cfg, &spec, &signal, k0, j0)));
        out.extend(guarded("transfer structure", || transfer(cfg, &spec, &signal, k0, j0)));
        out.extend(guarded("series", || series(&signal, k0)));
        out.extend(guarded("conservation", || {
            Ok(vec![conservation(&signal, &ctx.region_ks(n, j0), tol.conservation)?])
        }));
        out.extend(guarded("scattering identity", || scattering_identity(cfg, ctx)));
        Ok(out)
    })
}

/// Recursion against the autocorrelation route for every block on a
/// cell-centred `k` grid over `[A, 2A]`.
fn t2_identity(spec: &ChirpSpec, signal: &SampledSignal, a: f64, tol: f64) -> Result<Report> {
    let ks = cell_centered_grid(a, 2.0 * a, T2_IDENTITY_KS);
    let errs = spec
        .block_indices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&j| {
            let b = signal.block(j)?;
            let auto = crate::spectral::Autocorrelation::new(&b)?;
            let mut worst: f64 = 0.0;
            for &k in &ks {
                worst = worst.max(rel(t_infinity(&[&b, &b], k)?, auto.half_line(k)?));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok(Report::new(format!("t2 recursion vs correlation N={}", spec.n()), worst, tol)
        .with("blocks", errs.len() as f64)
        .with("k_points", ks.len() as f64))
}

/// Disjoint blocks `j1 < j2 < j3` around `j0`.
fn factor_blocks(spec: &ChirpSpec, j0: i64) -> [i64; 3] {
    let s = spec.sqrt_n() as i64;
    let hi = *spec.block_indices().end();
    [j0 - s, j0, (j0 + 2).min(hi)]
}

fn factorizations(spec: &ChirpSpec, signal: &SampledSignal, k: f64, j0: i64, tol: f64) -> Result<Vec<Report>> {
    let [j1, j2, j3] = factor_blocks(spec, j0);
    let (m1, m2, m3) = (signal.mask(&[j1]), signal.mask(&[j2]), signal.mask(&[j3]));
    let u = |s: &SampledSignal| fourier_at(s, k);
    let (u1, u2, u3) = (u(&m1)?, u(&m2)?, u(&m3)?);
    let t11 = t_infinity(&[&m1, &m1], k)?;
    let t22 = t_infinity(&[&m2, &m2], k)?;
    use Sign::{Minus, Plus};

    let jjp = (t_infinity(&[&m1, &m2], k)?, factorized_value(&[(u1, Minus), (u2, Plus)])?);
    let klm = (t_infinity(&[&m1, &m2, &m3], k)?, factorized_value(&[(u1, Minus), (u2, Plus), (u3, Minus)])?);
    let kkp = (t_infinity(&[&m1, &m1, &m2], k)?, factorized_value(&[(t11, Plus), (u2, Minus)])?);
    let kpp = (t_infinity(&[&m1, &m2, &m2], k)?, u1.conj() * (u2.norm_sqr() - t22));

    let blocks = format!("blocks {j1},{j2},{j3}");
    let mut out: Vec<Report> = [("jjp", jjp), ("klm", klm), ("kkp", kkp), ("kpp", kpp)]
        .into_iter()
        .map(|(name, (direct, product))| {
            Report::new(format!("factorization {name}"), rel(direct, product), tol)
                .with("magnitude", product.norm())
                .note(blocks.clone())
        })
        .collect();

    // the split routines must reassemble the full values
    let last = j0 - spec.sqrt_n() as i64;
    let x = spec.gap_after(last);
    let truncated = signal.select(&spec.block_indices().filter(|j| *j <= last).collect::<Vec<_>>())?;
    let (jj, jjp) = t2_split(signal, k, last)?;
    let direct = crate::multilinear::t_scan(&[signal, signal], k, &[x])?.probes[0].1;
    out.push(
        Report::new("t2 split reassembles", rel(jj + jjp, direct), tol)
            .with("jjp_fraction", jjp.norm() / direct.norm())
            .with("prefix_check", rel(t_infinity(&[&truncated, &truncated], k)?, direct)),
    );
    let split = t3_split(signal, k, j0)?;
    let total = t_infinity(&[signal, signal, signal], k)?;
    out.push(Report::new("t3 split reassembles", rel(split.total(), total), tol).with("magnitude", total.norm()));
    Ok(out)
}

fn brute_force(ctx: &Context, tol: f64) -> Result<Vec<Report>> {
    let mut out = Vec::new();
    for (name, sig, k) in [
        ("toy", toy_signal(ctx.bump.clone())?, 0.6),
        ("wide toy", wide_toy_signal(ctx.bump.clone())?, 0.5),
    ] {
        for n in 1..=3 {
            let sigs = vec![&sig; n];
            let rec = t_infinity(&sigs, k)?;
            let bf = brute_force_simplex(&sigs, k)?;
            out.push(Report::new(format!("brute force {name} n={n}"), rel(bf, rec), tol).with("magnitude", rec.norm()));
        }
    }
    Ok(out)
}

/// `H_-(|F^_j|^2)(k)` through the discrete Riesz projection of the closed-form
/// spectrum. The grid holds both the peak at `k_j = A j / N` and its mirror
/// at `-k_j` (which carries the `O(1/N)` background), and is zero-extended
/// to four times that reach so the periodic kernel is close to `1/k`.
pub fn riesz_block_value(spec: &ChirpSpec, j: i64, k: f64) -> Result<Complex64> {
    let nf = spec.n() as f64;
    let kj = spec.a() * j as f64 / nf;
    // the autocorrelation of a block lives on |w| <= N / 2, so the grid period
    // pi / dk must exceed N; beyond |N k' -+ A j| = RIESZ_REACH the spectrum is
    // below 1e-30 of its peak and is set to zero
    let dk = PI / (4.0 * nf);
    let reach = RIESZ_REACH / nf;
    let extent = 4.0 * (kj.abs() + reach).max(k.abs());
    let below = ((extent + k) / dk).ceil() as usize;
    let above = ((extent - k) / dk).ceil() as usize;
    let ks: Vec<f64> = (0..=below + above).map(|i| k + (i as f64 - below as f64) * dk).collect();
    let values = ks
        .iter()
        .map(|kk| {
            if (kk - kj).abs() > reach && (kk + kj).abs() > reach {
                return Complex64::new(0.0, 0.0);
            }
            let (near, far) = block_ft_closed_form(spec, j, *kk);
            Complex64::new((near + far).norm_sqr(), 0.0)
        })
        .collect();
    let proj = riesz_minus_grid(&Spectrum::new(ks, values)?)?;
    if !proj.edges_decayed() {
        return Err(Error::InvalidParameter(format!("Riesz window for block {j} is too narrow")));
    }
    Ok(proj.spectrum.values[below])
}

fn inverse_law(cfg: &RunConfig, spec: &ChirpSpec, signal: &SampledSignal, k: f64, j0: i64) -> Result<Vec<Report>> {
    let tol = &cfg.tolerances;
    let window = FitWindow::default_for(spec.n());
    let blocks: Vec<i64> = spec.block_indices().filter(|j| window.contains(j - j0)).collect();
    let values = blocks
        .par_iter()
        .map(|&j| {
            let b = signal.block(j)?;
            t_infinity(&[&b, &b], k)
        })
        .collect::<Result<Vec<_>>>()?;
    let map: BTreeMap<i64, Complex64> = blocks.iter().map(|j| j - j0).zip(values.iter().copied()).collect();
    let fit = fit_inverse_law(&map, window)?;

    let mut out = vec![
        Report::new("inverse law fit 1 - R^2", 1.0 - fit.r2, 1.0 - tol.inverse_r2)
            .with("c_re", fit.constant.re)
            .with("c_im", fit.constant.im)
            .with("c_abs", fit.constant.norm())
            .with("background_im", fit.background.im)
            .with("points", fit.points as f64),
        Report::new("inverse law quadratic envelope", fit.envelope_ratio, tol.envelope).with("envelope", fit.envelope),
    ];

    // Re = |F^_j|^2 / 2 >= 0; Im carries sgn(j0 - j) times one fixed sign
    let lead = fit.constant.im.signum();
    let mut sign_violations = 0usize;
    for (d, v) in &map {
        if v.re < 0.0 {
            sign_violations += 1;
        }
        if v.im.signum() != lead * (*d as f64).signum() {
            sign_violations += 1;
        }
    }
    out.push(
        Report::new("inverse law consistent sign", sign_violations as f64, 0.0)
            .with("min_re", map.values().map(|v| v.re).fold(f64::INFINITY, f64::min)),
    );

    // the Riesz projection of the closed-form spectrum against the lag route
    let near: Vec<i64> = [-2, -1, 1, 2].iter().map(|d| j0 + d).filter(|j| spec.block(*j).is_some()).collect();
    let errs = near
        .par_iter()
        .map(|&j| Ok(rel(riesz_block_value(spec, j, k)?, correlation_transform(&signal.block(j)?, k)?)))
        .collect::<Result<Vec<f64>>>()?;
    out.push(Report::new("riesz projection vs correlation", errs.iter().copied().fold(0.0, f64::max), tol.riesz));
    Ok(out)
}

fn transfer(cfg: &RunConfig, spec: &ChirpSpec, signal: &SampledSignal, k: f64, j0: i64) -> Result<Vec<Report>> {
    let tol = &cfg.tolerances;
    let blocks: Vec<i64> = spec.block_indices().collect();
    let gs = blocks
        .par_iter()
        .map(|&j| block_transfer(signal, j, k))
        .collect::<Result<Vec<_>>>()?;
    let det = gs.iter().map(|g| (g.det() - 1.0).norm()).fold(0.0, f64::max);
    let sym = gs.iter().map(|g| g.symmetry_defect()).fold(0.0, f64::max);

    // prefix products against the direct integration at each block boundary
    let profile = integrate_system(signal, k)?;
    let mut product_err: f64 = 0.0;
    for (i, &j) in blocks.iter().enumerate() {
        let g = compose_product(&gs[..=i])?;
        let col = g.apply([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let (a, b) = profile.value_at(spec.gap_after(j));
        product_err = product_err.max((col[0] - a).norm()).max((col[1] - b).norm());
    }
    let whole = compose_product(&gs)?.max_entry_diff(&total_transfer(signal, k)?);

    let fit = transfer_asymptotics(signal, k, j0, FitWindow::default_for(spec.n()))?;
    Ok(vec![
        Report::new("transfer det = 1", det, tol.transfer),
        Report::new("transfer conjugate symmetry", sym, tol.transfer),
        Report::new("transfer product vs direct", product_err.max(whole), tol.product).with("full_product", whole),
        Report::new("transfer diagonal fit 1 - R^2", 1.0 - fit.upper.r2.min(fit.lower.r2), 1.0 - tol.inverse_r2)
            .with("C_upper", fit.upper.constant.re)
            .with("C_lower", fit.lower.constant.re),
        Report::new("transfer diagonal constant match", fit.constant_mismatch, tol.constant_match),
        Report::new("transfer off-diagonal envelope", fit.offdiag_ratio, tol.envelope)
            .with("K_off", fit.offdiag_decay)
            .with("real_ratio", fit.real_ratio),
    ])
}

fn series(signal: &SampledSignal, k: f64) -> Result<Vec<Report>> {
    // just inside the regime, clear of rounding at the boundary
    let scaled = signal.scaled(SERIES_NORM_LIMIT * (1.0 - 1e-9) / signal.l1_norm());
    let mut out = (1..=SERIES_MAX_ORDER)
        .into_par_iter()
        .map(|n| series_vs_ode(&scaled, k, n))
        .collect::<Result<Vec<_>>>()?;
    let refusal = match series_vs_ode(signal, k, 2) {
        Err(Error::NormRegime { norm, .. }) => Report::new("series refuses full chirp", 0.0, 0.0).with("l1_norm", norm),
        Err(e) => Report::failed("series refuses full chirp", e.to_string()),
        Ok(_) => Report::failed("series refuses full chirp", "full chirp was accepted"),
    };
    out.push(refusal);
    Ok(out)
}

fn conservation(signal: &SampledSignal, ks: &[f64], tol: f64) -> Result<Report> {
    let drift = ks
        .par_iter()
        .map(|k| scan_system(signal, *k).map(|s| s.max_drift))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::new("conservation |a|^2 - |b|^2 = 1", drift.iter().copied().fold(0.0, f64::max), tol))
}

/// A single wide bump with no carrier, structurally unlike the chirp.
fn single_bump(ctx: &Context, dx: f64) -> Result<SampledSignal> {
    let block = Block { index: 0, center: 0.0, scale: 8.0, amplitude: 0.5, carrier: 0.0 };
    sample_blocks(&BlockSignal::new(ctx.bump.clone(), vec![block])?, dx, usize::MAX, SignalMeta::default())
}

fn scattering_identity(cfg: &RunConfig, ctx: &Context) -> Result<Vec<Report>> {
    let tol = cfg.tolerances.scattering_identity;
    let (_, chirp) = ctx.sample(SCATTERING_IDENTITY_N, cfg.oversample)?;
    let window = IdentityWindow {
        k_max: 3.0 * ctx.a,
        intervals: SCATTERING_INTERVALS,
        tail_budget: IdentityWindow::DEFAULT_TAIL_BUDGET,
    };
    let bump = single_bump(ctx, chirp.dx())?;
    let weak_sig = chirp.scaled(WEAK_COUPLING);
    let runs = [&weak_sig, &chirp, &bump]
        .par_iter()
        .map(|s| scattering_identity_value(s, &window))
        .collect::<Result<Vec<_>>>()?;
    let get = |i: usize| runs[i].ok_or(Error::Empty("scattering identity signal"));
    let (weak, full, single) = (get(0)?, get(1)?, get(2)?);
    let zero = scattering_identity_value(&chirp.zeros_like(), &window)?;
    Ok(vec![
        Report::new("scattering identity weak coupling", (weak.ratio / FRAC_PI_2 - 1.0).abs(), tol)
            .with("ratio", weak.ratio)
            .with("tail_fraction", weak.tail_fraction),
        Report::new("scattering identity chirp vs bump", (full.ratio / single.ratio - 1.0).abs(), tol)
            .with("chirp_ratio", full.ratio)
            .with("bump_ratio", single.ratio)
            .with("tail_fraction", full.tail_fraction.max(single.tail_fraction)),
        Report::new("scattering identity zero signal skipped", if zero.is_none() { 0.0 } else { 1.0 }, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{make_bump, BumpKind};

    fn bump() -> Arc<BumpProfile> {
        Arc::new(make_bump(BumpKind::default(), 1e-10).unwrap())
    }

    #[test]
    fn toy_signals_fit_the_oracle_budget() {
        for s in [toy_signal(bump()).unwrap(), wide_toy_signal(bump()).unwrap()] {
            let support: f64 = s.segments().iter().map(|g| (g.len() - 1) as f64 * s.dx()).sum();
            assert!(support <= 32.0);
            assert!(brute_force_simplex(&[&s, &s, &s], 0.5).is_ok());
        }
    }

    #[test]
    fn rel_handles_zero_reference() {
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(rel(z, z), 0.0);
        assert_eq!(rel(Complex64::new(3.0, 4.0), z), 5.0);
    }
}
