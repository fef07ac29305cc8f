use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::records::{GrowthRecord, Position};
use super::{create_file, dump_path, elapsed_ms, with_pool, Context, RunConfig};
use crate::error::Result;
use crate::multilinear::{t_infinity, t_max, t_scan, write_profile_csv};
use crate::signal::{cell_centered_grid, fourier_at, SampledSignal};
use crate::spectral::weak_l2_quasinorm;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Index of the largest value, the first one on ties.
fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Per-block `F^_j(k)`, `T_2(F_j, F_j)(k, inf)` and optionally
/// `T_3(F_j, F_j, F_j)(k, inf)`, in ascending `j`.
fn block_terms(signal: &SampledSignal, k: f64, blocks: &[i64], cubic: bool) -> Result<Vec<(Complex64, Complex64, Complex64)>> {
    blocks
        .par_iter()
        .map(|&j| {
            let b = signal.block(j)?;
            let u = fourier_at(&b, k)?;
            let t = t_infinity(&[&b, &b], k)?;
            let s = if cubic { t_infinity(&[&b, &b, &b], k)? } else { ZERO };
            Ok((u, t, s))
        })
        .collect()
}

/// Diagonal (jj) and cross-block (jjp) parts of `T_2(F, F)(k, x)` for
/// `x` in the gap after block `last`.
pub fn t2_split(signal: &SampledSignal, k: f64, last: i64) -> Result<(Complex64, Complex64)> {
    let blocks: Vec<i64> = signal.segments().iter().map(|s| s.block).filter(|j| *j <= last).collect();
    let terms = block_terms(signal, k, &blocks, false)?;
    let mut jj = ZERO;
    let mut jjp = ZERO;
    let mut prefix = ZERO;
    for (u, t, _) in &terms {
        jj += t;
        jjp += prefix * u;
        prefix += u.conj();
    }
    Ok((jj, jjp))
}

/// The four-way split of `T_3(F, F, F)(k, +inf)` and the dominant term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct T3Split {
    pub kkk: Complex64,
    pub kkp: Complex64,
    pub kpp: Complex64,
    pub klm: Complex64,
    /// `sum_{j != j0} sgn(j0 - j) T_2(F_j, F_j) conj(F^_{j0})`.
    pub dominant: Complex64,
}

impl T3Split {
    pub fn total(&self) -> Complex64 {
        self.kkk + self.kkp + self.kpp + self.klm
    }
}

pub fn t3_split(signal: &SampledSignal, k: f64, j0: i64) -> Result<T3Split> {
    let blocks: Vec<i64> = signal.segments().iter().map(|s| s.block).collect();
    let terms = block_terms(signal, k, &blocks, true)?;
    let mut split = T3Split { kkk: ZERO, kkp: ZERO, kpp: ZERO, klm: ZERO, dominant: ZERO };
    // running sums over blocks strictly before the current one
    let (mut sum_t, mut sum_cu, mut pair) = (ZERO, ZERO, ZERO);
    for (u, t, s) in &terms {
        split.kkk += s;
        split.kkp += sum_t * u.conj();
        split.kpp += (u.norm_sqr() - t) * sum_cu;
        split.klm += pair * u.conj();
        pair += sum_cu * u;
        sum_t += t;
        sum_cu += u.conj();
    }
    if let Some(i0) = blocks.iter().position(|j| *j == j0) {
        let cu0 = terms[i0].0.conj();
        for (j, (_, t, _)) in blocks.iter().zip(&terms) {
            if *j != j0 {
                split.dominant += t * cu0 * ((j0 - j).signum() as f64);
            }
        }
    }
    Ok(split)
}

/// `|T_2(F, F)(k, x)|` at the region point, `sup_x |T_2|`, the weak-L2
/// estimator over `[A, 2A]`, and at N = 36 the jj/jjp split.
pub fn run_t2_growth(cfg: &RunConfig, ctx: &Context) -> Result<Vec<GrowthRecord>> {
    cfg.validate()?;
    with_pool(cfg.workers, || {
        let mut out = Vec::new();
        for &n in &cfg.n_list {
            out.extend(t2_for_n(cfg, ctx, n)?);
        }
        Ok(out)
    })
}

fn t2_for_n(cfg: &RunConfig, ctx: &Context, n: u64) -> Result<Vec<GrowthRecord>> {
    let start = Instant::now();
    let (spec, signal) = ctx.sample(n, cfg.oversample)?;
    let j0 = cfg.j0_for(n)?;
    let last = j0 - spec.sqrt_n() as i64;
    let x = spec.gap_after(last);
    let ks = ctx.region_ks(n, j0);

    let scans = ks
        .par_iter()
        .map(|k| t_scan(&[&signal, &signal], *k, &[x]))
        .collect::<Result<Vec<_>>>()?;
    let best = argmax(scans.iter().map(|s| s.probes[0].1.norm()));
    let sup = argmax(scans.iter().map(|s| s.max_abs));

    let a = ctx.a;
    let grid = cell_centered_grid(a, 2.0 * a, cfg.weak_points);
    let sups = grid
        .par_iter()
        .map(|k| t_max(&signal, *k, 2).map(|m| m.0))
        .collect::<Result<Vec<_>>>()?;
    let weak = weak_l2_quasinorm(&sups, a / cfg.weak_points as f64)?;

    let mut records = vec![
        GrowthRecord::new("t2_region", n, j0, ks[best], Position::At(x), scans[best].probes[0].1),
        GrowthRecord::new("t2_sup", n, j0, ks[sup], Position::At(scans[sup].argmax), scans[sup].at_max),
        GrowthRecord::new("t2_weak_l2", n, j0, 1.5 * a, Position::Sup, Complex64::new(weak, 0.0)),
    ];
    if n == 36 {
        let (jj, jjp) = t2_split(&signal, ks[best], last)?;
        records.push(GrowthRecord::new("t2_jj", n, j0, ks[best], Position::At(x), jj));
        records.push(GrowthRecord::new("t2_jjp", n, j0, ks[best], Position::At(x), jjp));
    }
    if let Some(dir) = &cfg.dump_profiles {
        let path = dump_path(dir, &format!("t2_profile_N{n}.csv"))?;
        write_profile_csv(&[&signal, &signal], ks[best], create_file(&path)?, cfg.profile_stride)?;
    }
    let ms = elapsed_ms(cfg, start);
    Ok(records.into_iter().map(|r| r.with_walltime(ms)).collect())
}

/// `|T_3(F, F, F)(k, +inf)|` and its (kkk)/(kkp)/(kpp)/(klm) split plus the
/// dominant term, at the best of the five region frequencies.
pub fn run_t3_growth(cfg: &RunConfig, ctx: &Context) -> Result<Vec<GrowthRecord>> {
    cfg.validate()?;
    with_pool(cfg.workers, || {
        let mut out = Vec::new();
        for &n in &cfg.n_list {
            out.extend(t3_for_n(cfg, ctx, n)?);
        }
        Ok(out)
    })
}

fn t3_for_n(cfg: &RunConfig, ctx: &Context, n: u64) -> Result<Vec<GrowthRecord>> {
    let start = Instant::now();
    let (_, signal) = ctx.sample(n, cfg.oversample)?;
    let j0 = cfg.j0_for(n)?;
    let ks = ctx.region_ks(n, j0);
    let values = ks
        .par_iter()
        .map(|k| t_infinity(&[&signal, &signal, &signal], *k))
        .collect::<Result<Vec<_>>>()?;
    let best = argmax(values.iter().map(|v| v.norm()));
    let k = ks[best];
    let split = t3_split(&signal, k, j0)?;
    let inf = Position::Infinity;
    let records = vec![
        GrowthRecord::new("t3_inf", n, j0, k, inf, values[best]),
        GrowthRecord::new("t3_kkk", n, j0, k, inf, split.kkk),
        GrowthRecord::new("t3_kkp", n, j0, k, inf, split.kkp),
        GrowthRecord::new("t3_kpp", n, j0, k, inf, split.kpp),
        GrowthRecord::new("t3_klm", n, j0, k, inf, split.klm),
        GrowthRecord::new("t3_dominant", n, j0, k, inf, split.dominant),
    ];
    if let Some(dir) = &cfg.dump_profiles {
        let path = dump_path(dir, &format!("t3_profile_N{n}.csv"))?;
        write_profile_csv(&[&signal, &signal, &signal], k, create_file(&path)?, cfg.profile_stride)?;
    }
    let ms = elapsed_ms(cfg, start);
    Ok(records.into_iter().map(|r| r.with_walltime(ms)).collect())
}
