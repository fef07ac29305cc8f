use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::records::{GrowthRecord, Position};
use super::{create_file, dump_path, elapsed_ms, with_pool, Context, RunConfig};
use crate::error::Result;
use crate::scattering::{scan_system, write_system_csv};

/// Exact `a`, `b` at the T2 region frequencies: per N the largest `|a|`,
/// `|b|` over `x` and the five `k`, the worst conservation drift, and a
/// zero-potential control row for the first N.
pub fn run_boundedness(cfg: &RunConfig, ctx: &Context) -> Result<Vec<GrowthRecord>> {
    cfg.validate()?;
    with_pool(cfg.workers, || {
        let mut out = Vec::new();
        for (i, &n) in cfg.n_list.iter().enumerate() {
            let start = Instant::now();
            let (_, signal) = ctx.sample(n, cfg.oversample)?;
            let j0 = cfg.j0_for(n)?;
            let ks = ctx.region_ks(n, j0);
            let scans = ks.par_iter().map(|k| scan_system(&signal, *k)).collect::<Result<Vec<_>>>()?;
            let pick = |f: &dyn Fn(usize) -> f64| {
                (0..scans.len()).fold(0, |best, i| if f(i) > f(best) { i } else { best })
            };
            let ia = pick(&|i| scans[i].max_abs_a);
            let ib = pick(&|i| scans[i].max_abs_b);
            let id = pick(&|i| scans[i].max_drift);
            let mut records = vec![
                GrowthRecord::new("bounded_a", n, j0, ks[ia], Position::Sup, scans[ia].at_max_a),
                GrowthRecord::new("bounded_b", n, j0, ks[ib], Position::At(scans[ib].argmax_b), scans[ib].at_max_b),
                GrowthRecord::new("bounded_drift", n, j0, ks[id], Position::Sup, Complex64::new(scans[id].max_drift, 0.0)),
            ];
            if i == 0 {
                let zero = scan_system(&signal.zeros_like(), ks[2])?;
                records.push(GrowthRecord::new("bounded_control_a", n, j0, ks[2], Position::Sup, zero.at_max_a));
                records.push(GrowthRecord::new("bounded_control_b", n, j0, ks[2], Position::Sup, zero.at_max_b));
            }
            if let Some(dir) = &cfg.dump_profiles {
                let path = dump_path(dir, &format!("ab_profile_N{n}.csv"))?;
                write_system_csv(&signal, ks[ib], create_file(&path)?, cfg.profile_stride)?;
            }
            let ms = elapsed_ms(cfg, start);
            out.extend(records.into_iter().map(|r| r.with_walltime(ms)));
        }
        Ok(out)
    })
}
