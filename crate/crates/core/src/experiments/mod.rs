//! Scenario drivers: the log N growth of `T_2`, `T_3`, the boundedness of
//! the exact coefficients, and the consolidated identity battery.
//!
//! Every driver fans independent `(N, k)` tasks out to a bounded rayon pool
//! and collects the results in a fixed order, so output does not depend on
//! the worker count.

mod analysis;
mod basics;
mod bounded;
mod config;
mod growth;
mod identities;
mod records;

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

pub use analysis::{analyze_growth, records_for, GrowthFit};
pub use basics::{run_bump_check, run_select_a, BLOCK_FT_TOL};
pub use bounded::run_boundedness;
pub use config::{default_workers, Format, J0Policy, RunConfig, Scenario, Tolerances, DEFAULT_N_LIST, WORKERS_ENV};
pub use growth::{run_t2_growth, run_t3_growth, t2_split, t3_split, T3Split};
pub use identities::{riesz_block_value, run_identities, toy_signal, wide_toy_signal};
pub use records::{emit, emit_reports, to_csv_string, write_csv, GrowthRecord, Position, CSV_HEADER};

use crate::error::{Error, Result};
use crate::signal::{build_chirp, make_bump, sample_signal, select_a, BumpProfile, ChirpSpec, SampledSignal};
use crate::signal::{DEFAULT_J_MAX, DEFAULT_XI_GRID};

/// Tolerance of the bump normalization.
pub const BUMP_TOL: f64 = 1e-10;

/// Shared inputs of a run: the bump and the frequency constant.
#[derive(Clone, Debug)]
pub struct Context {
    pub bump: Arc<BumpProfile>,
    pub a: f64,
}

impl Context {
    /// Builds the bump and takes `A` from the override or the search.
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let bump = Arc::new(make_bump(cfg.bump, BUMP_TOL)?);
        let a = match cfg.a_override {
            Some(a) => a,
            None => select_a(&bump, DEFAULT_XI_GRID, DEFAULT_J_MAX)?,
        };
        Ok(Self { bump, a })
    }

    pub fn with_a(bump: Arc<BumpProfile>, a: f64) -> Self {
        Self { bump, a }
    }

    pub fn chirp(&self, n: u64) -> Result<ChirpSpec> {
        build_chirp(n, self.a, self.bump.clone())
    }

    /// The chirp sampled for the working window `k <= 3A`.
    pub fn sample(&self, n: u64, oversample: f64) -> Result<(ChirpSpec, SampledSignal)> {
        let spec = self.chirp(n)?;
        let signal = sample_signal(&spec, 3.0 * self.a, oversample)?;
        Ok((spec, signal))
    }

    /// The five region frequencies `(A j0 + delta) / N`, `delta` in
    /// `{-1, -1/2, 0, 1/2, 1}`.
    pub fn region_ks(&self, n: u64, j0: i64) -> [f64; 5] {
        let base = self.a * j0 as f64;
        [-1.0, -0.5, 0.0, 0.5, 1.0].map(|d| (base + d) / n as f64)
    }
}

/// Runs `f` on a pool of `workers` threads.
pub(crate) fn with_pool<T, F>(workers: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> Result<T> + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(f)
}

/// Milliseconds since `t` when timing is on, else 0.
pub(crate) fn elapsed_ms(cfg: &RunConfig, t: Instant) -> f64 {
    if cfg.timing {
        t.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

/// Creates the profile dump directory and returns a file path inside it.
pub(crate) fn dump_path(dir: &Path, name: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    Ok(dir.join(name))
}

pub(crate) fn create_file(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Dispatches a growth scenario.
pub fn run_records(cfg: &RunConfig, ctx: &Context) -> Result<Vec<GrowthRecord>> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::T2Growth => run_t2_growth(cfg, ctx),
        Scenario::T3Growth => run_t3_growth(cfg, ctx),
        Scenario::Boundedness => run_boundedness(cfg, ctx),
        other => Err(Error::Config(format!("{} does not produce growth records", other.name()))),
    }
}
