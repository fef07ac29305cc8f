#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use chirplab::experiments::Context;
use chirplab::signal::{make_bump, sample_blocks, Block, BlockSignal, BumpKind, BumpProfile, SampledSignal, SignalMeta};

/// The value the default search returns for the default bump (the search
/// itself is exercised by the unit tests and the acceptance run).
pub const A: f64 = 9.8125;

pub fn bump() -> Arc<BumpProfile> {
    static BUMP: OnceLock<Arc<BumpProfile>> = OnceLock::new();
    BUMP.get_or_init(|| Arc::new(make_bump(BumpKind::default(), 1e-10).unwrap())).clone()
}

pub fn context() -> Context {
    Context::with_a(bump(), A)
}

/// Disjoint modulated bumps `(center, scale, amplitude, carrier)` on `dx`.
pub fn blocks(spec: &[(f64, f64, f64, f64)], dx: f64) -> SampledSignal {
    let blocks = spec
        .iter()
        .enumerate()
        .map(|(i, &(center, scale, amplitude, carrier))| Block { index: i as i64, center, scale, amplitude, carrier })
        .collect();
    sample_blocks(&BlockSignal::new(bump(), blocks).unwrap(), dx, usize::MAX, SignalMeta::default()).unwrap()
}
