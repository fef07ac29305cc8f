//! The bump profile, the chirp potential and its sampled form.

pub mod bump;
pub mod chirp;
pub mod sampled;
pub mod select;
pub mod verify;

pub use bump::{bump_fourier, fourier_envelope, make_bump, BumpKind, BumpProfile, SUPPORT_RADIUS};
pub use chirp::{build_chirp, integer_sqrt, Block, BlockSignal, ChirpSpec};
pub use sampled::{
    block_spectrum, cell_centered_grid, fourier_at, resolving_step, sample_blocks, sample_signal,
    sample_signal_with_budget, SampledGrid, SampledSignal, Segment, SignalMeta, Spectrum, PHASE_LIMIT,
};
pub use select::{check_a_condition, select_a, select_a_with, ACheck, ASearch, DEFAULT_J_MAX, DEFAULT_XI_GRID, TAIL_BUDGET};
pub use verify::{block_ft_closed_form, verify_block_ft};
