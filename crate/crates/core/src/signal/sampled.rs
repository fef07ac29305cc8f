use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chirp::{BlockSignal, ChirpSpec};
use crate::error::{Error, Result};
use crate::quadrature::{simpson_real, simpson_weight, PhaseWalk};

/// Largest phase advance per grid step accepted by the quadratures.
pub const PHASE_LIMIT: f64 = 0.2;

/// Default cap on the total number of samples of one signal.
pub const DEFAULT_SAMPLE_BUDGET: usize = 40_000_000;

/// A uniform run of `count` nodes `origin + i * step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledGrid {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
}

/// Samples of one block on its own stretch of the global lattice `x = m dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub block: i64,
    /// Lattice index of the first node.
    pub start: i64,
    pub samples: Vec<f64>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn end(&self) -> i64 {
        self.start + self.samples.len() as i64 - 1
    }
}

/// Metadata recorded when sampling a chirp.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalMeta {
    pub n: Option<u64>,
    pub a: Option<f64>,
    pub k_max: f64,
    pub oversample: f64,
}

/// A real signal on a segmented lattice. Gaps between segments are skipped:
/// the signal vanishes there.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    dx: f64,
    max_carrier: f64,
    segments: Vec<Segment>,
    meta: SignalMeta,
}

impl SampledSignal {
    /// Wraps user-supplied segments. Each needs an odd sample count of at
    /// least 3 and zero endpoint samples; segments must be sorted and disjoint.
    pub fn from_segments(dx: f64, max_carrier: f64, segments: Vec<Segment>, meta: SignalMeta) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidParameter(format!("dx = {dx} must be positive")));
        }
        if segments.is_empty() {
            return Err(Error::Empty("segment list"));
        }
        for s in &segments {
            if s.len() < 3 || s.len() % 2 == 0 {
                return Err(Error::InvalidParameter(format!(
                    "segment {} has {} samples; need an odd count >= 3",
                    s.block,
                    s.len()
                )));
            }
            if s.samples[0] != 0.0 || s.samples[s.len() - 1] != 0.0 {
                return Err(Error::InvalidParameter(format!("segment {} does not vanish at its ends", s.block)));
            }
        }
        for w in segments.windows(2) {
            if w[0].end() >= w[1].start {
                return Err(Error::InvalidParameter(format!(
                    "segments {} and {} overlap on the lattice",
                    w[0].block, w[1].block
                )));
            }
        }
        Ok(Self { dx, max_carrier, segments, meta })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn max_carrier(&self) -> f64 {
        self.max_carrier
    }

    pub fn meta(&self) -> &SignalMeta {
        &self.meta
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment_grid(&self, s: &Segment) -> SampledGrid {
        SampledGrid { origin: s.start as f64 * self.dx, step: self.dx, count: s.len() }
    }

    #[inline]
    pub fn position(&self, lattice: i64) -> f64 {
        lattice as f64 * self.dx
    }

    pub fn total_samples(&self) -> usize {
        self.segments.iter().map(Segment::len).sum()
    }

    pub fn first_position(&self) -> f64 {
        self.position(self.segments[0].start)
    }

    pub fn last_position(&self) -> f64 {
        self.position(self.segments[self.segments.len() - 1].end())
    }

    /// Phase advance per step of the fastest integrand used at frequency `k`.
    pub fn phase_step(&self, k: f64) -> f64 {
        (2.0 * k.abs() + 2.0 * self.max_carrier) * self.dx
    }

    pub fn check_resolution(&self, k: f64) -> Result<()> {
        let phase_step = self.phase_step(k);
        if phase_step > PHASE_LIMIT * (1.0 + 1e-9) {
            return Err(Error::UnresolvedPhase { k, phase_step, limit: PHASE_LIMIT });
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &SampledSignal) -> bool {
        self.dx == other.dx
            && self.segments.len() == other.segments.len()
            && self
                .segments
                .iter()
                .zip(&other.segments)
                .all(|(p, q)| p.start == q.start && p.len() == q.len())
    }

    /// Same grid, samples outside the listed blocks set to zero.
    pub fn mask(&self, keep: &[i64]) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                if keep.contains(&s.block) {
                    s.clone()
                } else {
                    s.clone_with_samples(vec![0.0; s.len()])
                }
            })
            .collect();
        Self { segments, ..self.clone_meta() }
    }

    /// The listed blocks on their own, dropping every other segment.
    pub fn select(&self, blocks: &[i64]) -> Result<Self> {
        let segments: Vec<Segment> = self
            .segments
            .iter()
            .filter(|s| blocks.contains(&s.block))
            .cloned()
            .collect();
        if segments.is_empty() {
            return Err(Error::Empty("selected blocks"));
        }
        Ok(Self { segments, ..self.clone_meta() })
    }

    pub fn block(&self, j: i64) -> Result<Self> {
        self.select(&[j])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| s.clone_with_samples(s.samples.iter().map(|v| v * factor).collect()))
            .collect();
        Self { segments, ..self.clone_meta() }
    }

    pub fn zeros_like(&self) -> Self {
        self.scaled(0.0)
    }

    fn clone_meta(&self) -> Self {
        Self { dx: self.dx, max_carrier: self.max_carrier, segments: Vec::new(), meta: self.meta }
    }

    pub fn integral(&self) -> f64 {
        self.segments.iter().map(|s| simpson_real(&s.samples, self.dx)).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| simpson_real(&s.samples.iter().map(|v| v.abs()).collect::<Vec<_>>(), self.dx))
            .sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| simpson_real(&s.samples.iter().map(|v| v * v).collect::<Vec<_>>(), self.dx))
            .sum()
    }

    /// Writes `j,x,F` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "j,x,F")?;
        for s in &self.segments {
            for (i, v) in s.samples.iter().enumerate() {
                writeln!(out, "{},{:.16e},{:.16e}", s.block, self.position(s.start + i as i64), v)?;
            }
        }
        Ok(())
    }
}

impl Segment {
    fn clone_with_samples(&self, samples: Vec<f64>) -> Segment {
        Segment { block: self.block, start: self.start, samples }
    }
}

/// Step that resolves every integrand up to `k_max` with `oversample` margin.
pub fn resolving_step(k_max: f64, max_carrier: f64, oversample: f64) -> f64 {
    PHASE_LIMIT / (oversample * (2.0 * k_max.abs() + 2.0 * max_carrier))
}

/// Samples a block signal on the lattice `x = m dx`, one segment per block.
pub fn sample_blocks(signal: &BlockSignal, dx: f64, budget: usize, meta: SignalMeta) -> Result<SampledSignal> {
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::InvalidParameter(format!("dx = {dx} must be positive")));
    }
    let mut count = 0usize;
    let mut spans = Vec::with_capacity(signal.blocks().len());
    for b in signal.blocks() {
        let (lo, hi) = b.support();
        let start = (lo / dx).floor() as i64;
        let mut end = (hi / dx).ceil() as i64;
        if (end - start) % 2 == 1 {
            end += 1;
        }
        count += (end - start + 1) as usize;
        spans.push((*b, start, end));
    }
    if count > budget {
        return Err(Error::MemoryBudget { dx, count, budget });
    }
    let bump = signal.bump();
    let segments = spans
        .into_iter()
        .map(|(b, start, end)| Segment {
            block: b.index,
            start,
            samples: (start..=end).map(|m| b.eval(bump, m as f64 * dx)).collect(),
        })
        .collect();
    SampledSignal::from_segments(dx, signal.max_carrier(), segments, meta)
}

/// Samples the chirp so that every integrand up to `k_max` stays resolved.
pub fn sample_signal(spec: &ChirpSpec, k_max: f64, oversample: f64) -> Result<SampledSignal> {
    sample_signal_with_budget(spec, k_max, oversample, DEFAULT_SAMPLE_BUDGET)
}

pub fn sample_signal_with_budget(spec: &ChirpSpec, k_max: f64, oversample: f64, budget: usize) -> Result<SampledSignal> {
    if !(oversample > 0.0) {
        return Err(Error::InvalidParameter(format!("oversample = {oversample} must be positive")));
    }
    if k_max < 3.0 * spec.a() {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} must cover the working window up to 3A = {}",
            3.0 * spec.a()
        )));
    }
    let dx = resolving_step(k_max, spec.signal().max_carrier(), oversample);
    let meta = SignalMeta { n: Some(spec.n()), a: Some(spec.a()), k_max, oversample };
    sample_blocks(spec.signal(), dx, budget, meta)
}

/// Frequency samples with values in the `e^{-2ikx}` convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub k: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub const CONVENTION: &'static str = "factor-2 exponent";

    pub fn new(k: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if k.len() != values.len() {
            return Err(Error::InvalidParameter("spectrum grid and values differ in length".into()));
        }
        Ok(Self { k, values })
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Common spacing, if the grid is uniform to relative precision 1e-9.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.k.len() < 2 {
            return None;
        }
        let h = self.k[1] - self.k[0];
        if !(h > 0.0) {
            return None;
        }
        let ok = self
            .k
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(w[1].abs() * 1e-7));
        ok.then_some(h)
    }
}

/// `count` cell midpoints of `[lo, hi]`; each cell has measure `(hi - lo) / count`.
pub fn cell_centered_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let h = (hi - lo) / count as f64;
    (0..count).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// `\hat F(k) = \int e^{-2ikx} F(x) dx` by composite Simpson per segment,
/// summed in ascending block order.
pub fn fourier_at(signal: &SampledSignal, k: f64) -> Result<Complex64> {
    signal.check_resolution(k)?;
    Ok(fourier_unchecked(signal, k))
}

pub(crate) fn fourier_unchecked(signal: &SampledSignal, k: f64) -> Complex64 {
    let dx = signal.dx();
    let mut total = Complex64::new(0.0, 0.0);
    for s in signal.segments() {
        total += segment_fourier(s, dx, k);
    }
    total
}

pub(crate) fn segment_fourier(s: &Segment, dx: f64, k: f64) -> Complex64 {
    let walk = PhaseWalk::new(-2.0 * k * s.start as f64 * dx, -2.0 * k * dx);
    let count = s.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (v, z)) in s.samples.iter().zip(walk).enumerate() {
        acc += z * (v * simpson_weight(i, count));
    }
    acc * (dx / 3.0)
}

/// Per-block transforms evaluated on the given k values.
pub fn block_spectrum(signal: &SampledSignal, j: i64, k: &[f64]) -> Result<Spectrum> {
    let s = signal
        .segments()
        .iter()
        .find(|s| s.block == j)
        .ok_or_else(|| Error::InvalidParameter(format!("no block {j} in signal")))?;
    let mut values = Vec::with_capacity(k.len());
    for &kk in k {
        signal.check_resolution(kk)?;
        values.push(segment_fourier(s, signal.dx(), kk));
    }
    Spectrum::new(k.to_vec(), values)
}
