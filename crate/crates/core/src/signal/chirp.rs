use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bump::{BumpProfile, SUPPORT_RADIUS};
use crate::error::{Error, Result};

/// One modulated bump `amplitude * cos(2 carrier x) * phi((x - center) / scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub index: i64,
    pub center: f64,
    pub scale: f64,
    pub amplitude: f64,
    pub carrier: f64,
}

impl Block {
    pub fn support(&self) -> (f64, f64) {
        let r = SUPPORT_RADIUS * self.scale;
        (self.center - r, self.center + r)
    }

    #[inline]
    pub fn eval(&self, bump: &BumpProfile, x: f64) -> f64 {
        let y = (x - self.center) / self.scale;
        if y.abs() >= SUPPORT_RADIUS {
            return 0.0;
        }
        self.amplitude * (2.0 * self.carrier * x).cos() * bump.eval(y)
    }
}

/// A finite sum of modulated bumps with pairwise disjoint supports, sorted
/// by position.
#[derive(Clone, Debug)]
pub struct BlockSignal {
    bump: Arc<BumpProfile>,
    blocks: Vec<Block>,
}

impl BlockSignal {
    pub fn new(bump: Arc<BumpProfile>, mut blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Empty("block list"));
        }
        for b in &blocks {
            if !(b.scale > 0.0) || !b.center.is_finite() || !b.amplitude.is_finite() {
                return Err(Error::InvalidParameter(format!("malformed block {b:?}")));
            }
        }
        blocks.sort_by(|p, q| p.center.total_cmp(&q.center));
        for w in blocks.windows(2) {
            if w[0].support().1 >= w[1].support().0 {
                return Err(Error::InvalidParameter(format!(
                    "blocks {} and {} overlap",
                    w[0].index, w[1].index
                )));
            }
        }
        Ok(Self { bump, blocks })
    }

    pub fn bump(&self) -> &BumpProfile {
        &self.bump
    }

    pub fn bump_arc(&self) -> Arc<BumpProfile> {
        Arc::clone(&self.bump)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn max_carrier(&self) -> f64 {
        self.blocks.iter().map(|b| b.carrier.abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.blocks.iter().map(|b| b.eval(&self.bump, x)).sum()
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| Block { amplitude: b.amplitude * factor, ..*b })
            .collect();
        Self { bump: Arc::clone(&self.bump), blocks }
    }

    /// Keeps only the blocks whose index is listed.
    pub fn restrict(&self, indices: &[i64]) -> Result<Self> {
        let blocks: Vec<Block> = self
            .blocks
            .iter()
            .filter(|b| indices.contains(&b.index))
            .copied()
            .collect();
        Self::new(Arc::clone(&self.bump), blocks)
    }
}

/// The chirp family `F = sum_{j=N}^{2N} F_j` with
/// `F_j(x) = N^{-1} cos(2 (A j / N) x) phi(x / N - j)`.
#[derive(Clone, Debug)]
pub struct ChirpSpec {
    n: u64,
    sqrt_n: u64,
    a: f64,
    signal: BlockSignal,
}

pub fn integer_sqrt(n: u64) -> Option<u64> {
    let r = (n as f64).sqrt().round() as u64;
    (r * r == n).then_some(r)
}

pub fn build_chirp(n: u64, a: f64, bump: Arc<BumpProfile>) -> Result<ChirpSpec> {
    let sqrt_n = integer_sqrt(n).ok_or(Error::NotPerfectSquare(n))?;
    if n < 16 {
        return Err(Error::NTooSmall(n));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("A = {a} must be positive")));
    }
    let nf = n as f64;
    let blocks = (n..=2 * n)
        .map(|j| {
            let jf = j as f64;
            Block { index: j as i64, center: nf * jf, scale: nf, amplitude: 1.0 / nf, carrier: a * jf / nf }
        })
        .collect();
    let signal = BlockSignal::new(bump, blocks)?;
    Ok(ChirpSpec { n, sqrt_n, a, signal })
}

impl ChirpSpec {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sqrt_n(&self) -> u64 {
        self.sqrt_n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn bump(&self) -> &BumpProfile {
        self.signal.bump()
    }

    pub fn signal(&self) -> &BlockSignal {
        &self.signal
    }

    pub fn block_indices(&self) -> std::ops::RangeInclusive<i64> {
        self.n as i64..=2 * self.n as i64
    }

    pub fn block(&self, j: i64) -> Option<&Block> {
        let first = self.n as i64;
        if j < first || j > 2 * first {
            return None;
        }
        self.signal.blocks().get((j - first) as usize)
    }

    pub fn eval_block(&self, j: i64, x: f64) -> f64 {
        self.block(j).map_or(0.0, |b| b.eval(self.bump(), x))
    }

    pub fn eval(&self, x: f64) -> f64 {
        // only one block can contain x
        let j = (x / self.n as f64).round() as i64;
        self.eval_block(j, x)
    }

    /// Resonant frequency `A j / N` of block `j`.
    pub fn carrier(&self, j: i64) -> f64 {
        self.a * j as f64 / self.n as f64
    }

    /// Gap position `N (j + 1/2)` just after block `j`.
    pub fn gap_after(&self, j: i64) -> f64 {
        self.n as f64 * (j as f64 + 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::bump::{make_bump, BumpKind};

    fn bump() -> Arc<BumpProfile> {
        Arc::new(make_bump(BumpKind::default(), 1e-10).unwrap())
    }

    #[test]
    fn rejects_non_squares_and_small_n() {
        assert!(matches!(build_chirp(17, 10.0, bump()), Err(Error::NotPerfectSquare(17))));
        assert!(matches!(build_chirp(9, 10.0, bump()), Err(Error::NTooSmall(9))));
        assert!(build_chirp(16, 0.0, bump()).is_err());
    }

    #[test]
    fn block_range_and_support() {
        let spec = build_chirp(16, 10.0, bump()).unwrap();
        assert_eq!(spec.signal().blocks().len(), 17);
        assert_eq!(*spec.block_indices().start(), 16);
        assert_eq!(*spec.block_indices().end(), 32);
        for j in spec.block_indices() {
            let c = 16.0 * j as f64;
            assert_eq!(spec.eval_block(j, c + 4.0), 0.0);
            assert_eq!(spec.eval_block(j, c - 4.0), 0.0);
            assert_eq!(spec.eval_block(j, c + 5.0), 0.0);
            assert!(spec.eval_block(j, c).abs() > 0.0);
        }
        let blocks = spec.signal().blocks();
        for w in blocks.windows(2) {
            assert!(w[0].support().1 < w[1].support().0);
        }
    }

    #[test]
    fn total_equals_sum_of_blocks() {
        let spec = build_chirp(16, 10.0, bump()).unwrap();
        for i in 0..200 {
            let x = 250.0 + 1.37 * i as f64;
            let direct: f64 = spec.block_indices().map(|j| spec.eval_block(j, x)).sum();
            assert_eq!(spec.eval(x), direct);
        }
    }
}
