//! The simplex integrals
//!
//! ```text
//! T_n(F_1, ..., F_n)(k, x) = \int_{x_1 < ... < x_n < x} e^{-2ik sum_j (-1)^j x_j} F_1(x_1) ... F_n(x_n)
//! ```
//!
//! evaluated through the cumulative profiles
//! `W_m(x) = \int_{-inf}^x e^{-2ik(-1)^m t} F_m(t) W_{m-1}(t) dt`, `W_0 = 1`,
//! so that `T_n(...)(k, x) = W_n(x)`. Each level is a cumulative composite
//! Simpson integral on the shared segmented grid; across gaps the profiles
//! are carried unchanged.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{cumulative_pair, PhaseWalk};
use crate::signal::SampledSignal;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn validate(signals: &[&SampledSignal], k: f64) -> Result<()> {
    let first = signals.first().ok_or(Error::Empty("signal list"))?;
    if signals.iter().any(|s| !first.same_grid(s)) {
        return Err(Error::MismatchedGrids);
    }
    for s in signals {
        s.check_resolution(k)?;
    }
    Ok(())
}

/// Runs the recursion, calling `visit(lattice_index, W_1..W_n)` at every
/// node in ascending order. Returns the final profile values.
fn sweep<V>(signals: &[&SampledSignal], k: f64, mut visit: V) -> Result<Vec<Complex64>>
where
    V: FnMut(i64, &[Complex64]),
{
    validate(signals, k)?;
    let n = signals.len();
    let grid = signals[0];
    let dx = grid.dx();

    let mut wa = vec![ZERO; n];
    let mut wb = vec![ZERO; n];
    let mut wc = vec![ZERO; n];
    let mut ga = vec![ZERO; n];

    for (si, seg) in grid.segments().iter().enumerate() {
        let samples: Vec<&[f64]> = signals.iter().map(|s| s.segments()[si].samples.as_slice()).collect();
        //  e^{2ikx}: odd levels use it, even levels its conjugate
        let mut walk = PhaseWalk::new(2.0 * k * seg.start as f64 * dx, 2.0 * k * dx);
        let phase = |z: Complex64, m: usize| if m % 2 == 1 { z } else { z.conj() };

        let z0 = walk.current();
        for m in 0..n {
            let prev = if m == 0 { ONE } else { wa[m - 1] };
            ga[m] = phase(z0, m + 1) * samples[m][0] * prev;
        }
        visit(seg.start, &wa);

        let pairs = (seg.len() - 1) / 2;
        for p in 0..pairs {
            let ib = 2 * p + 1;
            let ic = ib + 1;
            walk.advance();
            let zb = walk.current();
            walk.advance();
            let zc = walk.current();
            for m in 0..n {
                let (pb, pc) = if m == 0 { (ONE, ONE) } else { (wb[m - 1], wc[m - 1]) };
                let gb = phase(zb, m + 1) * samples[m][ib] * pb;
                let gc = phase(zc, m + 1) * samples[m][ic] * pc;
                let (mid, far) = cumulative_pair(ga[m], gb, gc, dx);
                wb[m] = wa[m] + mid;
                wc[m] = wa[m] + far;
                ga[m] = gc;
            }
            visit(seg.start + ib as i64, &wb);
            visit(seg.start + ic as i64, &wc);
            wa.copy_from_slice(&wc);
        }
    }
    Ok(wa)
}

/// All cumulative profiles `W_1..W_n` of one evaluation.
#[derive(Clone, Debug)]
pub struct SimplexProfile {
    k: f64,
    order: usize,
    positions: Vec<f64>,
    /// Node-major: `values[node * order + (m - 1)]`.
    values: Vec<Complex64>,
}

impl SimplexProfile {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// `W_m` at node `i`; `W_0` is identically one.
    pub fn value(&self, m: usize, i: usize) -> Complex64 {
        assert!(m <= self.order);
        if m == 0 {
            ONE
        } else {
            self.values[i * self.order + m - 1]
        }
    }

    pub fn level(&self, m: usize) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        (0..self.positions.len()).map(move |i| (self.positions[i], self.value(m, i)))
    }

    /// `W_m(x)`, using the last node at or before `x` (profiles are constant
    /// across gaps). Zero before the first node for `m >= 1`.
    pub fn value_at(&self, m: usize, x: f64) -> Complex64 {
        let idx = self.positions.partition_point(|p| *p <= x);
        if idx == 0 {
            if m == 0 { ONE } else { ZERO }
        } else {
            self.value(m, idx - 1)
        }
    }

    /// `T_n(...)(k, +inf)`, the last sample of `W_n`.
    pub fn infinity(&self) -> Complex64 {
        self.value(self.order, self.positions.len() - 1)
    }

    /// Writes `x,re_w1,im_w1,...` keeping every `stride`-th node.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> std::io::Result<()> {
        let stride = stride.max(1);
        write!(out, "x")?;
        for m in 1..=self.order {
            write!(out, ",re_w{m},im_w{m}")?;
        }
        writeln!(out)?;
        let last = self.positions.len() - 1;
        for i in (0..self.positions.len()).filter(|i| i % stride == 0 || *i == last) {
            write!(out, "{:.16e}", self.positions[i])?;
            for m in 1..=self.order {
                let v = self.value(m, i);
                write!(out, ",{:.16e},{:.16e}", v.re, v.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn t_profile(signals: &[&SampledSignal], k: f64) -> Result<SimplexProfile> {
    let order = signals.len();
    let capacity = signals.first().map_or(0, |s| s.total_samples());
    let mut positions = Vec::with_capacity(capacity);
    let mut values = Vec::with_capacity(capacity * order.max(1));
    let dx = signals.first().map_or(1.0, |s| s.dx());
    sweep(signals, k, |m, w| {
        positions.push(m as f64 * dx);
        values.extend_from_slice(w);
    })?;
    Ok(SimplexProfile { k, order, positions, values })
}

/// `T_n(F_1, ..., F_n)(k, +inf)` without storing the profiles.
pub fn t_infinity(signals: &[&SampledSignal], k: f64) -> Result<Complex64> {
    let last = sweep(signals, k, |_, _| {})?;
    Ok(last[last.len() - 1])
}

/// Streaming summary of `W_n`: maximum modulus, its first position, the
/// final value and the values at requested probe positions.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexScan {
    pub max_abs: f64,
    pub argmax: f64,
    /// `W_n(argmax)`.
    pub at_max: Complex64,
    pub infinity: Complex64,
    pub probes: Vec<(f64, Complex64)>,
}

pub fn t_scan(signals: &[&SampledSignal], k: f64, probes: &[f64]) -> Result<SimplexScan> {
    let dx = signals.first().map_or(1.0, |s| s.dx());
    let first = signals.first().map_or(0.0, |s| s.first_position());
    let mut max_abs = -1.0f64;
    let mut argmax = first;
    let mut at_max = ZERO;
    let mut probe_values: Vec<(f64, Complex64)> = probes.iter().map(|x| (*x, ZERO)).collect();
    let last = sweep(signals, k, |m, w| {
        let x = m as f64 * dx;
        let v = w[w.len() - 1];
        let a = v.norm();
        if a > max_abs {
            max_abs = a;
            argmax = x;
            at_max = v;
        }
        for p in probe_values.iter_mut() {
            if x <= p.0 {
                p.1 = v;
            }
        }
    })?;
    Ok(SimplexScan { max_abs: max_abs.max(0.0), argmax, at_max, infinity: last[last.len() - 1], probes: probe_values })
}

/// Streams the profile CSV of [`SimplexProfile::write_csv`] without holding
/// the profiles in memory.
pub fn write_profile_csv<W: Write>(signals: &[&SampledSignal], k: f64, mut out: W, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let n = signals.len();
    let dx = signals.first().map_or(1.0, |s| s.dx());
    let io = |e: std::io::Error| Error::Io { path: "<profile>".into(), source: e };
    let mut header = String::from("x");
    for m in 1..=n {
        header.push_str(&format!(",re_w{m},im_w{m}"));
    }
    writeln!(out, "{header}").map_err(io)?;
    let mut count = 0usize;
    let mut failure = None;
    let mut last_line = String::new();
    sweep(signals, k, |m, w| {
        let mut line = format!("{:.16e}", m as f64 * dx);
        for v in w {
            line.push_str(&format!(",{:.16e},{:.16e}", v.re, v.im));
        }
        if count % stride == 0 {
            if let Err(e) = writeln!(out, "{line}") {
                failure.get_or_insert(e);
            }
            last_line.clear();
        } else {
            last_line = line;
        }
        count += 1;
    })?;
    if let Some(e) = failure {
        return Err(io(e));
    }
    if !last_line.is_empty() {
        writeln!(out, "{last_line}").map_err(io)?;
    }
    Ok(())
}

/// `sup_x |T_n(F, ..., F)(k, x)|` over grid nodes, with the smallest
/// maximizing position.
pub fn t_max(signal: &SampledSignal, k: f64, n: usize) -> Result<(f64, f64)> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidParameter(format!("t_max supports n in 1..=3, got {n}")));
    }
    let signals = vec![signal; n];
    let scan = t_scan(&signals, k, &[])?;
    Ok((scan.max_abs, scan.argmax))
}

/// Limits on the direct simplex quadrature.
#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    /// Total covered support, in position units.
    pub max_support: f64,
    /// Node caps for n = 1, 2, 3 on the fine grid.
    pub max_nodes: [usize; 3],
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_support: 32.0, max_nodes: [10_000_000, 40_000, 2_400] }
    }
}

/// Direct n-fold quadrature over the ordered simplex (n <= 3), independent of
/// the recursion. Trapezoid weights in every variable; an index tie between
/// `t` variables gets weight `1/t!`. The O(h^2) diagonal error is removed by
/// one Richardson step against the every-other-node subgrid.
pub fn brute_force_simplex(signals: &[&SampledSignal], k: f64) -> Result<Complex64> {
    brute_force_simplex_with(signals, k, &OracleBudget::default())
}

pub fn brute_force_simplex_with(signals: &[&SampledSignal], k: f64, budget: &OracleBudget) -> Result<Complex64> {
    validate(signals, k)?;
    let n = signals.len();
    if n > 3 {
        return Err(Error::BudgetExceeded(format!("oracle supports n <= 3, got {n}")));
    }
    let grid = signals[0];
    let dx = grid.dx();
    let support: f64 = grid.segments().iter().map(|s| (s.len() - 1) as f64 * dx).sum();
    if support > budget.max_support {
        return Err(Error::BudgetExceeded(format!(
            "support {support} exceeds {} position units",
            budget.max_support
        )));
    }
    let nodes = grid.total_samples();
    if nodes > budget.max_nodes[n - 1] {
        return Err(Error::BudgetExceeded(format!(
            "{nodes} nodes exceed the n = {n} cap of {}",
            budget.max_nodes[n - 1]
        )));
    }

    let fine = weighted_nodes(signals, k, 1);
    let coarse = weighted_nodes(signals, k, 2);
    let s_fine = direct_sum(&fine);
    let s_coarse = direct_sum(&coarse);
    Ok((s_fine * 4.0 - s_coarse) / 3.0)
}

/// `g_m(x_i) = e^{-2ik(-1)^m x_i} F_m(x_i) h` on every `stride`-th node of
/// each segment, ordered by position.
fn weighted_nodes(signals: &[&SampledSignal], k: f64, stride: usize) -> Vec<Vec<Complex64>> {
    let grid = signals[0];
    let h = grid.dx() * stride as f64;
    signals
        .iter()
        .enumerate()
        .map(|(mi, sig)| {
            let sign = if (mi + 1) % 2 == 1 { 1.0 } else { -1.0 };
            let mut out = Vec::new();
            for seg in sig.segments() {
                for (i, v) in seg.samples.iter().enumerate().step_by(stride) {
                    let x = sig.position(seg.start + i as i64);
                    out.push(Complex64::cis(sign * 2.0 * k * x) * (v * h));
                }
            }
            out
        })
        .collect()
}

fn direct_sum(g: &[Vec<Complex64>]) -> Complex64 {
    let m = g[0].len();
    match g.len() {
        1 => g[0].iter().sum(),
        2 => {
            let mut acc = ZERO;
            for i in 0..m {
                let mut inner = g[1][i] * 0.5;
                for j in i + 1..m {
                    inner += g[1][j];
                }
                acc += g[0][i] * inner;
            }
            acc
        }
        3 => {
            let sixth = 1.0 / 6.0;
            let mut acc = ZERO;
            for i in 0..m {
                let gi = g[0][i];
                // i = j = l
                let mut inner_i = g[1][i] * g[2][i] * sixth;
                // i = j < l
                for l in i + 1..m {
                    inner_i += g[1][i] * g[2][l] * 0.5;
                }
                for j in i + 1..m {
                    // i < j = l
                    let mut inner_j = g[2][j] * 0.5;
                    for l in j + 1..m {
                        inner_j += g[2][l];
                    }
                    inner_i += g[1][j] * inner_j;
                }
                acc += gi * inner_i;
            }
            acc
        }
        _ => unreachable!("checked by caller"),
    }
}

/// Orientation of one factor in a factorized simplex value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    /// The factor enters conjugated.
    Minus,
}

/// Product of the factors, conjugating those flagged [`Sign::Minus`].
pub fn factorized_value(factors: &[(Complex64, Sign)]) -> Result<Complex64> {
    if factors.is_empty() {
        return Err(Error::Empty("factor list"));
    }
    Ok(factors.iter().fold(ONE, |acc, (z, s)| match s {
        Sign::Plus => acc * z,
        Sign::Minus => acc * z.conj(),
    }))
}
