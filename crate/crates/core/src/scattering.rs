//! The exact scattering problem behind the expansions:
//!
//! ```text
//! a' = F e^{-2ikx} b,   b' = F e^{2ikx} a,   a(-inf) = 1, b(-inf) = 0,
//! ```
//!
//! integrated by classical RK4. The step is two grid spacings so that the
//! half-step stage lands on a stored sample and no interpolation of `F` is
//! needed. Across gaps `F = 0` and the state is carried unchanged.
//!
//! For real `F`, `|a|^2 - |b|^2` is conserved; every integration measures its
//! drift and fails beyond [`DRIFT_FAILURE`], but never renormalizes.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilinear::t_infinity;
use crate::quadrature::{simpson_real, PhaseWalk};
use crate::report::Report;
use crate::signal::{fourier_at, SampledSignal};
use crate::spectral::{fit_inverse_law, FitResult, FitWindow};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Conservation drift treated as an integration failure.
pub const DRIFT_FAILURE: f64 = 1e-6;

/// Row-major 2x2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self { m: [[ONE, ZERO], [ZERO, ONE]] }
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (p, q) = (&self.m, &rhs.m);
        let e = |i: usize, j: usize| p[i][0] * q[0][j] + p[i][1] * q[1][j];
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [self.m[0][0] * v[0] + self.m[0][1] * v[1], self.m[1][0] * v[0] + self.m[1][1] * v[1]]
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.m;
        let fro = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
        let det = self.det().norm_sqr();
        let disc = (fro * fro - 4.0 * det).max(0.0).sqrt();
        (0.5 * (fro + disc)).sqrt()
    }

    /// `max(|m22 - conj m11|, |m21 - conj m12|)`; zero for real potentials.
    pub fn symmetry_defect(&self) -> f64 {
        let [[a, b], [c, d]] = self.m;
        (d - a.conj()).norm().max((c - b.conj()).norm())
    }

    pub fn max_entry_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    /// Largest entrywise distance from the identity.
    pub fn identity_defect(&self) -> f64 {
        self.max_entry_diff(&Self::identity())
    }

    /// `[[[re, im], [re, im]], [[re, im], [re, im]]]`.
    pub fn to_json(&self) -> serde_json::Value {
        let row = |r: &[Complex64; 2]| serde_json::json!([[r[0].re, r[0].im], [r[1].re, r[1].im]]);
        serde_json::json!([row(&self.m[0]), row(&self.m[1])])
    }
}

#[inline]
fn field(f: f64, z: Complex64, y: [Complex64; 2]) -> [Complex64; 2] {
    [z.conj() * (f * y[1]), z * (f * y[0])]
}

#[inline]
fn axpy(y: [Complex64; 2], h: f64, k: [Complex64; 2]) -> [Complex64; 2] {
    [y[0] + k[0] * h, y[1] + k[1] * h]
}

/// One RK4 step of length `2 dx` with stages at three consecutive samples.
#[inline]
fn rk4_step(y: [Complex64; 2], f: [f64; 3], z: [Complex64; 3], dx: f64) -> [Complex64; 2] {
    let k1 = field(f[0], z[0], y);
    let k2 = field(f[1], z[1], axpy(y, dx, k1));
    let k3 = field(f[1], z[1], axpy(y, dx, k2));
    let k4 = field(f[2], z[2], axpy(y, 2.0 * dx, k3));
    let h6 = dx / 3.0;
    [
        y[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * h6,
        y[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * h6,
    ]
}

/// `| |y0|^2 - |y1|^2 - sign |`; the form is `+1` for `(a, b)` columns and
/// `-1` for `(b, a)`-ordered ones.
#[inline]
fn drift(y: [Complex64; 2], sign: f64) -> f64 {
    (y[0].norm_sqr() - y[1].norm_sqr() - sign).abs()
}

/// Propagates each column through the listed segments of `signal`, calling
/// `visit(lattice, columns)` at every even node of each segment.
fn propagate<V>(
    signal: &SampledSignal,
    segments: &[usize],
    k: f64,
    columns: &mut [[Complex64; 2]],
    mut visit: V,
) -> Result<()>
where
    V: FnMut(i64, &[[Complex64; 2]]),
{
    signal.check_resolution(k)?;
    let dx = signal.dx();
    for &si in segments {
        let seg = &signal.segments()[si];
        let mut walk = PhaseWalk::new(2.0 * k * seg.start as f64 * dx, 2.0 * k * dx);
        let f = &seg.samples;
        let mut za = walk.current();
        visit(seg.start, columns);
        for p in 0..(f.len() - 1) / 2 {
            walk.advance();
            let zb = walk.current();
            walk.advance();
            let zc = walk.current();
            let fs = [f[2 * p], f[2 * p + 1], f[2 * p + 2]];
            for y in columns.iter_mut() {
                *y = rk4_step(*y, fs, [za, zb, zc], dx);
            }
            za = zc;
            visit(seg.start + 2 * p as i64 + 2, columns);
        }
    }
    Ok(())
}

fn all_segments(signal: &SampledSignal) -> Vec<usize> {
    (0..signal.segments().len()).collect()
}

/// `a(x), b(x)` at the even sample nodes of every segment.
#[derive(Clone, Debug)]
pub struct ScatteringProfile {
    pub k: f64,
    pub positions: Vec<f64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub a_inf: Complex64,
    pub b_inf: Complex64,
    pub max_drift: f64,
}

impl ScatteringProfile {
    /// `(a, b)` at the last node at or before `x`; `(1, 0)` before the first.
    pub fn value_at(&self, x: f64) -> (Complex64, Complex64) {
        let idx = self.positions.partition_point(|p| *p <= x);
        if idx == 0 {
            (ONE, ZERO)
        } else {
            (self.a[idx - 1], self.b[idx - 1])
        }
    }

    /// `x,re_a,im_a,re_b,im_b`, keeping every `stride`-th node and the last.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> std::io::Result<()> {
        let stride = stride.max(1);
        writeln!(out, "x,re_a,im_a,re_b,im_b")?;
        let last = self.positions.len().saturating_sub(1);
        for i in (0..self.positions.len()).filter(|i| i % stride == 0 || *i == last) {
            let (a, b) = (self.a[i], self.b[i]);
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", self.positions[i], a.re, a.im, b.re, b.im)?;
        }
        Ok(())
    }
}

fn check_drift(k: f64, drift: f64) -> Result<()> {
    if drift > DRIFT_FAILURE || drift.is_nan() {
        return Err(Error::ConservationDrift { k, drift, limit: DRIFT_FAILURE });
    }
    Ok(())
}

pub fn integrate_system(signal: &SampledSignal, k: f64) -> Result<ScatteringProfile> {
    let cap = signal.total_samples() / 2 + signal.segments().len();
    let (mut positions, mut a, mut b) = (Vec::with_capacity(cap), Vec::with_capacity(cap), Vec::with_capacity(cap));
    let mut max_drift: f64 = 0.0;
    let mut cols = [[ONE, ZERO]];
    propagate(signal, &all_segments(signal), k, &mut cols, |m, y| {
        positions.push(signal.position(m));
        a.push(y[0][0]);
        b.push(y[0][1]);
        max_drift = max_drift.max(drift(y[0], 1.0));
    })?;
    check_drift(k, max_drift)?;
    Ok(ScatteringProfile { k, positions, a, b, a_inf: cols[0][0], b_inf: cols[0][1], max_drift })
}

/// Streaming summary of one integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringScan {
    pub k: f64,
    pub max_abs_a: f64,
    /// `a` where `|a|` peaks.
    pub at_max_a: Complex64,
    pub max_abs_b: f64,
    pub at_max_b: Complex64,
    /// First position attaining `max_abs_b`.
    pub argmax_b: f64,
    pub a_inf: Complex64,
    pub b_inf: Complex64,
    pub max_drift: f64,
}

pub fn scan_system(signal: &SampledSignal, k: f64) -> Result<ScatteringScan> {
    let mut s = ScatteringScan {
        k,
        max_abs_a: 1.0,
        at_max_a: ONE,
        max_abs_b: 0.0,
        at_max_b: ZERO,
        argmax_b: signal.first_position(),
        a_inf: ONE,
        b_inf: ZERO,
        max_drift: 0.0,
    };
    let mut cols = [[ONE, ZERO]];
    propagate(signal, &all_segments(signal), k, &mut cols, |m, y| {
        let (a, b) = (y[0][0].norm(), y[0][1].norm());
        if a > s.max_abs_a {
            s.max_abs_a = a;
            s.at_max_a = y[0][0];
        }
        if b > s.max_abs_b {
            s.max_abs_b = b;
            s.at_max_b = y[0][1];
            s.argmax_b = signal.position(m);
        }
        s.max_drift = s.max_drift.max(drift(y[0], 1.0));
    })?;
    check_drift(k, s.max_drift)?;
    s.a_inf = cols[0][0];
    s.b_inf = cols[0][1];
    Ok(s)
}

/// Streams `x,re_a,im_a,re_b,im_b` rows of one integration.
pub fn write_system_csv<W: Write>(signal: &SampledSignal, k: f64, mut out: W, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let io = |e: std::io::Error| Error::Io { path: "<profile>".into(), source: e };
    writeln!(out, "x,re_a,im_a,re_b,im_b").map_err(io)?;
    let mut count = 0usize;
    let mut failure = None;
    let mut pending = None;
    let mut cols = [[ONE, ZERO]];
    propagate(signal, &all_segments(signal), k, &mut cols, |m, y| {
        let row = (signal.position(m), y[0]);
        if count % stride == 0 {
            if let Err(e) = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                row.0, row.1[0].re, row.1[0].im, row.1[1].re, row.1[1].im
            ) {
                failure.get_or_insert(e);
            }
            pending = None;
        } else {
            pending = Some(row);
        }
        count += 1;
    })?;
    if let Some(e) = failure {
        return Err(io(e));
    }
    if let Some((x, y)) = pending {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", x, y[0].re, y[0].im, y[1].re, y[1].im).map_err(io)?;
    }
    Ok(())
}

/// `G(+inf)` for the listed segments, started from the identity.
fn transfer_over(signal: &SampledSignal, segments: &[usize], k: f64) -> Result<TransferMatrix> {
    // columns of G, stored as (G_1c, G_2c)
    let mut cols = [[ONE, ZERO], [ZERO, ONE]];
    let mut worst: f64 = 0.0;
    propagate(signal, segments, k, &mut cols, |_, y| {
        worst = worst.max(drift(y[0], 1.0)).max(drift(y[1], -1.0));
    })?;
    check_drift(k, worst)?;
    Ok(TransferMatrix { m: [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]] })
}

/// `G_j(+inf)`: the system over block `j`'s support alone, identity start.
pub fn block_transfer(signal: &SampledSignal, j: i64, k: f64) -> Result<TransferMatrix> {
    let si = signal
        .segments()
        .iter()
        .position(|s| s.block == j)
        .ok_or_else(|| Error::InvalidParameter(format!("signal has no block {j}")))?;
    transfer_over(signal, &[si], k)
}

/// Transfer matrix of the whole signal.
pub fn total_transfer(signal: &SampledSignal, k: f64) -> Result<TransferMatrix> {
    transfer_over(signal, &all_segments(signal), k)
}

/// `G_{j1} ... G_N` from transfers listed in increasing `j`.
pub fn compose_product(transfers: &[TransferMatrix]) -> Result<TransferMatrix> {
    if transfers.is_empty() {
        return Err(Error::Empty("transfer list"));
    }
    Ok(transfers.iter().fold(TransferMatrix::identity(), |acc, g| g.mul(&acc)))
}

/// Diagonal asymptotics of the block transfers around a resonant `j0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransferFit {
    pub j0: i64,
    pub k: f64,
    /// Fit of `Im(G11 - 1)`: `C / (j - j0) + K / (j - j0)^2`.
    pub upper: FitResult,
    /// The same for `Im(G22 - 1)`, expected with the opposite `C`.
    pub lower: FitResult,
    /// `|C_upper + C_lower| / |C_upper|`.
    pub constant_mismatch: f64,
    /// `K_off = max |d|^2 |G12|` over the inner half of the window and the
    /// worst `|d|^2 |G12| / K_off` over the whole window.
    pub offdiag_decay: f64,
    pub offdiag_ratio: f64,
    /// Same envelope for `Re(G11 - 1)`.
    pub real_decay: f64,
    pub real_ratio: f64,
    pub max_det_defect: f64,
    pub max_symmetry_defect: f64,
}

/// Quadratic envelope: fitted on `|d| <= split`, tested everywhere.
fn quadratic_envelope(values: &[(i64, f64)], split: f64) -> (f64, f64) {
    let k = values
        .iter()
        .filter(|(d, _)| d.abs() as f64 <= split)
        .map(|(d, v)| v * (d * d) as f64)
        .fold(0.0, f64::max);
    let worst = values.iter().map(|(d, v)| v * (d * d) as f64).fold(0.0, f64::max);
    let ratio = if k > 0.0 { worst / k } else if worst == 0.0 { 1.0 } else { f64::INFINITY };
    (k, ratio)
}

pub fn transfer_asymptotics(signal: &SampledSignal, k: f64, j0: i64, window: FitWindow) -> Result<TransferFit> {
    let blocks: Vec<i64> = signal
        .segments()
        .iter()
        .map(|s| s.block)
        .filter(|j| window.contains(j - j0))
        .collect();
    if blocks.len() < 2 {
        return Err(Error::Empty("transfer fit window"));
    }
    let mut upper = std::collections::BTreeMap::new();
    let mut lower = std::collections::BTreeMap::new();
    let mut off = Vec::new();
    let mut re = Vec::new();
    let (mut det_defect, mut sym_defect): (f64, f64) = (0.0, 0.0);
    for &j in &blocks {
        let g = block_transfer(signal, j, k)?;
        let d = j - j0;
        upper.insert(d, Complex64::new((g.m[0][0] - ONE).im, 0.0));
        lower.insert(d, Complex64::new((g.m[1][1] - ONE).im, 0.0));
        off.push((d, g.m[0][1].norm()));
        re.push((d, (g.m[0][0] - ONE).re.abs()));
        det_defect = det_defect.max((g.det() - ONE).norm());
        sym_defect = sym_defect.max(g.symmetry_defect());
    }
    let upper = fit_inverse_law(&upper, window)?;
    let lower = fit_inverse_law(&lower, window)?;
    let constant_mismatch = (upper.constant + lower.constant).norm() / upper.constant.norm();
    let split = 0.5 * (window.min_abs + window.max_abs) as f64;
    let (offdiag_decay, offdiag_ratio) = quadratic_envelope(&off, split);
    let (real_decay, real_ratio) = quadratic_envelope(&re, split);
    Ok(TransferFit {
        j0,
        k,
        upper,
        lower,
        constant_mismatch,
        offdiag_decay,
        offdiag_ratio,
        real_decay,
        real_ratio,
        max_det_defect: det_defect,
        max_symmetry_defect: sym_defect,
    })
}

/// Scattering-identity quadrature over `k` in `[0, k_max]`, using that
/// `log|a(k)|` is even in `k` for real potentials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityWindow {
    pub k_max: f64,
    /// Number of Simpson intervals (made even).
    pub intervals: usize,
    /// Largest tolerated fraction of `pi * int F^2` outside the window.
    pub tail_budget: f64,
}

impl IdentityWindow {
    pub const DEFAULT_TAIL_BUDGET: f64 = 0.01;
}

/// Per-signal outcome of the identity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityValue {
    pub log_integral: f64,
    pub energy: f64,
    pub ratio: f64,
    /// Fraction of `pi * int F^2` outside the window, from Plancherel.
    pub tail_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub values: Vec<Option<IdentityValue>>,
    pub mean_ratio: f64,
    pub spread: f64,
}

/// `int log|a(k, +inf)| dk / int F^2 dx` for one signal; `None` for a zero
/// signal.
pub fn scattering_identity_value(signal: &SampledSignal, window: &IdentityWindow) -> Result<Option<IdentityValue>> {
    let energy = signal.l2_norm_sq();
    if energy == 0.0 {
        return Ok(None);
    }
    if !(window.k_max > 0.0) || window.intervals < 2 {
        return Err(Error::InvalidParameter("identity window needs k_max > 0 and >= 2 intervals".into()));
    }
    let count = window.intervals + window.intervals % 2 + 1;
    let dk = window.k_max / (count - 1) as f64;
    let mut logs = Vec::with_capacity(count);
    let mut power = Vec::with_capacity(count);
    for i in 0..count {
        let k = i as f64 * dk;
        let s = scan_system(signal, k)?;
        logs.push(s.a_inf.norm().ln());
        power.push(fourier_at(signal, k)?.norm_sqr());
    }
    let log_integral = 2.0 * simpson_real(&logs, dk);
    let inside = 2.0 * simpson_real(&power, dk);
    let total = std::f64::consts::PI * energy;
    let tail_fraction = ((total - inside) / total).max(0.0);
    if tail_fraction > window.tail_budget {
        return Err(Error::TailBudget { fraction: tail_fraction, budget: window.tail_budget });
    }
    Ok(Some(IdentityValue { log_integral, energy, ratio: log_integral / energy, tail_fraction }))
}

pub fn scattering_identity_ratio(signals: &[&SampledSignal], window: &IdentityWindow) -> Result<IdentitySummary> {
    let values = signals
        .iter()
        .map(|s| scattering_identity_value(s, window))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = values.iter().flatten().map(|v| v.ratio).collect();
    let mean_ratio = if ratios.is_empty() { 0.0 } else { crate::stats::mean(&ratios) };
    let spread = crate::stats::max_relative_spread(&ratios);
    Ok(IdentitySummary { values, mean_ratio, spread })
}

/// Largest `||F||_1` for which the series comparison is attempted.
pub const SERIES_NORM_LIMIT: f64 = 0.5;
pub const SERIES_MAX_ORDER: usize = 6;

/// Compares `a(+inf) = 1 + sum_even T_n`, `b(+inf) = sum_odd T_n` truncated
/// at `n_max` against the integrator.
pub fn series_vs_ode(signal: &SampledSignal, k: f64, n_max: usize) -> Result<Report> {
    let norm = signal.l1_norm();
    if norm > SERIES_NORM_LIMIT {
        return Err(Error::NormRegime { norm, limit: SERIES_NORM_LIMIT });
    }
    if !(1..=SERIES_MAX_ORDER).contains(&n_max) {
        return Err(Error::InvalidParameter(format!("series order must lie in 1..={SERIES_MAX_ORDER}, got {n_max}")));
    }
    let exact = scan_system(signal, k)?;
    let (mut a, mut b) = (ONE, ZERO);
    for n in 1..=n_max {
        let t = t_infinity(&vec![signal; n], k)?;
        if n % 2 == 0 {
            a += t;
        } else {
            b += t;
        }
    }
    let err_a = (exact.a_inf - a).norm();
    let err_b = (exact.b_inf - b).norm();
    let factorial: f64 = (1..=n_max + 1).map(|i| i as f64).product();
    let bound = 2.0 * norm.powi(n_max as i32 + 1) / factorial + 1e-8;
    Ok(Report::new(format!("series n_max={n_max} k={k}"), err_a.max(err_b), bound)
        .with("err_a", err_a)
        .with("err_b", err_b)
        .with("l1_norm", norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{Segment, SignalMeta};

    fn toy(dx: f64, amp: f64) -> SampledSignal {
        let bump = |u: f64| if u.abs() < 1.0 { (-1.0 / (1.0 - u * u)).exp() } else { 0.0 };
        let mut segs = Vec::new();
        for (block, centre, amplitude, carrier) in [(0, 1.0, 1.0, 0.3), (1, 2.6, -0.7, 0.8)] {
            let start = ((centre - 0.5) / dx).round() as i64;
            let mut end = ((centre + 0.5) / dx).round() as i64;
            if (end - start) % 2 == 1 {
                end += 1;
            }
            let samples = (start..=end)
                .map(|m| {
                    let x = m as f64 * dx;
                    amp * amplitude * bump(2.0 * (x - centre)) * (2.0 * carrier * x).cos()
                })
                .collect();
            segs.push(Segment { block, start, samples });
        }
        SampledSignal::from_segments(dx, 0.8, segs, SignalMeta::default()).unwrap()
    }

    #[test]
    fn zero_signal_is_trivial() {
        let z = toy(0.01, 0.0);
        let p = integrate_system(&z, 2.0).unwrap();
        assert!(p.a.iter().all(|a| *a == ONE) && p.b.iter().all(|b| *b == ZERO));
        assert_eq!(block_transfer(&z, 1, 2.0).unwrap(), TransferMatrix::identity());
    }

    #[test]
    fn conservation_and_structure() {
        let s = toy(0.005, 3.0);
        for k in [0.0, 0.7, 2.5, -1.3] {
            let p = integrate_system(&s, k).unwrap();
            assert!(p.max_drift < 1e-8, "k={k} drift {}", p.max_drift);
            let g = total_transfer(&s, k).unwrap();
            assert!((g.det() - ONE).norm() < 1e-8);
            assert!(g.symmetry_defect() < 1e-12);
            assert!((g.m[0][0] - p.a_inf).norm() < 1e-14 && (g.m[1][0] - p.b_inf).norm() < 1e-14);
        }
    }

    #[test]
    fn product_matches_direct_integration() {
        let s = toy(0.005, 2.0);
        let k = 1.1;
        let gs: Vec<_> = [0, 1].iter().map(|j| block_transfer(&s, *j, k).unwrap()).collect();
        let prod = compose_product(&gs).unwrap();
        let direct = total_transfer(&s, k).unwrap();
        assert!(prod.max_entry_diff(&direct) < 1e-12);
        let p = integrate_system(&s, k).unwrap();
        let (a, b) = p.value_at(2.0);
        assert!((a - gs[0].m[0][0]).norm() < 1e-14 && (b - gs[0].m[1][0]).norm() < 1e-14);
        assert!(compose_product(&[]).is_err());
        let id = compose_product(&[TransferMatrix::identity(); 3]).unwrap();
        assert_eq!(id, TransferMatrix::identity());
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let k = 1.7;
        let fine = scan_system(&toy(0.0025, 2.0), k).unwrap().b_inf;
        let e1 = (scan_system(&toy(0.01, 2.0), k).unwrap().b_inf - fine).norm();
        let e2 = (scan_system(&toy(0.005, 2.0), k).unwrap().b_inf - fine).norm();
        let order = (e1 / e2).log2();
        assert!(order > 3.5, "observed order {order}");
    }

    #[test]
    fn first_order_smallness() {
        let s = toy(0.005, 1.0);
        let k = 0.9;
        let t1 = t_infinity(&[&s], k).unwrap();
        let mut prev = f64::NAN;
        for eps in [1e-1, 1e-2, 1e-3] {
            let b = scan_system(&s.scaled(eps), k).unwrap().b_inf;
            let r = (b - t1 * eps).norm() / eps.powi(3);
            if prev.is_finite() {
                assert!((r - prev).abs() < 0.05 * prev, "{r} vs {prev}");
            }
            prev = r;
        }
    }

    #[test]
    fn operator_norm_of_known_matrices() {
        assert!((TransferMatrix::identity().operator_norm() - 1.0).abs() < 1e-15);
        let c = (2.0f64).cosh();
        let sh = (2.0f64).sinh();
        let g = TransferMatrix { m: [[c.into(), sh.into()], [sh.into(), c.into()]] };
        assert!((g.operator_norm() - 2.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn series_regime() {
        let s = toy(0.005, 1.0).scaled(0.4 / toy(0.005, 1.0).l1_norm());
        for n in 1..=6 {
            let r = series_vs_ode(&s, 1.3, n).unwrap();
            assert!(r.pass, "{r}");
        }
        let big = toy(0.005, 2.0);
        assert!(matches!(series_vs_ode(&big, 1.3, 2), Err(Error::NormRegime { .. })));
    }

    #[test]
    fn transfer_json_shape() {
        let v = TransferMatrix::identity().to_json();
        assert_eq!(v[0][0][0], 1.0);
        assert_eq!(v[1][0][1], 0.0);
    }
}
