//! Uniform-grid quadrature primitives shared by the transforms, the simplex
//! recursion and the integrators.

use num_complex::Complex64;

/// Walks `e^{i(theta0 + m*dtheta)}` for m = 0, 1, ... by repeated rotation.
///
/// The start is evaluated exactly, so drift is bounded by the segment length
/// times machine epsilon.
#[derive(Clone, Copy, Debug)]
pub struct PhaseWalk {
    current: Complex64,
    step: Complex64,
}

impl PhaseWalk {
    pub fn new(theta0: f64, dtheta: f64) -> Self {
        Self {
            current: Complex64::cis(theta0),
            step: Complex64::cis(dtheta),
        }
    }

    #[inline]
    pub fn current(&self) -> Complex64 {
        self.current
    }

    #[inline]
    pub fn advance(&mut self) {
        self.current *= self.step;
    }
}

impl Iterator for PhaseWalk {
    type Item = Complex64;

    #[inline]
    fn next(&mut self) -> Option<Complex64> {
        let z = self.current;
        self.advance();
        Some(z)
    }
}

/// Composite Simpson weight (in units of h/3) of node `i` out of `count`.
#[inline]
pub fn simpson_weight(i: usize, count: usize) -> f64 {
    debug_assert!(count % 2 == 1);
    if i == 0 || i + 1 == count {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Composite Simpson rule over an odd number of equally spaced samples.
pub fn simpson<I>(values: I, h: f64) -> Complex64
where
    I: ExactSizeIterator<Item = Complex64>,
{
    let count = values.len();
    assert!(count % 2 == 1, "composite Simpson needs an odd sample count");
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in values.enumerate() {
        acc += v * simpson_weight(i, count);
    }
    acc * (h / 3.0)
}

/// Real-valued composite Simpson rule.
pub fn simpson_real(values: &[f64], h: f64) -> f64 {
    let count = values.len();
    assert!(count % 2 == 1, "composite Simpson needs an odd sample count");
    let acc: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| v * simpson_weight(i, count))
        .sum();
    acc * h / 3.0
}

/// Increments of the cumulative Simpson integral over one node pair.
///
/// Given integrand samples at `x0`, `x0 + h`, `x0 + 2h`, returns the
/// integrals from `x0` to the middle node and to the far node. The middle
/// value uses the three-point rule `h/12 (5 f0 + 8 f1 - f2)`.
#[inline]
pub fn cumulative_pair(f0: Complex64, f1: Complex64, f2: Complex64, h: f64) -> (Complex64, Complex64) {
    let mid = (f0 * 5.0 + f1 * 8.0 - f2) * (h / 12.0);
    let far = (f0 + f1 * 4.0 + f2) * (h / 3.0);
    (mid, far)
}

/// Composite trapezoid with step doubling on `[a, b]` until two successive
/// levels agree to `tol`. Suited to integrands that vanish to all orders at
/// the endpoints, where the rule converges spectrally.
pub fn trapezoid_refined<F>(f: F, a: f64, b: f64, tol: f64, max_level: u32) -> Option<(f64, u32)>
where
    F: Fn(f64) -> f64,
{
    let mut n = 16usize;
    let mut h = (b - a) / n as f64;
    let mut sum: f64 = 0.5 * (f(a) + f(b)) + (1..n).map(|i| f(a + i as f64 * h)).sum::<f64>();
    let mut prev = sum * h;
    for level in 1..=max_level {
        let mids: f64 = (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum();
        sum += mids;
        n *= 2;
        h *= 0.5;
        let cur = sum * h;
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Some((cur, level));
        }
        prev = cur;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_walk_tracks_direct_evaluation() {
        let walk = PhaseWalk::new(0.3, 0.01);
        for (m, z) in walk.take(5000).enumerate() {
            let direct = Complex64::cis(0.3 + 0.01 * m as f64);
            assert!((z - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let h = 0.1;
        let vals: Vec<f64> = (0..11).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson_real(&vals, h) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn cumulative_pair_is_exact_for_quadratics() {
        let h = 0.5;
        let f = |x: f64| Complex64::new(x * x + 1.0, -x);
        let (mid, far) = cumulative_pair(f(0.0), f(h), f(2.0 * h), h);
        let exact = |x: f64| Complex64::new(x.powi(3) / 3.0 + x, -x * x / 2.0);
        assert!((mid - exact(h)).norm() < 1e-14);
        assert!((far - exact(2.0 * h)).norm() < 1e-14);
    }
}
