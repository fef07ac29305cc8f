//! Executable choice of the carrier spacing constant `A`.
//!
//! `A` is admissible when `4 * sum_{j != 0} |phi^(xi - A j)| <= |phi^(xi)|`
//! for every `xi` of a uniform grid on `[-1, 1]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bump::BumpProfile;
use crate::error::{Error, Result};

pub const DEFAULT_XI_GRID: usize = 1024;
pub const DEFAULT_J_MAX: usize = 192;
pub const TAIL_BUDGET: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ASearch {
    pub xi_grid_count: usize,
    pub j_max: usize,
    pub ceiling: f64,
    /// Relative width at which bisection stops.
    pub rel_tol: f64,
}

impl Default for ASearch {
    fn default() -> Self {
        Self { xi_grid_count: DEFAULT_XI_GRID, j_max: DEFAULT_J_MAX, ceiling: 1024.0, rel_tol: 4e-3 }
    }
}

/// Outcome of checking the condition at one `A`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ACheck {
    pub a: f64,
    pub holds: bool,
    /// `4 (sum + tail) / |phi^(xi)|` at the worst grid point.
    pub worst_ratio: f64,
    pub worst_xi: f64,
    /// Largest tail estimate over the grid.
    pub max_tail: f64,
}

/// Nonnegative half of the symmetric grid; the condition is even in `xi`.
fn xi_grid(count: usize) -> impl IndexedParallelIterator<Item = f64> {
    (count / 2..count)
        .into_par_iter()
        .map(move |i| -1.0 + 2.0 * i as f64 / (count - 1) as f64)
}

/// Truncated side sum plus a last-term-ratio tail estimate at one `xi`.
fn side_sum(bump: &BumpProfile, a: f64, xi: f64, j_max: usize) -> (f64, f64) {
    let mut sum = 0.0;
    let mut tail = 0.0;
    for sign in [-1.0, 1.0] {
        let mut prev = 0.0;
        let mut last = 0.0;
        for j in 1..=j_max {
            let t = bump.fourier(xi - sign * a * j as f64).norm();
            sum += t;
            prev = last;
            last = t;
        }
        let r = if prev > 0.0 { (last / prev).min(0.9) } else { 0.9 };
        tail += last * r / (1.0 - r);
    }
    (sum, tail)
}

pub fn check_a_condition(bump: &BumpProfile, a: f64, xi_grid_count: usize, j_max: usize) -> ACheck {
    let worst = xi_grid(xi_grid_count)
        .map(|xi| {
            let (sum, tail) = side_sum(bump, a, xi, j_max);
            let centre = bump.fourier(xi).norm();
            (4.0 * (sum + tail) / centre, xi, tail)
        })
        .reduce(
            || (f64::NEG_INFINITY, 0.0, 0.0),
            |p, q| {
                let tail = p.2.max(q.2);
                // ties resolve to the smaller xi so the reduction is order-free
                if q.0 > p.0 || (q.0 == p.0 && q.1 < p.1) {
                    (q.0, q.1, tail)
                } else {
                    (p.0, p.1, tail)
                }
            },
        );
    ACheck { a, holds: worst.0 <= 1.0, worst_ratio: worst.0, worst_xi: worst.1, max_tail: worst.2 }
}

/// Cheap rejection: true when some grid point already violates the
/// condition on the truncated sum alone.
fn first_violation(bump: &BumpProfile, a: f64, xi_grid_count: usize, j_max: usize) -> bool {
    xi_grid(xi_grid_count).any(|xi| {
        let centre = bump.fourier(xi).norm();
        let mut sum = 0.0;
        for j in 1..=j_max {
            let jf = j as f64;
            sum += bump.fourier(xi - a * jf).norm() + bump.fourier(xi + a * jf).norm();
            if 4.0 * sum > centre {
                return true;
            }
        }
        false
    })
}

/// Doubling-then-bisection search for the smallest admissible `A`.
pub fn select_a_with(bump: &BumpProfile, search: &ASearch) -> Result<ACheck> {
    if search.xi_grid_count < DEFAULT_XI_GRID {
        return Err(Error::InvalidParameter(format!(
            "xi grid needs at least {DEFAULT_XI_GRID} points, got {}",
            search.xi_grid_count
        )));
    }
    let check = |a: f64| {
        if first_violation(bump, a, search.xi_grid_count, search.j_max) {
            ACheck { holds: false, ..check_a_condition(bump, a, DEFAULT_XI_GRID / 8, search.j_max) }
        } else {
            check_a_condition(bump, a, search.xi_grid_count, search.j_max)
        }
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_check = check(hi);
    while !hi_check.holds {
        if hi >= search.ceiling {
            return Err(Error::ACeiling {
                ceiling: search.ceiling,
                worst_xi: hi_check.worst_xi,
                worst_ratio: hi_check.worst_ratio,
            });
        }
        lo = hi;
        hi *= 2.0;
        hi_check = check(hi);
    }
    while hi - lo > search.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let mid_check = check(mid);
        if mid_check.holds {
            hi = mid;
            hi_check = mid_check;
        } else {
            lo = mid;
        }
    }
    if hi_check.max_tail > TAIL_BUDGET {
        return Err(Error::ATail { tail: hi_check.max_tail });
    }
    Ok(hi_check)
}

pub fn select_a(bump: &BumpProfile, xi_grid_count: usize, j_max: usize) -> Result<f64> {
    let search = ASearch { xi_grid_count, j_max, ..ASearch::default() };
    select_a_with(bump, &search).map(|c| c.a)
}
