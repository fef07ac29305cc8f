use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{trapezoid_refined, PhaseWalk};

/// Support radius of every profile, in position units.
pub const SUPPORT_RADIUS: f64 = 0.25;

/// Half-grid nodes used for the Fourier quadrature. The trapezoid rule is
/// spectrally accurate for these profiles; aliasing enters at
/// `|xi| ~ pi / h ~ 6.4e3`, far above the working range `|xi| <= 2e3`.
const FOURIER_HALF_NODES: usize = 512;

/// Smooth compactly supported profile families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BumpKind {
    /// `exp(-s / (1 - (4x)^2))` on `|x| < 1/4`. `s = 1` is the standard bump.
    Exponential { sharpness: f64 },
}

impl Default for BumpKind {
    fn default() -> Self {
        BumpKind::Exponential { sharpness: 1.0 }
    }
}

impl fmt::Display for BumpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BumpKind::Exponential { sharpness } if *sharpness == 1.0 => write!(f, "exp"),
            BumpKind::Exponential { sharpness } => write!(f, "exp:{sharpness}"),
        }
    }
}

impl FromStr for BumpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "default" | "exp" => return Ok(BumpKind::default()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("exp:") {
            let sharpness: f64 = rest.parse().map_err(|_| Error::UnknownBump(s.to_string()))?;
            if sharpness.is_finite() && sharpness > 0.0 {
                return Ok(BumpKind::Exponential { sharpness });
            }
        }
        Err(Error::UnknownBump(s.to_string()))
    }
}

impl BumpKind {
    /// Unnormalized profile on the unit variable `u = 4x`.
    #[inline]
    fn raw(&self, u: f64) -> f64 {
        match *self {
            BumpKind::Exponential { sharpness } => {
                let q = 1.0 - u * u;
                if q <= 0.0 {
                    0.0
                } else {
                    (-sharpness / q).exp()
                }
            }
        }
    }
}

/// A nonnegative, even, unit-mass bump supported in `[-1/4, 1/4]`.
#[derive(Clone, Debug)]
pub struct BumpProfile {
    kind: BumpKind,
    scale: f64,
    fourier_step: f64,
    fourier_weights: Vec<f64>,
}

impl BumpProfile {
    pub fn kind(&self) -> BumpKind {
        self.kind
    }

    /// Multiplier applied to the raw profile so that the mass is one.
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() >= SUPPORT_RADIUS {
            0.0
        } else {
            self.scale * self.kind.raw(4.0 * x)
        }
    }

    /// `\hat\phi(xi) = \int e^{-2 i xi x} phi(x) dx`. Real because phi is even.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        let walk = PhaseWalk::new(0.0, 2.0 * xi * self.fourier_step);
        let re: f64 = self
            .fourier_weights
            .iter()
            .zip(walk)
            .map(|(w, z)| w * z.re)
            .sum();
        Complex64::new(re, 0.0)
    }

    pub fn mass(&self) -> f64 {
        self.fourier_weights.iter().sum()
    }

    /// `\int phi^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        let h = self.fourier_step;
        let mut acc = 0.0;
        for i in 0..=FOURIER_HALF_NODES {
            let v = self.eval(i as f64 * h);
            acc += if i == 0 { v * v } else { 2.0 * v * v };
        }
        acc * h
    }
}

/// Builds a unit-mass profile of the requested family.
pub fn make_bump(kind: BumpKind, tol: f64) -> Result<BumpProfile> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bump tolerance {tol} must be positive")));
    }
    let raw = |x: f64| kind.raw(4.0 * x);
    let (z, _) = trapezoid_refined(raw, -SUPPORT_RADIUS, SUPPORT_RADIUS, tol * 1e-2, 20).ok_or(
        Error::Quadrature { what: "bump normalization", change: f64::NAN, tol },
    )?;
    let scale = 1.0 / z;

    let h = SUPPORT_RADIUS / FOURIER_HALF_NODES as f64;
    let fourier_weights = (0..=FOURIER_HALF_NODES)
        .map(|i| {
            let x = i as f64 * h;
            let v = scale * kind.raw(4.0 * x) * h;
            if i == 0 {
                v
            } else {
                2.0 * v
            }
        })
        .collect();
    let bump = BumpProfile { kind, scale, fourier_step: h, fourier_weights };

    let mass = bump.mass();
    if (mass - 1.0).abs() > tol {
        return Err(Error::Quadrature { what: "bump mass check", change: mass - 1.0, tol });
    }
    Ok(bump)
}

pub fn bump_fourier(bump: &BumpProfile, xi: f64) -> Complex64 {
    bump.fourier(xi)
}

/// Largest `|\hat\phi|` over one oscillation period starting at `xi`; the
/// transform has real zeros, so decay is judged on this envelope.
pub fn fourier_envelope(bump: &BumpProfile, xi: f64) -> f64 {
    let period = 4.0 * std::f64::consts::PI;
    (0..=64)
        .map(|i| bump.fourier(xi + period * i as f64 / 64.0).norm())
        .fold(0.0, f64::max)
}
