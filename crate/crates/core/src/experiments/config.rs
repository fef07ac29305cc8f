use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{integer_sqrt, BumpKind};

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV: &str = "CHIRPLAB_WORKERS";

pub const DEFAULT_N_LIST: [u64; 5] = [16, 36, 64, 100, 144];
pub const DEFAULT_IDENTITY_N: u64 = 36;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    BumpCheck,
    SelectA,
    T2Growth,
    T3Growth,
    Boundedness,
    Identities,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::BumpCheck => "bump-check",
            Scenario::SelectA => "select-a",
            Scenario::T2Growth => "t2max",
            Scenario::T3Growth => "t3inf",
            Scenario::Boundedness => "bounded",
            Scenario::Identities => "verify",
        }
    }

    /// Default `j0 / N`.
    pub fn default_j0_fraction(self) -> f64 {
        match self {
            Scenario::T3Growth => 1.5,
            _ => 1.75,
        }
    }

    /// Open interval for `j0 / N` in which the scenario's bound is claimed.
    fn j0_range(self) -> (f64, f64) {
        match self {
            Scenario::T3Growth => (1.4, 1.6),
            _ => (1.5, 2.0),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format `{s}` (csv or json)"))),
        }
    }
}

/// How `j0` is chosen for each `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum J0Policy {
    /// `round(fraction * N)`.
    Fraction(f64),
    Fixed(i64),
}

impl FromStr for J0Policy {
    type Err = Error;

    /// `1.75` is a fraction of `N`; a bare integer such as `63` is a fixed index.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(j) = s.parse::<i64>() {
            return Ok(J0Policy::Fixed(j));
        }
        s.parse::<f64>()
            .map(J0Policy::Fraction)
            .map_err(|_| Error::Config(format!("cannot parse j0 policy `{s}`")))
    }
}

impl fmt::Display for J0Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            J0Policy::Fraction(x) => write!(f, "{x}"),
            J0Policy::Fixed(j) => write!(f, "{j}"),
        }
    }
}

/// Every tolerance used by the drivers and the acceptance checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Recursion vs correlation route, relative.
    pub identity: f64,
    /// Disjoint-block factorizations, relative.
    pub factorization: f64,
    /// Brute-force simplex oracle, relative.
    pub brute_force: f64,
    /// Pointwise `| |a|^2 - |b|^2 - 1 |`.
    pub conservation: f64,
    /// Block product vs direct integration, entrywise.
    pub product: f64,
    /// `det G - 1` and conjugate-entry symmetry.
    pub transfer: f64,
    /// Growth fits: minimum R^2.
    pub growth_r2: f64,
    /// Growth fits: allowed spread of magnitude / log N around its mean.
    pub ratio_band: f64,
    /// Bounded quantities: slope vs log N as a fraction of the T2 slope.
    pub slope_fraction: f64,
    /// Inverse-law fits: minimum R^2.
    pub inverse_r2: f64,
    /// Quadratic envelope: whole-window / inner-window ratio.
    pub envelope: f64,
    /// Agreement of the two diagonal constants.
    pub constant_match: f64,
    /// Riesz projection on a grid vs the correlation route, relative.
    pub riesz: f64,
    /// Scattering-identity ratio, relative.
    pub scattering_identity: f64,
    /// Weak-L2 estimator: minimum correlation with log N.
    pub weak_correlation: f64,
    /// Cross-block part of T2 at the region point as a fraction of the total.
    pub cross_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-6,
            factorization: 1e-8,
            brute_force: 1e-6,
            conservation: 1e-8,
            product: 1e-7,
            transfer: 1e-8,
            growth_r2: 0.95,
            ratio_band: 0.30,
            slope_fraction: 0.05,
            inverse_r2: 0.99,
            envelope: 2.0,
            constant_match: 1e-2,
            riesz: 1e-4,
            scattering_identity: 0.05,
            weak_correlation: 0.95,
            cross_fraction: 1e-4,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 16] = [
        "identity",
        "factorization",
        "brute_force",
        "conservation",
        "product",
        "transfer",
        "growth_r2",
        "ratio_band",
        "slope_fraction",
        "inverse_r2",
        "envelope",
        "constant_match",
        "riesz",
        "scattering_identity",
        "weak_correlation",
        "cross_fraction",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "identity" => &mut self.identity,
            "factorization" => &mut self.factorization,
            "brute_force" => &mut self.brute_force,
            "conservation" => &mut self.conservation,
            "product" => &mut self.product,
            "transfer" => &mut self.transfer,
            "growth_r2" => &mut self.growth_r2,
            "ratio_band" => &mut self.ratio_band,
            "slope_fraction" => &mut self.slope_fraction,
            "inverse_r2" => &mut self.inverse_r2,
            "envelope" => &mut self.envelope,
            "constant_match" => &mut self.constant_match,
            "riesz" => &mut self.riesz,
            "scattering_identity" => &mut self.scattering_identity,
            "weak_correlation" => &mut self.weak_correlation,
            "cross_fraction" => &mut self.cross_fraction,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Config(format!("tolerance {name} = {value} must be positive")));
        }
        let slot = self
            .slot(name)
            .ok_or_else(|| Error::Config(format!("unknown tolerance `{name}`; known: {}", Self::NAMES.join(", "))))?;
        *slot = value;
        Ok(())
    }

    /// Applies `name=value[,name=value...]`.
    pub fn apply(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("tolerance `{item}` is not name=value")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("tolerance `{item}` has a non-numeric value")))?;
            self.set(name.trim(), value)?;
        }
        Ok(())
    }

    fn all(&self) -> [f64; 16] {
        [
            self.identity,
            self.factorization,
            self.brute_force,
            self.conservation,
            self.product,
            self.transfer,
            self.growth_r2,
            self.ratio_band,
            self.slope_fraction,
            self.inverse_r2,
            self.envelope,
            self.constant_match,
            self.riesz,
            self.scattering_identity,
            self.weak_correlation,
            self.cross_fraction,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub n_list: Vec<u64>,
    /// `None` uses the scenario default.
    pub j0: Option<J0Policy>,
    pub oversample: f64,
    pub tolerances: Tolerances,
    pub a_override: Option<f64>,
    pub bump: BumpKind,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
    /// Directory for W_m and a/b profile CSVs.
    pub dump_profiles: Option<PathBuf>,
    /// Keep every `profile_stride`-th node in dumped profiles.
    pub profile_stride: usize,
    /// Fill the walltime column; off by default so output is reproducible.
    pub timing: bool,
    /// Number of k samples of the weak-L2 estimator on `[A, 2A]`.
    pub weak_points: usize,
}

impl RunConfig {
    pub const DEFAULT_OVERSAMPLE: f64 = 2.0;
    pub const DEFAULT_WEAK_POINTS: usize = 128;

    pub fn new(scenario: Scenario) -> Self {
        let n_list = match scenario {
            Scenario::Identities => vec![DEFAULT_IDENTITY_N],
            _ => DEFAULT_N_LIST.to_vec(),
        };
        Self {
            scenario,
            n_list,
            j0: None,
            oversample: Self::DEFAULT_OVERSAMPLE,
            tolerances: Tolerances::default(),
            a_override: None,
            bump: BumpKind::default(),
            out: None,
            format: Format::Csv,
            workers: default_workers(),
            dump_profiles: None,
            profile_stride: 64,
            timing: false,
            weak_points: Self::DEFAULT_WEAK_POINTS,
        }
    }

    /// Parses a comma-separated N list.
    pub fn parse_n_list(s: &str) -> Result<Vec<u64>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().map_err(|_| Error::Config(format!("`{t}` is not a positive integer"))))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Config("empty N list".into()));
        }
        for &n in &self.n_list {
            if integer_sqrt(n).is_none() {
                return Err(Error::NotPerfectSquare(n));
            }
            if n < 16 {
                return Err(Error::NTooSmall(n));
            }
        }
        if !(self.oversample > 0.0) || !self.oversample.is_finite() {
            return Err(Error::Config(format!("oversample {} must be positive", self.oversample)));
        }
        if self.tolerances.all().iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let Some(a) = self.a_override {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::Config(format!("A override {a} must be positive")));
            }
        }
        if self.workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        if self.weak_points < 2 {
            return Err(Error::Config("the weak-L2 estimator needs at least 2 k samples".into()));
        }
        for &n in &self.n_list {
            self.j0_for(n)?;
        }
        Ok(())
    }

    /// `j0` for one `N`, inside the scenario's region.
    pub fn j0_for(&self, n: u64) -> Result<i64> {
        let policy = self.j0.unwrap_or(J0Policy::Fraction(self.scenario.default_j0_fraction()));
        let j0 = match policy {
            J0Policy::Fraction(f) => (f * n as f64).round() as i64,
            J0Policy::Fixed(j) => j,
        };
        let (lo, hi) = self.scenario.j0_range();
        let nf = n as f64;
        if !(j0 as f64 > lo * nf && (j0 as f64) < hi * nf) {
            return Err(Error::Config(format!(
                "j0 = {j0} for N = {n} is outside ({lo}N, {hi}N) required by {}",
                self.scenario.name()
            )));
        }
        Ok(j0)
    }
}

/// `CHIRPLAB_WORKERS` if set and valid, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|w| *w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
