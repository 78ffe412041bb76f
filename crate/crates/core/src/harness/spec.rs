//! Experiment descriptions and their TOML form.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dg::{InitialData, ProblemData, SourceData};
use crate::error::{Error, Result};
use crate::fem::{MeshKind, Point, SpaceFunction, SpaceTimeFunction, TimeFactor};

/// Initial value and source of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataCase {
    /// `u₀ = 0`, `f = x^p t^q` on the unit interval.
    PowerSource { x_power: f64, t_power: f64 },
    /// `u₀ = x^p`, `f = 0` on the unit interval.
    PowerInitial { x_power: f64 },
    /// `u₀ = 0`, `f = t^q δ_{x₀}` on the unit square.
    DiracSource { t_power: f64, point: Point },
    /// `u₀ = δ_{x₀}`, `f = 0` on the unit square.
    DiracInitial { point: Point },
}

impl DataCase {
    pub fn mesh_kind(&self) -> MeshKind {
        match self {
            DataCase::PowerSource { .. } | DataCase::PowerInitial { .. } => MeshKind::Interval,
            DataCase::DiracSource { .. } | DataCase::DiracInitial { .. } => MeshKind::Square,
        }
    }

    pub fn dimension(&self) -> u8 {
        match self.mesh_kind() {
            MeshKind::Interval => 1,
            MeshKind::Square => 2,
        }
    }

    pub fn problem(&self, alpha: f64, horizon: f64) -> Result<ProblemData> {
        let (initial, source) = match *self {
            DataCase::PowerSource { x_power, t_power } => (
                InitialData::Zero,
                SourceData::Field(SpaceTimeFunction::separable(
                    TimeFactor::power(t_power)?,
                    SpaceFunction::power_of_x(x_power),
                )),
            ),
            DataCase::PowerInitial { x_power } => (
                InitialData::Function(SpaceFunction::power_of_x(x_power)),
                SourceData::Zero,
            ),
            DataCase::DiracSource { t_power, point } => (
                InitialData::Zero,
                SourceData::Dirac {
                    time: TimeFactor::power(t_power)?,
                    point,
                },
            ),
            DataCase::DiracInitial { point } => (InitialData::Dirac(point), SourceData::Zero),
        };
        ProblemData::new(alpha, horizon, initial, source)
    }

    /// Short human-readable form, e.g. `u0 = 0, f = x^-0.49 t^-0.49`.
    pub fn label(&self) -> String {
        match self {
            DataCase::PowerSource { x_power, t_power } => {
                format!("u0 = 0, f = x^{x_power} t^{t_power}")
            }
            DataCase::PowerInitial { x_power } => format!("u0 = x^{x_power}, f = 0"),
            DataCase::DiracSource { t_power, point } => {
                format!("u0 = 0, f = t^{t_power} delta({}, {})", point[0], point[1])
            }
            DataCase::DiracInitial { point } => {
                format!("u0 = delta({}, {}), f = 0", point[0], point[1])
            }
        }
    }
}

/// Which discretization parameter a ladder refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    H,
    Tau,
}

impl Axis {
    pub fn symbol(self) -> &'static str {
        match self {
            Axis::H => "h",
            Axis::Tau => "tau",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    /// `L²(0,T; L²(Ω))`.
    E1,
    /// `L²(0,T; Ḣ¹(Ω))` of the `(1-α)/2` derivative.
    E2,
    /// Maximum `L²(Ω)` error at the grid nodes.
    Nodal,
}

impl Norm {
    pub fn label(self) -> &'static str {
        match self {
            Norm::E1 => "E1",
            Norm::E2 => "E2",
            Norm::Nodal => "Nodal",
        }
    }
}

/// Observed order window: mean of the last two orders within `order ± tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub norm: Norm,
    pub order: f64,
    pub tolerance: f64,
}

impl Expectation {
    pub fn contains(&self, observed: f64) -> bool {
        (observed - self.order).abs() <= self.tolerance + 1e-12
    }
}

/// Dyadic exponents: `h = 2^-h` and `τ = T 2^-tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Levels {
    pub h: u32,
    pub tau: u32,
}

fn default_alpha() -> f64 {
    0.4
}

fn default_horizon() -> f64 {
    1.0
}

fn default_norms() -> Vec<Norm> {
    vec![Norm::E1]
}

/// A convergence study along one axis against a fine reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub desk: bool,
    pub dimension: u8,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_horizon", rename = "T")]
    pub horizon: f64,
    pub data: DataCase,
    /// Regularity index `β` of the data case; informs the expected orders.
    #[serde(default)]
    pub regularity: f64,
    pub axis: Axis,
    /// Exponents along `axis`, coarse to fine.
    pub ladder: Vec<u32>,
    /// Exponent of the parameter held fixed.
    pub fixed: u32,
    pub reference: Levels,
    #[serde(default = "default_norms")]
    pub norms: Vec<Norm>,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
    /// Wall-clock budget in seconds, informational.
    #[serde(default)]
    pub budget_seconds: Option<f64>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(format!("{}: {msg}", self.name)));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail(format!("T must be positive, got {}", self.horizon));
        }
        if self.dimension != self.data.dimension() {
            return fail(format!(
                "data case lives in dimension {}, spec says {}",
                self.data.dimension(),
                self.dimension
            ));
        }
        if self.ladder.is_empty() {
            return fail("ladder is empty".into());
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return fail("ladder must be strictly increasing in refinement".into());
        }
        if self.ladder.iter().any(|&l| l == 0 || l > 24) {
            return fail("ladder exponents must lie in 1..=24".into());
        }
        let finest = *self.ladder.last().unwrap();
        let (along, across) = match self.axis {
            Axis::H => (self.reference.h, self.reference.tau),
            Axis::Tau => (self.reference.tau, self.reference.h),
        };
        if along <= finest {
            return fail(format!(
                "reference level {along} is not finer than the ladder"
            ));
        }
        if self.fixed > across {
            return fail(format!(
                "fixed level {} is finer than the reference level {across}",
                self.fixed
            ));
        }
        if self.reference.h > 14 || self.reference.tau > 24 {
            return fail("reference levels are out of range".into());
        }
        if self.norms.is_empty() {
            return fail("no norms requested".into());
        }
        for e in &self.expectations {
            if !self.norms.contains(&e.norm) {
                return fail(format!(
                    "expectation for {} which is not computed",
                    e.norm.label()
                ));
            }
            if !(e.tolerance >= 0.0) {
                return fail("expectation tolerance must be nonnegative".into());
            }
        }
        self.data.problem(self.alpha, self.horizon)?;
        Ok(())
    }

    /// `(h level, τ level)` of ladder entry `level`.
    pub fn levels_at(&self, level: u32) -> Levels {
        match self.axis {
            Axis::H => Levels {
                h: level,
                tau: self.fixed,
            },
            Axis::Tau => Levels {
                h: self.fixed,
                tau: level,
            },
        }
    }

    /// Hash of everything that determines the reference solution.
    pub fn reference_key(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            version: u32,
            data: &'a DataCase,
            alpha: f64,
            horizon: f64,
            reference: Levels,
        }
        let key = Key {
            version: 1,
            data: &self.data,
            alpha: self.alpha,
            horizon: self.horizon,
            reference: self.reference,
        };
        let json = serde_json::to_vec(&key).expect("reference key serializes");
        hex::encode(&Sha256::digest(&json)[..12])
    }
}
