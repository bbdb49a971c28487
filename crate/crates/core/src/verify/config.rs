//! Scenario configuration (strict JSON).

use crate::construct::{ForcingSpec, PotentialScheme, Route};
use serde::{Deserialize, Serialize};

/// Seed used when a config does not give one.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Theorem1,
    Theorem2,
    NavierStokes,
    Oseen,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Theorem1 => "theorem1",
            Scenario::Theorem2 => "theorem2",
            Scenario::NavierStokes => "navier_stokes",
            Scenario::Oseen => "oseen",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown scenario {s:?}"))
    }
}

/// Divergence-free caloric background added to `u` (see
/// [`crate::expansion::caloric_background`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    pub coefficients: Vec<f64>,
}

/// Smooth solenoidal field `u_m` vanishing to `order` at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedSpec {
    pub order: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub wave: Vec<f64>,
    #[serde(default)]
    pub wave_amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Fit radii; `None` picks [`ExtractionConfig::default_radii`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub samples: usize,
    /// Number of `d + alpha + j` terms in the exponent model.
    pub fractional_terms: usize,
    pub constrained: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self { radii: None, samples: 48, fractional_terms: 1, constrained: true }
    }
}

impl ExtractionConfig {
    /// `2^-3..2^-8` up to degree 2. From degree 3 on, rounding in the
    /// samples is amplified like `r^-d` in the top coefficients, so the
    /// smallest radius moves up to `2^-6`.
    pub fn default_radii(d: u32) -> Vec<f64> {
        let (lo, hi) = if d <= 2 { (3, 8) } else { (2, 6) };
        (lo..=hi).map(|k| 0.5f64.powi(k)).collect()
    }

    pub fn radii_for(&self, d: u32) -> Vec<f64> {
        self.radii.clone().unwrap_or_else(|| Self::default_radii(d))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellConfig {
    /// Outer radii; each shell is `r/2 < |(x, t)| < r` with `t <= 0`.
    pub radii: Vec<f64>,
    pub samples: usize,
}

impl Default for ShellConfig {
    fn default() -> Self {
        Self { radii: (1..=5).map(|k| 0.5f64.powi(k)).collect(), samples: 64 }
    }
}

/// Slope tolerances and the other assertion thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub slope: f64,
    pub hypothesis: f64,
    pub recovery: f64,
    pub residual_low: f64,
    pub divergence: f64,
    pub linearity: f64,
    pub route_agreement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { slope: 0.15, hypothesis: 0.1, recovery: 1e-6, residual_low: 1e-3, divergence: 1e-8, linearity: 0.01, route_agreement: 1e-6 }
    }
}

/// Compare the two routes at this many points of `Q_1` with `scheme`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheck {
    pub points: usize,
    #[serde(default)]
    pub scheme: Option<PotentialScheme>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Forcing of theorem1 / theorem2; the extra forcing of oseen.
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    /// Degree `d` for navier_stokes and oseen (theorem scenarios use `forcing.d`).
    #[serde(default)]
    pub degree: Option<u32>,
    /// `alpha` of the asserted oseen exponent when no forcing is given.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub route: Option<Route>,
    #[serde(default)]
    pub background: Option<BackgroundSpec>,
    #[serde(default)]
    pub manufactured: Option<ManufacturedSpec>,
    #[serde(default)]
    pub advection: Option<Vec<f64>>,
    #[serde(default)]
    pub scheme: Option<PotentialScheme>,
    #[serde(default)]
    pub extraction: ExtractionConfig,
    #[serde(default)]
    pub shells: ShellConfig,
    /// Times at which `P_{d,t}` is reported (at least three).
    #[serde(default = "default_slices")]
    pub slices: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Also run with every forcing amplitude multiplied by this factor.
    #[serde(default)]
    pub linearity_factor: Option<f64>,
    #[serde(default)]
    pub cross_check: Option<CrossCheck>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_slices() -> Vec<f64> {
    vec![-0.02, -0.01, 0.0]
}

impl ScenarioConfig {
    /// Parse with the offending key path in the error.
    pub fn from_json(s: &str) -> Result<Self, String> {
        let de = &mut serde_json::Deserializer::from_str(s);
        serde_path_to_error::deserialize(de).map_err(|e| format!("{} at `{}`", e.inner(), e.path()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
