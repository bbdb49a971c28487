//! Decay-exponent estimation and the end-to-end scenario harness.

pub mod config;
pub mod kernel_checks;
pub mod scenario;

pub use config::{BackgroundSpec, CrossCheck, ExtractionConfig, ManufacturedSpec, Scenario, ScenarioConfig, ShellConfig, Tolerances, DEFAULT_SEED};
pub use scenario::{read_bundle_shells, run, run_navier_stokes, run_oseen, run_theorem1, run_theorem2, write_bundle, Assertion, ScenarioReport, Summary};

use crate::construct::ConstructError;
use crate::expansion::ExpansionError;
use crate::grid::GridField;
use crate::point::{parabolic_norm, SpaceTimePoint};
use crate::quadrature::{ShellHalf, ShellSampler, ShellSup};
use serde::{Deserialize, Serialize};

/// Shell suprema at or below this are treated as numerical zero.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("only {usable} shells above the noise floor (need {needed})")]
    TooFewShells { usable: usize, needed: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

/// Shell suprema with a least-squares fit of `log sup` against `log r`
/// (outer radius) over the shells above [`NOISE_FLOOR`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub shells: Vec<ShellSup>,
    /// `None` when the field is identically zero to the noise floor.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub used_shells: usize,
    pub noise_floor: f64,
}

impl DecayReport {
    pub fn identically_zero(&self) -> bool {
        self.slope.is_none()
    }

    /// The field decays at least like `r^exponent`: a fitted slope of at
    /// least `exponent - tol`, or a field that is zero to the noise floor.
    pub fn decays_at_least(&self, exponent: f64, tol: f64) -> bool {
        self.slope.map_or(true, |s| s >= exponent - tol)
    }
}

/// Fit the slope; needs at least four shells above the noise floor unless
/// all of them are below it.
pub fn fit_decay(shells: Vec<ShellSup>) -> Result<DecayReport, VerifyError> {
    if shells.iter().any(|s| s.sup_value.is_nan()) {
        return Err(VerifyError::Evaluation("non-finite shell supremum".into()));
    }
    let pts: Vec<(f64, f64)> =
        shells.iter().filter(|s| s.sup_value > NOISE_FLOOR).map(|s| (s.outer_radius.ln(), s.sup_value.ln())).collect();
    if pts.is_empty() {
        return Ok(DecayReport { shells, slope: None, intercept: None, r_squared: None, used_shells: 0, noise_floor: NOISE_FLOOR });
    }
    if pts.len() < 4 {
        return Err(VerifyError::TooFewShells { usable: pts.len(), needed: 4 });
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(DecayReport { used_shells: pts.len(), shells, slope: Some(slope), intercept: Some(intercept), r_squared: Some(r2), noise_floor: NOISE_FLOOR })
}

/// The shell with outer radius `r` is `r/2 < |(y - x0, s - t0)| < r`.
pub fn shells_for(radii: &[f64]) -> Vec<(f64, f64)> {
    radii.iter().map(|&r| (0.5 * r, r)).collect()
}

/// Sampled shell suprema of a batch-evaluated scalar field about `center`.
pub fn sample_shells<F, E>(center: &SpaceTimePoint, radii: &[f64], sampler: &ShellSampler, mut eval: F) -> Result<Vec<ShellSup>, VerifyError>
where
    F: FnMut(&[(Vec<f64>, f64)]) -> Result<Vec<f64>, E>,
    E: std::fmt::Display,
{
    shells_for(radii)
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let pts: Vec<(Vec<f64>, f64)> = sampler
                .points(a, b)
                .into_iter()
                .map(|(y, s)| (y.iter().zip(&center.x).map(|(v, c)| v + c).collect(), s + center.t))
                .collect();
            let vals = eval(&pts).map_err(|e| VerifyError::Evaluation(e.to_string()))?;
            let sup = vals.iter().fold(0.0f64, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v.abs()) });
            Ok(ShellSup { shell_index: i + 1, inner_radius: a, outer_radius: b, sup_value: sup })
        })
        .collect()
}

/// Decay exponent of a scalar callable about `center` over the shells with
/// the given outer radii (quasi-random samples, seeded).
pub fn decay_exponent<F>(f: F, center: &SpaceTimePoint, radii: &[f64], samples: usize, half: ShellHalf, seed: u64) -> Result<DecayReport, VerifyError>
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    use rayon::prelude::*;
    let sampler = ShellSampler::new(center.dim(), samples, half, seed);
    let shells = sample_shells(center, radii, &sampler, |pts| -> Result<Vec<f64>, String> { Ok(pts.par_iter().map(|(y, s)| f(y, *s)).collect()) })?;
    fit_decay(shells)
}

/// Decay exponent of a gridded field (max over components) from the grid
/// nodes in each shell about `center`.
pub fn decay_exponent_grid(field: &GridField, center: &SpaceTimePoint, radii: &[f64], half: ShellHalf) -> Result<DecayReport, VerifyError> {
    field.validate().map_err(|e| VerifyError::Evaluation(e.to_string()))?;
    let space = &field.header.space;
    let mut shells: Vec<ShellSup> = shells_for(radii)
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| ShellSup { shell_index: i + 1, inner_radius: a, outer_radius: b, sup_value: 0.0 })
        .collect();
    let mut counts = vec![0usize; shells.len()];
    for k in 0..field.header.time.count {
        let ds = field.header.time.time(k) - center.t;
        let in_half = match half {
            ShellHalf::Past => ds <= 0.0,
            ShellHalf::Future => ds >= 0.0,
            ShellHalf::Full => true,
        };
        if !in_half {
            continue;
        }
        for q in 0..space.len() {
            let y: Vec<f64> = space.point(q).iter().zip(&center.x).map(|(v, c)| v - c).collect();
            let rho = parabolic_norm(&y, ds);
            for (sh, c) in shells.iter_mut().zip(counts.iter_mut()) {
                if rho > sh.inner_radius && rho < sh.outer_radius {
                    *c += 1;
                    for comp in 0..field.components() {
                        sh.sup_value = sh.sup_value.max(field.values[field.index(comp, k, q)].abs());
                    }
                }
            }
        }
    }
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(VerifyError::Config(format!("no grid nodes in shell {} ({}..{})", i + 1, shells[i].inner_radius, shells[i].outer_radius)));
    }
    fit_decay(shells)
}
