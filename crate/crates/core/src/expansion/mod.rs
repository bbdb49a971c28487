//! Extraction of the asymptotic polynomial `P_{d,t}`, remainders, the
//! pressure companion and residual structure, and vorticity.
//!
//! Fits are least squares on balls of shrinking radius `r`, in coordinates
//! scaled by `r` (space) and `r^2` (time) so that the design is the same at
//! every radius. A coefficient of parabolic order `k` fitted at radius `r`
//! behaves like `c + sum_j a_j r^{m_j - k}`, where the `m_j` are the
//! homogeneity degrees of the non-polynomial part of the field (see
//! [`ExponentModel`]); the limit `c` is recovered by extrapolation.

pub mod field;
pub mod fit;
pub mod polynomial;
pub mod residual;

pub use field::{curl, heat_residual, remainder_field};
pub use fit::{extrapolate, FitBasis, Fitter};
pub use polynomial::{CoefficientEntry, CoefficientRow, PolySlice, PolynomialExport, VectorPolynomial};
pub use residual::{pressure_companion, residual_structure, with_pressure, ResidualSlice, ResidualStructure};

use crate::grid::{GridError, GridField};
use crate::kernels::MultiIndexSpec;
use crate::poly::{Poly, SpaceTimePolynomial};
use crate::quadrature::{ShellHalf, ShellSampler};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ExpansionError {
    #[error("ill-conditioned fit at radius {radius}: condition number {condition:.3e} with {samples} samples")]
    IllConditioned { radius: f64, condition: f64, samples: usize },
    #[error("radius {radius}: {samples} samples for {unknowns} unknowns")]
    TooFewSamples { radius: f64, samples: usize, unknowns: usize },
    #[error("need at least 3 time slices, got {0}")]
    InsufficientSlices(usize),
    #[error("no polynomial slice at t = {0}")]
    MissingSlice(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("field evaluation failed: {0}")]
    Evaluation(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl ExpansionError {
    fn at_radius(self, r: f64) -> Self {
        match self {
            ExpansionError::IllConditioned { condition, samples, .. } => ExpansionError::IllConditioned { radius: r, condition, samples },
            ExpansionError::TooFewSamples { samples, unknowns, .. } => ExpansionError::TooFewSamples { radius: r, samples, unknowns },
            e => e,
        }
    }
}

/// Homogeneity degrees of the part of a field that is not a polynomial of
/// degree `<= d`: `leading + j` for `j < fractional_terms`, and the integers
/// `smooth_from, smooth_from + 1, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentModel {
    pub leading: f64,
    pub fractional_terms: usize,
    pub smooth_from: u32,
}

impl ExponentModel {
    /// A smooth field: only integer degrees above `d`.
    pub fn smooth(d: u32) -> Self {
        Self { leading: (d + 1) as f64, fractional_terms: 0, smooth_from: d + 1 }
    }

    /// A field vanishing to order `d + alpha` plus smooth terms.
    pub fn vanishing(d: u32, alpha: f64, fractional_terms: usize) -> Self {
        Self { leading: d as f64 + alpha, fractional_terms, smooth_from: d + 1 }
    }

    /// The first `count` correction exponents for a coefficient of order `k`.
    pub fn exponents(&self, k: u32, count: usize) -> Vec<f64> {
        let mut e: Vec<f64> = (0..self.fractional_terms.min(count))
            .map(|j| self.leading + j as f64)
            .chain((0..count as u32).map(|j| (self.smooth_from + j) as f64))
            .map(|m| m - k as f64)
            .filter(|&v| v > 0.0)
            .collect();
        e.sort_by(f64::total_cmp);
        e.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        e.truncate(count);
        e
    }
}

/// Options for [`extract_space_time`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionOptions {
    /// Fit radii, any order.
    pub radii: Vec<f64>,
    /// Sample points per radius.
    pub samples: usize,
    pub model: ExponentModel,
    #[serde(default = "default_true")]
    pub constrained: bool,
    #[serde(default = "default_max_condition")]
    pub max_condition: f64,
    /// Samples lie in `inner_fraction * r < |(x, t)| < r`.
    #[serde(default = "default_inner")]
    pub inner_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

fn default_max_condition() -> f64 {
    1e8
}

fn default_inner() -> f64 {
    0.1
}

/// Result of a space-time extraction.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeExtraction {
    /// Extrapolated polynomial of parabolic degree `<= d`.
    pub polynomial: SpaceTimePolynomial,
    /// Raw fits, one per radius (same order as the options).
    pub per_radius: Vec<SpaceTimePolynomial>,
    pub condition: f64,
    pub evaluations: usize,
}

impl SpaceTimeExtraction {
    pub fn slices(&self, degree: u32, times: &[f64]) -> VectorPolynomial {
        VectorPolynomial::from_space_time(&self.polynomial, degree, times)
    }
}

/// The past-half sample points used at radius `r`.
pub fn sample_points(n: usize, opts: &ExtractionOptions, r: f64) -> Vec<(Vec<f64>, f64)> {
    let unit = ShellSampler::new(n, opts.samples, ShellHalf::Past, opts.seed).points(opts.inner_fraction, 1.0);
    unit.into_iter().map(|(y, s)| (y.iter().map(|v| v * r).collect(), s * r * r)).collect()
}

/// Fit an `n`-vector polynomial in `(x, t)` of parabolic degree `d` to a field
/// given as a batch evaluator, on past half-balls `|(x, t)| < r`, `t <= 0`,
/// and extrapolate the coefficients to `r = 0`. Exact on polynomial inputs.
pub fn extract_space_time<F, E>(n: usize, d: u32, mut eval: F, opts: &ExtractionOptions) -> Result<SpaceTimeExtraction, ExpansionError>
where
    F: FnMut(&[(Vec<f64>, f64)]) -> Result<Vec<Vec<f64>>, E>,
    E: std::fmt::Display,
{
    if opts.radii.is_empty() || opts.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(ExpansionError::Shape(format!("fit radii {:?}", opts.radii)));
    }
    let basis = FitBasis::space_time(n, n, d);
    let unit = ShellSampler::new(n, opts.samples, ShellHalf::Past, opts.seed).points(opts.inner_fraction, 1.0);
    let fitter = Fitter::new(&basis, &unit, opts.constrained, opts.max_condition).map_err(|e| e.at_radius(opts.radii[0]))?;
    let mut raw = Vec::new();
    let mut evaluations = 0;
    for &r in &opts.radii {
        let pts = sample_points(n, opts, r);
        let vals = eval(&pts).map_err(|e| ExpansionError::Evaluation(e.to_string()))?;
        evaluations += pts.len();
        if vals.len() != pts.len() || vals.iter().any(|v| v.len() != n) {
            return Err(ExpansionError::Evaluation("evaluator returned the wrong shape".into()));
        }
        let flat: Vec<f64> = vals.into_iter().flatten().collect();
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(ExpansionError::Evaluation(format!("non-finite sample at radius {r}")));
        }
        let scaled = fitter.apply(&flat);
        raw.push(unscale(&basis, &scaled, r));
    }
    let polynomial = combine(&basis, &raw, &opts.radii, &opts.model);
    let per_radius = raw.iter().map(|c| to_polynomial(&basis, c)).collect();
    Ok(SpaceTimeExtraction { polynomial, per_radius, condition: fitter.condition, evaluations })
}

/// Coefficients in unscaled variables: divide by `r^{order}`.
fn unscale(basis: &FitBasis, scaled: &[f64], r: f64) -> Vec<f64> {
    let nb = basis.specs.len();
    scaled.iter().enumerate().map(|(i, v)| v / r.powi(basis.specs[i % nb].order() as i32)).collect()
}

fn combine(basis: &FitBasis, raw: &[Vec<f64>], radii: &[f64], model: &ExponentModel) -> SpaceTimePolynomial {
    let nb = basis.specs.len();
    let coeffs: Vec<f64> = (0..basis.len())
        .map(|i| {
            let k = basis.specs[i % nb].order();
            let vals: Vec<f64> = raw.iter().map(|c| c[i]).collect();
            extrapolate(radii, &vals, &model.exponents(k, radii.len() - 1))
        })
        .collect();
    to_polynomial(basis, &coeffs)
}

fn to_polynomial(basis: &FitBasis, coeffs: &[f64]) -> SpaceTimePolynomial {
    let nb = basis.specs.len();
    let mut p = SpaceTimePolynomial::zero(basis.n, basis.components);
    for (i, v) in coeffs.iter().enumerate() {
        p.components[i / nb].add_term(basis.specs[i % nb].clone(), *v);
    }
    p
}

/// Options for [`extract_polynomial`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceOptions {
    pub constrained: bool,
    pub max_condition: f64,
    pub model: ExponentModel,
}

impl SliceOptions {
    pub fn smooth(d: u32) -> Self {
        Self { constrained: true, max_condition: 1e8, model: ExponentModel::smooth(d) }
    }
}

/// Degree-`d` polynomial in `x` fitted to the slice `time` of `u` on the
/// grid nodes of each ball `|x| < r`, extrapolated across `fit_radii`.
pub fn extract_polynomial(u: &GridField, d: u32, time: usize, fit_radii: &[f64], opts: &SliceOptions) -> Result<VectorPolynomial, ExpansionError> {
    u.validate()?;
    let n = u.dim();
    if u.components() != n {
        return Err(ExpansionError::Shape(format!("{} components for dimension {n}", u.components())));
    }
    if time >= u.header.time.count || fit_radii.is_empty() {
        return Err(ExpansionError::Shape(format!("time index {time}, {} radii", fit_radii.len())));
    }
    let space = &u.header.space;
    let basis = FitBasis::spatial(n, n, d);
    let mut raw = Vec::new();
    for &r in fit_radii {
        if r > space.extent {
            return Err(ExpansionError::Shape(format!("fit radius {r} exceeds the grid half-width {}", space.extent)));
        }
        let mut pts = Vec::new();
        let mut vals = Vec::new();
        for q in 0..space.len() {
            let x = space.point(q);
            if x.iter().map(|v| v * v).sum::<f64>() < r * r {
                pts.push((x.iter().map(|v| v / r).collect::<Vec<_>>(), 0.0));
                vals.extend((0..n).map(|c| u.values[u.index(c, time, q)]));
            }
        }
        let fitter = Fitter::new(&basis, &pts, opts.constrained, opts.max_condition).map_err(|e| e.at_radius(r))?;
        raw.push(unscale(&basis, &fitter.apply(&vals), r));
    }
    let p = combine(&basis, &raw, fit_radii, &opts.model);
    Ok(VectorPolynomial::from_space_time(&p, d, &[u.header.time.time(time)]))
}

/// A divergence-free caloric polynomial of spatial degree `d` built from
/// stream functions: `rot psi` in 2D, `curl (psi_1, psi_2, psi_3)` in 3D,
/// where each `psi` is the caloric extension of a degree-`d + 1`
/// polynomial with the given coefficients (cycled over its monomials).
pub fn caloric_background(n: usize, d: u32, coefficients: &[f64]) -> SpaceTimePolynomial {
    let streams = if n == 2 { 1 } else { 3 };
    let monos: Vec<Vec<u32>> = crate::kernels::multi_index::spatial_indices_up_to(n, d + 1).into_iter().filter(|m| m.iter().sum::<u32>() >= 1).collect();
    let mut psi = Vec::new();
    let mut k = 0;
    for _ in 0..streams {
        let mut q = Poly::zero(n);
        for m in &monos {
            if !coefficients.is_empty() {
                q.add_term(MultiIndexSpec::spatial(m.clone()), coefficients[k % coefficients.len()] / (1.0 + k as f64));
            }
            k += 1;
        }
        psi.push(Poly::caloric_extension(&q));
    }
    let components = if n == 2 {
        vec![psi[0].dx(1), psi[0].dx(0).scale(-1.0)]
    } else {
        vec![
            psi[2].dx(1).add(&psi[1].dx(2).scale(-1.0)),
            psi[0].dx(2).add(&psi[2].dx(0).scale(-1.0)),
            psi[1].dx(0).add(&psi[0].dx(1).scale(-1.0)),
        ]
    };
    SpaceTimePolynomial { n, components }
}

#[cfg(test)]
mod tests;
