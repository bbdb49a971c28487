//! Integration over parabolic cylinders and dyadic shell sampling.
//!
//! Cylinders `Q_r(x, t) = {|y - x| < r, -r^2 < s - t < 0}` are integrated by
//! splitting off the past half-ball `{|(y - x, s - t)| < r, s < t}` around the
//! apex. The half-ball uses parabolic polar coordinates ([`rules::PolarRule`]),
//! which absorb a singularity of order `-(n + 1)` at the apex; the rest of the
//! cylinder is a smooth region covered by a tensor Gauss rule. Both pieces
//! are exact for polynomials up to the rule order.

pub mod rules;
pub mod shells;

pub use rules::{ball_volume, sphere_area, Gauss, PolarRule, SphereRule};
pub use shells::{read_shell_csv, shell_supremum, write_shell_csv, DyadicShellDecomposition, ShellHalf, ShellSampler, ShellSup};

use crate::point::SpaceTimePoint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("non-finite integrand value at y = {y:?}, s = {s}")]
    NonFinite { y: Vec<f64>, s: f64 },
    #[error("invalid cylinder radius {0}")]
    InvalidRadius(f64),
    #[error("Lq exponent must satisfy q >= 1 (got {0})")]
    InvalidExponent(f64),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("Richardson extrapolation failed: {0}")]
    Extrapolation(String),
}

/// `Q_r(center)`: the one-sided parabolic cylinder below `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCylinder {
    pub center: SpaceTimePoint,
    pub radius: f64,
}

impl ParabolicCylinder {
    pub fn new(center: SpaceTimePoint, radius: f64) -> Result<Self, QuadratureError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(QuadratureError::InvalidRadius(radius));
        }
        if !(1..=3).contains(&center.dim()) {
            return Err(QuadratureError::UnsupportedDimension(center.dim()));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(n: usize, radius: f64) -> Result<Self, QuadratureError> {
        Self::new(SpaceTimePoint::origin(n), radius)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, y: &[f64], s: f64) -> bool {
        let r2: f64 = y.iter().zip(&self.center.x).map(|(a, b)| (a - b) * (a - b)).sum();
        let ds = s - self.center.t;
        r2 < self.radius * self.radius && ds < 0.0 && ds > -self.radius * self.radius
    }

    /// `|B_r| r^2`.
    pub fn volume(&self) -> f64 {
        ball_volume(self.dim()) * self.radius.powi(self.dim() as i32 + 2)
    }
}

/// Node counts for cylinder integration. `panels` dyadic radial panels are
/// used in the apex half-ball, so integrands with a power singularity or a
/// power-law profile at the apex converge quickly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderScheme {
    pub radial: usize,
    pub cosine: usize,
    pub azimuthal: usize,
    pub panels: usize,
    /// Graded panels towards the rim of the apex half-ball, in both the
    /// cosine variable and the outer region.
    pub rim_panels: usize,
    /// Gauss order of the outer (smooth) region in both `|y - x|` and `s`.
    pub outer: usize,
}

impl Default for CylinderScheme {
    fn default() -> Self {
        Self { radial: 12, cosine: 12, azimuthal: 24, panels: 6, rim_panels: 5, outer: 12 }
    }
}

impl CylinderScheme {
    /// Same structure with every node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            radial: 2 * self.radial,
            cosine: 2 * self.cosine,
            azimuthal: 2 * self.azimuthal,
            panels: self.panels + 2,
            rim_panels: self.rim_panels + 2,
            outer: 2 * self.outer,
        }
    }
}

/// `int_Q f` for a vector-valued integrand with `m` components. `f(y, s, out)`
/// writes into `out` (zeroed before each call).
pub fn integrate_cylinder_vec(
    cyl: &ParabolicCylinder,
    scheme: &CylinderScheme,
    m: usize,
    f: impl FnMut(&[f64], f64, &mut [f64]),
) -> Result<Vec<f64>, QuadratureError> {
    integrate_excised_vec(cyl, scheme, 0.0, m, f)
}

/// Scalar version of [`integrate_cylinder_vec`].
pub fn integrate_cylinder(
    cyl: &ParabolicCylinder,
    scheme: &CylinderScheme,
    mut f: impl FnMut(&[f64], f64) -> f64,
) -> Result<f64, QuadratureError> {
    Ok(integrate_cylinder_vec(cyl, scheme, 1, |y, s, out| out[0] = f(y, s))?[0])
}

/// Integral over `Q_r` minus the past half-ball of radius `eps` around the
/// apex.
pub fn integrate_excised_vec(
    cyl: &ParabolicCylinder,
    scheme: &CylinderScheme,
    eps: f64,
    m: usize,
    mut f: impl FnMut(&[f64], f64, &mut [f64]),
) -> Result<Vec<f64>, QuadratureError> {
    let n = cyl.dim();
    let r = cyl.radius;
    let x0 = &cyl.center.x;
    let t0 = cyl.center.t;
    let mut acc = vec![0.0; m];
    let mut buf = vec![0.0; m];
    let mut bad: Option<QuadratureError> = None;
    let mut visit = |y: &[f64], s: f64, w: f64, acc: &mut [f64]| {
        if bad.is_some() {
            return;
        }
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(y, s, &mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            if !v.is_finite() {
                bad = Some(QuadratureError::NonFinite { y: y.to_vec(), s });
                return;
            }
            *a += w * v;
        }
    };

    // Apex half-ball on dyadic radial panels.
    let polar = PolarRule::new(n, scheme.radial, scheme.cosine, scheme.rim_panels, scheme.azimuthal);
    let mut edges = Vec::new();
    let mut hi = r;
    for _ in 0..scheme.panels.max(1) - 1 {
        let lo = 0.5 * hi;
        if lo <= eps {
            break;
        }
        edges.push((lo, hi));
        hi = lo;
    }
    if hi > eps {
        edges.push((eps, hi));
    }
    for &(a, b) in &edges {
        polar.for_each(x0, t0, a, b, |y, s, w| visit(y, s, w, &mut acc));
    }

    // Smooth remainder: |y - x| = rho in (0, r), t - s in (r^2 - rho^2, r^2),
    // graded towards the half-ball rim.
    let g = Gauss::new(scheme.outer);
    let sphere = SphereRule::new(n, scheme.azimuthal);
    let mut y = [0.0; 3];
    for (rho, wr) in g.graded(0.0, r, scheme.rim_panels) {
        let jac = rho.powi(n as i32 - 1) * wr;
        let lo = r * r - rho * rho;
        for (sig, ws) in g.graded(r * r, lo, scheme.rim_panels) {
            let ws = -ws;
            let s = t0 - sig;
            for (omega, wo) in sphere.points() {
                for i in 0..n {
                    y[i] = x0[i] + rho * omega[i];
                }
                visit(&y[..n], s, jac * ws * wo, &mut acc);
            }
        }
    }
    match bad {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// `int f` over the slab `{|y - x0| < r, s0 < s < s1}` with a smooth tensor
/// Gauss rule; for integrands without singularities in the slab.
pub fn integrate_slab(
    x0: &[f64],
    r: f64,
    s0: f64,
    s1: f64,
    order: usize,
    azimuthal: usize,
    mut f: impl FnMut(&[f64], f64) -> f64,
) -> Result<f64, QuadratureError> {
    let n = x0.len();
    let g = Gauss::new(order);
    let sphere = SphereRule::new(n, azimuthal);
    let mut y = [0.0; 3];
    let mut acc = 0.0;
    for (rho, wr) in g.on(0.0, r) {
        let jac = rho.powi(n as i32 - 1) * wr;
        for (s, ws) in g.on(s0, s1) {
            for (omega, wo) in sphere.points() {
                for i in 0..n {
                    y[i] = x0[i] + rho * omega[i];
                }
                let v = f(&y[..n], s);
                if !v.is_finite() {
                    return Err(QuadratureError::NonFinite { y: y[..n].to_vec(), s });
                }
                acc += jac * ws * wo * v;
            }
        }
    }
    Ok(acc)
}

/// Result of an excised-core integration extrapolated to `eps -> 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcisedIntegral {
    pub value: f64,
    /// `(eps, I(eps))` for `eps = 2^-4 r, ..., 2^-7 r`.
    pub estimates: Vec<(f64, f64)>,
    /// Exponent used for the extrapolation (given or estimated).
    pub exponent: f64,
}

/// Integrate outside cores `eps in {2^-4, ..., 2^-7} r` and extrapolate to
/// `eps = 0`, assuming `I(eps) = I + C eps^p + ...`. With `exponent = None`
/// the exponent is estimated from the last three estimates.
pub fn integrate_cylinder_excised(
    cyl: &ParabolicCylinder,
    scheme: &CylinderScheme,
    exponent: Option<f64>,
    mut f: impl FnMut(&[f64], f64) -> f64,
) -> Result<ExcisedIntegral, QuadratureError> {
    let mut estimates = Vec::new();
    for k in 4..=7 {
        let eps = cyl.radius * 0.5f64.powi(k);
        let v = integrate_excised_vec(cyl, scheme, eps, 1, |y, s, out| out[0] = f(y, s))?[0];
        estimates.push((eps, v));
    }
    let vals: Vec<f64> = estimates.iter().map(|e| e.1).collect();
    let p = match exponent {
        Some(p) => p,
        None => {
            let d1 = vals[2] - vals[1];
            let d2 = vals[3] - vals[2];
            if d2 == 0.0 {
                return Ok(ExcisedIntegral { value: vals[3], estimates, exponent: f64::INFINITY });
            }
            let ratio = d1 / d2;
            if !(ratio > 1.0) {
                return Err(QuadratureError::Extrapolation(format!("non-geometric differences (ratio {ratio})")));
            }
            ratio.log2()
        }
    };
    let value = richardson(&vals, p);
    Ok(ExcisedIntegral { value, estimates, exponent: p })
}

/// Richardson tableau for step halving, with error exponents `p, p+1, ...`.
pub fn richardson(vals: &[f64], p: f64) -> f64 {
    let mut row = vals.to_vec();
    let mut q = p;
    while row.len() > 1 {
        let f = 2f64.powf(q);
        row = row.windows(2).map(|w| w[1] + (w[1] - w[0]) / (f - 1.0)).collect();
        q += 1.0;
    }
    row[0]
}

/// `(int_Q |f|^q)^{1/q}`.
pub fn lq_norm_on_cylinder(
    cyl: &ParabolicCylinder,
    scheme: &CylinderScheme,
    q: f64,
    mut f: impl FnMut(&[f64], f64) -> f64,
) -> Result<f64, QuadratureError> {
    if !(q >= 1.0) {
        return Err(QuadratureError::InvalidExponent(q));
    }
    Ok(integrate_cylinder(cyl, scheme, |y, s| f(y, s).abs().powf(q))?.powf(1.0 / q))
}

/// Lq norm of a vector field, `(int_Q sum_j |f_j|^q)^{1/q}` per component.
pub fn lq_norms_vec(
    cyl: &ParabolicCylinder,
    scheme: &CylinderScheme,
    q: f64,
    m: usize,
    mut f: impl FnMut(&[f64], f64, &mut [f64]),
) -> Result<Vec<f64>, QuadratureError> {
    if !(q >= 1.0) {
        return Err(QuadratureError::InvalidExponent(q));
    }
    let sums = integrate_cylinder_vec(cyl, scheme, m, |y, s, out| {
        f(y, s, out);
        out.iter_mut().for_each(|v| *v = v.abs().powf(q));
    })?;
    Ok(sums.into_iter().map(|v| v.powf(1.0 / q)).collect())
}

#[cfg(test)]
mod tests;
