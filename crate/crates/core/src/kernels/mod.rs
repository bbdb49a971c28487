//! Heat kernel, Stokes tensor, their derivatives and Taylor truncations.
//!
//! The heat kernel is `Gamma(x, t) = (4 pi t)^{-n/2} exp(-|x|^2 / 4t)` for
//! `t > 0` and zero otherwise. The Stokes tensor `K_jk` is the inverse Fourier
//! transform of `(delta_jk - xi_j xi_k / |xi|^2) e^{-|xi|^2 t}`; see [`jet`] for
//! the closed form used here. Both are causal: every evaluator returns zero
//! for `t <= 0`.

pub mod hermite;
pub mod incgamma;
pub mod jet;
pub mod multi_index;
pub mod point;

pub use jet::{laplacian_power, HeatJet, StokesJet};
pub use multi_index::{MonomialTable, MultiIndexSpec};
pub use point::PointKernel;

use crate::point::SpaceTimePoint;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("dimension n = {0} is not supported (heat kernel: 1..=3, Stokes tensor: 2..=3)")]
    UnsupportedDimension(usize),
    #[error("component index ({j}, {k}) out of range for n = {n}")]
    ComponentOutOfRange { j: usize, k: usize, n: usize },
    #[error("multi-index has {got} entries but the point has dimension {n}")]
    IndexDimension { got: usize, n: usize },
    #[error("the Stokes tensor is only evaluated for t > 0 (got t = {0})")]
    NonPositiveTime(f64),
    #[error("kernel singularity at (x, t) = (0, 0)")]
    Singular,
    #[error("Taylor truncation requires s != 0")]
    ZeroTime,
    #[error("incomplete gamma evaluation did not converge (b = {b}, S = {s}); increase the term budget")]
    NotConverged { b: f64, s: f64 },
}

/// `Gamma(x, t)`; exactly zero for `t <= 0`.
pub fn heat_kernel(p: &SpaceTimePoint, n: usize) -> f64 {
    if p.t <= 0.0 {
        return 0.0;
    }
    let r2: f64 = p.x.iter().take(n).map(|v| v * v).sum();
    (4.0 * PI * p.t).powf(-0.5 * n as f64) * (-r2 / (4.0 * p.t)).exp()
}

/// `D_x^mu D_t^l Gamma(x, t)` from the Hermite closed form.
pub fn heat_kernel_deriv(spec: &MultiIndexSpec, p: &SpaceTimePoint, n: usize) -> Result<f64, KernelError> {
    if !(1..=3).contains(&n) {
        return Err(KernelError::UnsupportedDimension(n));
    }
    check_dims(spec, p, n)?;
    if p.t == 0.0 && p.x.iter().all(|&v| v == 0.0) {
        return Err(KernelError::Singular);
    }
    if p.t <= 0.0 {
        return Ok(0.0);
    }
    let mut jet = HeatJet::new(n, spec.order());
    jet.eval(&p.x, p.t);
    Ok(jet.time_derivative(&multi_index::to_exps(&spec.mu), spec.l))
}

/// `K_jk(x, t)` for `t > 0`.
pub fn stokes_kernel(j: usize, k: usize, p: &SpaceTimePoint, n: usize) -> Result<f64, KernelError> {
    stokes_kernel_deriv(&MultiIndexSpec::zero(n), j, k, p, n)
}

/// `D_x^mu D_t^l K_jk(x, t)` for `t > 0`.
pub fn stokes_kernel_deriv(spec: &MultiIndexSpec, j: usize, k: usize, p: &SpaceTimePoint, n: usize) -> Result<f64, KernelError> {
    check_stokes(j, k, p, n)?;
    check_dims(spec, p, n)?;
    if p.t <= 0.0 {
        return Err(KernelError::NonPositiveTime(p.t));
    }
    let mut jet = StokesJet::new(n, spec.order());
    jet.eval(&p.x, p.t)?;
    let idx = jet.term_index(spec).expect("term present by construction");
    Ok(jet.block(idx)[j * n + k])
}

/// Full `n x n` tensor `D^mu D^l K(x, t)` (row-major), zero for `t <= 0`.
pub fn stokes_tensor(spec: &MultiIndexSpec, p: &SpaceTimePoint, n: usize) -> Result<Vec<f64>, KernelError> {
    check_stokes(0, 0, p, n)?;
    check_dims(spec, p, n)?;
    let mut jet = StokesJet::new(n, spec.order());
    jet.eval(&p.x, p.t)?;
    let idx = jet.term_index(spec).expect("term present by construction");
    Ok(jet.block(idx).to_vec())
}

fn check_stokes(j: usize, k: usize, p: &SpaceTimePoint, n: usize) -> Result<(), KernelError> {
    if n != 2 && n != 3 {
        return Err(KernelError::UnsupportedDimension(n));
    }
    if p.dim() != n {
        return Err(KernelError::IndexDimension { got: p.dim(), n });
    }
    if j >= n || k >= n {
        return Err(KernelError::ComponentOutOfRange { j, k, n });
    }
    Ok(())
}

fn check_dims(spec: &MultiIndexSpec, p: &SpaceTimePoint, n: usize) -> Result<(), KernelError> {
    if spec.dim() != n {
        return Err(KernelError::IndexDimension { got: spec.dim(), n });
    }
    if p.dim() != n {
        return Err(KernelError::IndexDimension { got: p.dim(), n });
    }
    Ok(())
}

/// One parabolic-order slice `K^m` of the Taylor expansion of
/// `(x, t) -> K(x - y, t - s)` about `(x, t) = (0, 0)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelTaylorTerm {
    pub m: u32,
    /// The point `(-y, -s)` at which the derivatives are taken.
    pub base_point: SpaceTimePoint,
    /// `D^mu D^l K(-y, -s)` as row-major `n x n` matrices, `|mu| + 2l = m`.
    pub coefficients: Vec<(MultiIndexSpec, Vec<f64>)>,
}

impl KernelTaylorTerm {
    /// `sum_{mu, l} D^mu D^l K(-y, -s) x^mu t^l / (mu! l!)` as an `n x n` matrix.
    pub fn evaluate(&self, x: &[f64], t: f64) -> Vec<f64> {
        let n = x.len();
        let mut out = vec![0.0; n * n];
        for (spec, mat) in &self.coefficients {
            let mono = spec.mu.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>()
                * t.powi(spec.l as i32)
                / spec.factorial_weight();
            for (o, c) in out.iter_mut().zip(mat) {
                *o += c * mono;
            }
        }
        out
    }

    /// Heat residual of the polynomial, checked on coefficients: the
    /// coefficient of `x^nu t^lam / (nu! lam!)` in `d_t - Delta` is
    /// `c(nu, lam + 1) - sum_i c(nu + 2 e_i, lam)`. Returns the largest
    /// absolute residual relative to the largest coefficient.
    pub fn heat_residual(&self) -> f64 {
        let lookup = |mu: &[u32], l: u32| {
            self.coefficients.iter().find(|(s, _)| s.mu == mu && s.l == l).map(|(_, c)| c)
        };
        let n = self.base_point.dim();
        let scale = self
            .coefficients
            .iter()
            .flat_map(|(_, c)| c.iter())
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        if self.m < 2 {
            return 0.0;
        }
        for nu in multi_index::spatial_indices_up_to(n, self.m - 2) {
            let nd: u32 = nu.iter().sum();
            if (self.m - 2 - nd) % 2 != 0 {
                continue;
            }
            let lam = (self.m - 2 - nd) / 2;
            let dt = lookup(&nu, lam + 1).expect("complete term");
            for e in 0..n * n {
                let mut lap = 0.0;
                for i in 0..n {
                    let mut shifted = nu.clone();
                    shifted[i] += 2;
                    lap += lookup(&shifted, lam).expect("complete term")[e];
                }
                worst = worst.max((dt[e] - lap).abs());
            }
        }
        worst / scale
    }
}

/// Terms `K^0, ..., K^d` of the Taylor expansion about `(0, 0)` of
/// `K(x - y, t - s)`, with `q = (y, s)`.
pub fn kernel_taylor_truncation(d: u32, q: &SpaceTimePoint, n: usize) -> Result<Vec<KernelTaylorTerm>, KernelError> {
    check_stokes(0, 0, q, n)?;
    if q.t == 0.0 {
        return Err(KernelError::ZeroTime);
    }
    let base = SpaceTimePoint::new(q.x.iter().map(|v| -v).collect(), -q.t);
    let mut jet = StokesJet::new(n, d);
    jet.eval(&base.x, base.t)?;
    let mut out: Vec<KernelTaylorTerm> = (0..=d)
        .map(|m| KernelTaylorTerm { m, base_point: base.clone(), coefficients: Vec::new() })
        .collect();
    for (i, spec) in jet.terms().iter().enumerate() {
        out[spec.order() as usize].coefficients.push((spec.clone(), jet.block(i).to_vec()));
    }
    Ok(out)
}
