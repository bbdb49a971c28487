//! Pressure companion and the structure of `d_t P - Delta P + grad R`.

use super::polynomial::{CoefficientEntry, PolySlice, VectorPolynomial};
use super::ExpansionError;
use crate::kernels::multi_index::spatial_indices_up_to;
use crate::kernels::MultiIndexSpec;
use crate::poly::Poly;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Residual `Q = d_t P - Delta P + grad R` at one slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSlice {
    pub t: f64,
    /// `C_{alpha,t}` for `|alpha|` in `{d - 1, d}`.
    pub top: Vec<CoefficientEntry>,
    /// Sum of `|Q|` coefficients of each degree `0..d - 1`.
    pub low_degree_norms: Vec<f64>,
    /// Sum of `|P|` coefficients on this slice.
    pub total_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualStructure {
    pub degree: u32,
    pub slices: Vec<ResidualSlice>,
    /// Largest `sum(low_degree_norms) / total_mass` over slices.
    pub low_degree_ratio: f64,
    /// Largest coefficient of `div P`.
    pub divergence: f64,
}

/// `d/dt` of slice coefficients at slice `i` by three-point Lagrange
/// differentiation over the nearest slices.
fn time_derivative(p: &VectorPolynomial, i: usize) -> Vec<Poly> {
    let m = p.slices.len();
    let a = i.saturating_sub(1).min(m - 3);
    let idx = [a, a + 1, a + 2];
    let ts: Vec<f64> = idx.iter().map(|&k| p.slices[k].t).collect();
    let t = p.slices[i].t;
    // derivative of the Lagrange basis polynomial L_k at t
    let w: Vec<f64> = (0..3)
        .map(|k| {
            let others: Vec<f64> = (0..3).filter(|&j| j != k).map(|j| ts[j]).collect();
            let denom: f64 = others.iter().map(|o| ts[k] - o).product();
            ((t - others[0]) + (t - others[1])) / denom
        })
        .collect();
    (0..p.n)
        .map(|c| {
            let mut acc = Poly::zero(p.n);
            for (k, &s) in idx.iter().enumerate() {
                acc = acc.add(&p.slices[s].components[c].scale(w[k]));
            }
            acc
        })
        .collect()
}

fn check_slices(p: &VectorPolynomial) -> Result<(), ExpansionError> {
    if p.slices.len() < 3 {
        return Err(ExpansionError::InsufficientSlices(p.slices.len()));
    }
    if p.slices.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(ExpansionError::Shape("slice times must increase strictly".into()));
    }
    Ok(())
}

/// `H = d_t P - Delta P` on every slice.
fn heat_part(p: &VectorPolynomial) -> Vec<Vec<Poly>> {
    (0..p.slices.len())
        .map(|i| {
            let dt = time_derivative(p, i);
            dt.into_iter().zip(&p.slices[i].components).map(|(a, c)| a.add(&c.laplacian().scale(-1.0))).collect()
        })
        .collect()
}

/// Least-norm `R` (degree `<= d - 1`, no constant) whose gradient best
/// matches the part of `H` of degree `<= d - 2`.
fn pressure_for(n: usize, d: u32, h: &[Poly]) -> Poly {
    let mut out = Poly::zero(n);
    if d < 2 {
        return out;
    }
    let unknowns: Vec<Vec<u32>> = spatial_indices_up_to(n, d - 1).into_iter().filter(|m| m.iter().sum::<u32>() > 0).collect();
    let targets: Vec<Vec<u32>> = spatial_indices_up_to(n, d - 2);
    let rows = n * targets.len();
    let mut a = DMatrix::zeros(rows, unknowns.len());
    let mut b = DVector::zeros(rows);
    for j in 0..n {
        for (ti, alpha) in targets.iter().enumerate() {
            let r = j * targets.len() + ti;
            b[r] = -h[j].terms.get(&MultiIndexSpec::spatial(alpha.clone())).copied().unwrap_or(0.0);
            let mut up = alpha.clone();
            up[j] += 1;
            if let Some(col) = unknowns.iter().position(|m| *m == up) {
                a[(r, col)] = (alpha[j] + 1) as f64;
            }
        }
    }
    let sol = a.svd(true, true).solve(&b, 1e-12).expect("svd solve with both factors");
    for (m, v) in unknowns.into_iter().zip(sol.iter()) {
        out.add_term(MultiIndexSpec::spatial(m), *v);
    }
    out
}

/// The pressure companion `R` on every slice of `p`.
pub fn pressure_companion(p: &VectorPolynomial) -> Result<Vec<PolySlice>, ExpansionError> {
    check_slices(p)?;
    Ok(heat_part(p)
        .iter()
        .zip(&p.slices)
        .map(|(h, s)| PolySlice { t: s.t, components: vec![pressure_for(p.n, p.degree, h)] })
        .collect())
}

/// `P` with its pressure companion attached.
pub fn with_pressure(p: &VectorPolynomial) -> Result<VectorPolynomial, ExpansionError> {
    let mut out = p.clone();
    out.pressure = Some(pressure_companion(p)?);
    Ok(out)
}

/// Split `Q = d_t P - Delta P + grad R` into the top degrees `d - 1, d` and
/// the lower degrees, which vanish for the asymptotic polynomial of a solution.
pub fn residual_structure(p: &VectorPolynomial) -> Result<ResidualStructure, ExpansionError> {
    check_slices(p)?;
    let pressure = match &p.pressure {
        Some(r) if r.len() == p.slices.len() => r.clone(),
        Some(r) => return Err(ExpansionError::Shape(format!("{} pressure slices for {} slices", r.len(), p.slices.len()))),
        None => pressure_companion(p)?,
    };
    let d = p.degree;
    let mut slices = Vec::new();
    let mut ratio = 0.0f64;
    for ((h, s), r) in heat_part(p).iter().zip(&p.slices).zip(&pressure) {
        let q: Vec<Poly> = (0..p.n).map(|j| h[j].add(&r.components[0].dx(j))).collect();
        let mut low = vec![0.0; d.saturating_sub(1) as usize];
        let mut top = Vec::new();
        for (j, qj) in q.iter().enumerate() {
            for (spec, v) in &qj.terms {
                let k = spec.spatial_order();
                if k + 1 < d {
                    low[k as usize] += v.abs();
                } else {
                    top.push(CoefficientEntry { component: j, multi_index: spec.mu.clone(), value: *v });
                }
            }
        }
        let total: f64 = s.components.iter().flat_map(|c| c.terms.values()).map(|v| v.abs()).sum();
        let low_sum: f64 = low.iter().sum();
        let rel = if total > 0.0 { low_sum / total } else if low_sum > 0.0 { f64::INFINITY } else { 0.0 };
        ratio = ratio.max(rel);
        slices.push(ResidualSlice { t: s.t, top, low_degree_norms: low, total_mass: total });
    }
    Ok(ResidualStructure { degree: d, slices, low_degree_ratio: ratio, divergence: p.divergence_max() })
}
