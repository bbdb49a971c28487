//! Closed-form `K_jk` and `d_i K_jk` at single points.
//!
//! With `I_m = int_tau^inf Gamma(z, sigma) sigma^{-m} d sigma
//! = (4 pi)^{-n/2} tau^{-a} g(a, S)`, `a = n/2 + m - 1`,
//!
//! ```text
//! K_jk     = delta_jk Gamma + z_j z_k I_2 / 4 - delta_jk I_1 / 2
//! d_i K_jk = -delta_jk z_i Gamma / (2 tau) - z_i z_j z_k I_3 / 8
//!            + (delta_ij z_k + delta_ik z_j + delta_jk z_i) I_2 / 4
//! ```

use super::incgamma::scaled_lower_gamma_ladder;
use super::KernelError;
use std::f64::consts::PI;

/// Evaluator of the Stokes tensor (order 0) or its spatial gradient (order 1).
#[derive(Clone, Debug)]
pub struct PointKernel {
    n: usize,
    order: u32,
    values: [f64; 27],
}

impl PointKernel {
    pub fn new(n: usize, order: u32) -> Self {
        assert!(n == 2 || n == 3, "Stokes tensor supports n in {{2, 3}}");
        assert!(order <= 1, "point kernels cover orders 0 and 1");
        Self { n, order, values: [0.0; 27] }
    }

    /// Order 0: `values[j n + k] = K_jk`. Order 1: `values[(i n + j) n + k] = d_i K_jk`.
    pub fn values(&self) -> &[f64] {
        let len = self.n.pow(2 + self.order);
        &self.values[..len]
    }

    pub fn eval(&mut self, z: &[f64], tau: f64) -> Result<(), KernelError> {
        let n = self.n;
        if tau <= 0.0 {
            self.values.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        let r2: f64 = z[..n].iter().map(|v| v * v).sum();
        let s = r2 / (4.0 * tau);
        let b0 = 0.5 * n as f64;
        let mut g = [0.0; 3];
        let rungs = 2 + self.order as usize;
        scaled_lower_gamma_ladder(b0, s, &mut g[..rungs])?;
        let inv = 1.0 / tau;
        let (norm, tb) = if n == 2 { (0.25 / PI, inv) } else { ((4.0 * PI).powf(-1.5), inv * inv.sqrt()) };
        let gamma = norm * tb * (-s).exp();
        // I_m = norm tau^{-(b0 + m - 1)} g[m - 1]
        let i1 = norm * tb * g[0];
        let i2 = norm * tb * inv * g[1];
        if self.order == 0 {
            for j in 0..n {
                for k in 0..n {
                    let mut v = 0.25 * z[j] * z[k] * i2;
                    if j == k {
                        v += gamma - 0.5 * i1;
                    }
                    self.values[j * n + k] = v;
                }
            }
        } else {
            let i3 = norm * tb * inv * inv * g[2];
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let v = -d(j, k) * z[i] * gamma * 0.5 * inv - 0.125 * z[i] * z[j] * z[k] * i3
                            + 0.25 * (d(i, j) * z[k] + d(i, k) * z[j] + d(j, k) * z[i]) * i2;
                        self.values[(i * n + j) * n + k] = v;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{MultiIndexSpec, StokesJet};

    #[test]
    fn matches_jet_evaluator() {
        for n in [2, 3] {
            let mut jet = StokesJet::new(n, 1);
            let mut p0 = PointKernel::new(n, 0);
            let mut p1 = PointKernel::new(n, 1);
            for (k, tau) in [1e-4, 0.01, 0.3, 2.0, 50.0].into_iter().enumerate() {
                let z: Vec<f64> = (0..n).map(|i| 0.37 * (i as f64 + 1.0) - 0.2 * k as f64).collect();
                jet.eval(&z, tau).unwrap();
                p0.eval(&z, tau).unwrap();
                p1.eval(&z, tau).unwrap();
                let b = jet.block(jet.term_index(&MultiIndexSpec::zero(n)).unwrap());
                let scale = b.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
                for (a, c) in b.iter().zip(p0.values()) {
                    assert!((a - c).abs() <= 1e-12 * scale, "n={n} tau={tau}: {a} vs {c}");
                }
                for i in 0..n {
                    let b = jet.block(jet.term_index(&MultiIndexSpec::unit(n, i)).unwrap());
                    let scale = b.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
                    for (a, c) in b.iter().zip(&p1.values()[i * n * n..(i + 1) * n * n]) {
                        assert!((a - c).abs() <= 1e-12 * scale, "n={n} tau={tau} i={i}: {a} vs {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn vanishes_for_non_positive_time() {
        let mut p = PointKernel::new(2, 1);
        p.eval(&[0.1, 0.2], 0.0).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
    }
}
