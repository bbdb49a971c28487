//! Analytic building blocks: the smooth cutoff and scalar profiles with
//! spatial gradients and Hessians.

use serde::{Deserialize, Serialize};

/// `C^infinity` step: `1` on `[0, 1/2]`, `0` on `[1, inf)`. Returns the value
/// and its first two derivatives.
pub fn cutoff(rho: f64) -> (f64, f64, f64) {
    if rho <= 0.5 {
        return (1.0, 0.0, 0.0);
    }
    if rho >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    // chi = sigma(z), z = 1/x - 1/(1-x), x = 2 rho - 1.
    let x = 2.0 * rho - 1.0;
    let z = 1.0 / x - 1.0 / (1.0 - x);
    let dz = -1.0 / (x * x) - 1.0 / ((1.0 - x) * (1.0 - x));
    let d2z = 2.0 / (x * x * x) - 2.0 / ((1.0 - x) * (1.0 - x) * (1.0 - x));
    let sig = if z >= 0.0 { 1.0 / (1.0 + (-z).exp()) } else { let e = z.exp(); e / (1.0 + e) };
    let s1 = sig * (1.0 - sig);
    let s2 = s1 * (1.0 - 2.0 * sig);
    (sig, 2.0 * s1 * dz, 4.0 * (s2 * dz * dz + s1 * d2z))
}

/// Value, gradient and Hessian in the spatial variables (`n <= 3`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self { v, ..Default::default() }
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let mut r = Jet2 { v: self.v * o.v, ..Default::default() };
        for i in 0..3 {
            r.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..3 {
                r.h[i][j] = self.h[i][j] * o.v + self.g[i] * o.g[j] + self.g[j] * o.g[i] + self.v * o.h[i][j];
            }
        }
        r
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        let mut r = *self;
        r.v *= k;
        r.g.iter_mut().for_each(|v| *v *= k);
        r.h.iter_mut().flatten().for_each(|v| *v *= k);
        r
    }
}

/// `psi(y, s) = rho^p chi(rho) W(y, s) M(y)` with `rho = |(y, s)|`,
/// `W = 1 + a sin(k . y + omega s)` (or `1 + a cos(k . y)` when `even`) and
/// `M = y_1` when `odd_factor` is set, otherwise `1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarProfile {
    pub power: f64,
    #[serde(default)]
    pub wave: Vec<f64>,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub wave_amplitude: f64,
    #[serde(default)]
    pub even_wave: bool,
    #[serde(default)]
    pub odd_factor: bool,
}

impl ScalarProfile {
    pub fn radial(power: f64) -> Self {
        Self { power, wave: Vec::new(), omega: 0.0, wave_amplitude: 0.0, even_wave: false, odd_factor: false }
    }

    /// Degree of homogeneity at the origin (`power`, plus one with the `y_1` factor).
    pub fn homogeneity(&self) -> f64 {
        self.power + if self.odd_factor { 1.0 } else { 0.0 }
    }

    pub fn eval(&self, y: &[f64], s: f64) -> Jet2 {
        let n = y.len();
        let r2: f64 = y.iter().map(|v| v * v).sum::<f64>() + s.abs();
        let rho = r2.sqrt();
        if rho == 0.0 || rho >= 1.0 {
            return Jet2::default();
        }
        // Radial factor R(rho) = rho^p chi(rho) and its rho-derivatives.
        let (c0, c1, c2) = cutoff(rho);
        let p = self.power;
        let rp = rho.powf(p);
        let r0 = rp * c0;
        let r1 = p * rp / rho * c0 + rp * c1;
        let r2d = p * (p - 1.0) * rp / r2 * c0 + 2.0 * p * rp / rho * c1 + rp * c2;
        let mut radial = Jet2 { v: r0, ..Default::default() };
        for i in 0..n {
            radial.g[i] = r1 * y[i] / rho;
            for j in 0..n {
                let yy = y[i] * y[j] / r2;
                let delta = if i == j { 1.0 } else { 0.0 };
                radial.h[i][j] = r2d * yy + r1 * (delta - yy) / rho;
            }
        }
        let mut out = radial;
        if self.wave_amplitude != 0.0 {
            let arg: f64 = self.wave.iter().zip(y).map(|(k, v)| k * v).sum::<f64>() + if self.even_wave { 0.0 } else { self.omega * s };
            let (sv, cv) = arg.sin_cos();
            let a = self.wave_amplitude;
            let (f0, f1, f2) = if self.even_wave { (cv, -sv, -cv) } else { (sv, cv, -sv) };
            let mut w = Jet2::constant(1.0 + a * f0);
            for i in 0..n {
                let ki = self.wave.get(i).copied().unwrap_or(0.0);
                w.g[i] = a * f1 * ki;
                for j in 0..n {
                    let kj = self.wave.get(j).copied().unwrap_or(0.0);
                    w.h[i][j] = a * f2 * ki * kj;
                }
            }
            out = out.mul(&w);
        }
        if self.odd_factor {
            let mut m = Jet2::constant(y[0]);
            m.g[0] = 1.0;
            out = out.mul(&m);
        }
        out
    }
}

/// `rot psi = (d_2 psi, -d_1 psi[, 0])` and its spatial Jacobian
/// `jac[k][i] = d_i (rot psi)_k`.
pub fn rot(j: &Jet2, n: usize) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [0.0; 3];
    let mut jac = [[0.0; 3]; 3];
    v[0] = j.g[1];
    v[1] = -j.g[0];
    for i in 0..n {
        jac[0][i] = j.h[1][i];
        jac[1][i] = -j.h[0][i];
    }
    (v, jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_is_smooth_step() {
        assert_eq!(cutoff(0.3), (1.0, 0.0, 0.0));
        assert_eq!(cutoff(1.2), (0.0, 0.0, 0.0));
        let h = 1e-5;
        for &r in &[0.55, 0.7, 0.75, 0.9, 0.97] {
            let (v, d1, d2) = cutoff(r);
            assert!(v > 0.0 && v < 1.0);
            let fd1 = (cutoff(r + h).0 - cutoff(r - h).0) / (2.0 * h);
            let fd2 = (cutoff(r + h).1 - cutoff(r - h).1) / (2.0 * h);
            assert!((fd1 - d1).abs() < 1e-6 * (1.0 + d1.abs()), "r={r}");
            assert!((fd2 - d2).abs() < 1e-5 * (1.0 + d2.abs()), "r={r}");
        }
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let prof = ScalarProfile { power: 2.3, wave: vec![3.0, -2.0, 1.0], omega: 5.0, wave_amplitude: 0.5, even_wave: false, odd_factor: true };
        for n in 2..=3 {
            let y = [0.31, -0.22, 0.17];
            let s = -0.12;
            let j = prof.eval(&y[..n], s);
            let h = 1e-5;
            for i in 0..n {
                let mut yp = y;
                let mut ym = y;
                yp[i] += h;
                ym[i] -= h;
                let (a, b) = (prof.eval(&yp[..n], s), prof.eval(&ym[..n], s));
                assert!(((a.v - b.v) / (2.0 * h) - j.g[i]).abs() < 1e-7);
                for k in 0..n {
                    assert!(((a.g[k] - b.g[k]) / (2.0 * h) - j.h[k][i]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn profile_is_homogeneous_near_origin() {
        let prof = ScalarProfile { odd_factor: true, ..ScalarProfile::radial(1.5) };
        let a = prof.eval(&[0.1, 0.05], -0.01).v;
        let b = prof.eval(&[0.2, 0.1], -0.04).v;
        assert!((b / a - 2f64.powf(2.5)).abs() < 1e-12);
        assert_eq!(prof.eval(&[0.9, 0.5], 0.0).v, 0.0);
    }
}
