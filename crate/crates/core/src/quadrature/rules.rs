//! Node sets: Gauss-Legendre intervals, sphere rules and parabolic polar
//! coordinates.
//!
//! Parabolic polar coordinates about a centre `(x0, t0)` are
//! `y = x0 + rho c omega`, `s = t0 - rho^2 (1 - c^2)` with `rho > 0`,
//! `c in (0, 1)` and `omega` on the unit sphere. They cover the past half
//! `s < t0` of space-time, `rho` is exactly the parabolic distance to the
//! centre, and the volume element is `2 rho^{n+1} c^{n-1} d rho dc d omega`.
//! A kernel homogeneous of degree `-n` therefore becomes bounded.

use gauss_quad::legendre::GaussLegendre;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `(-1, 1)`.
#[derive(Clone, Debug)]
pub struct Gauss {
    pairs: Vec<(f64, f64)>,
}

impl Gauss {
    pub fn new(order: usize) -> Self {
        let order = order.max(2);
        let rule = GaussLegendre::new(order).expect("order >= 2");
        let mut pairs = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Nodes and weights mapped to `(a, b)`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.pairs.iter().map(move |&(x, w)| (m + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Nodes on `(a, b)` split into `panels` geometrically graded panels that
    /// halve towards `b`. Resolves `exp(-1/(b - x))`-type edge behaviour,
    /// which is smooth but not analytic.
    pub fn graded(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len() * panels.max(1));
        let mut lo = a;
        for k in 0..panels.max(1) {
            let hi = if k + 1 == panels.max(1) { b } else { lo + 0.5 * (b - lo) };
            out.extend(self.on(lo, hi));
            lo = hi;
        }
        out
    }
}

/// Quadrature on the unit sphere `S^{n-1}`: two points for `n = 1`, the
/// trapezoid rule for `n = 2` and Gauss x trapezoid for `n = 3`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    n: usize,
    points: Vec<([f64; 3], f64)>,
}

impl SphereRule {
    /// `m` is the number of azimuthal nodes; the polar Gauss order is `m / 2`.
    pub fn new(n: usize, m: usize) -> Self {
        let mut points = Vec::new();
        match n {
            1 => {
                points.push(([1.0, 0.0, 0.0], 1.0));
                points.push(([-1.0, 0.0, 0.0], 1.0));
            }
            2 => {
                let m = m.max(3);
                for k in 0..m {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    points.push(([phi.cos(), phi.sin(), 0.0], 2.0 * PI / m as f64));
                }
            }
            3 => {
                let m = m.max(4);
                let polar = Gauss::new(m / 2);
                for (ct, wt) in polar.on(-1.0, 1.0) {
                    let st = (1.0 - ct * ct).max(0.0).sqrt();
                    for k in 0..m {
                        let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                        points.push(([st * phi.cos(), st * phi.sin(), ct], wt * 2.0 * PI / m as f64));
                    }
                }
            }
            _ => panic!("sphere rules support n in 1..=3"),
        }
        Self { n, points }
    }

    /// Rule concentrated near the direction `pole`: the angle to the pole is
    /// split at `pi 2^-k`, `k = 0..=levels`, with `order` Gauss nodes per
    /// panel. In 3D the azimuth about the pole uses `2 order` nodes.
    pub fn focused(n: usize, pole: &[f64], order: usize, levels: u32) -> Self {
        let g = Gauss::new(order);
        let mut breaks: Vec<f64> = (0..=levels).map(|k| PI * 0.5f64.powi(k as i32)).collect();
        breaks.push(0.0);
        breaks.reverse();
        let norm = pole.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut points = Vec::new();
        match n {
            2 => {
                let th0 = if norm > 0.0 { pole[1].atan2(pole[0]) } else { 0.0 };
                for w in breaks.windows(2) {
                    for (b, wb) in g.on(w[0], w[1]) {
                        for th in [th0 + b, th0 - b] {
                            points.push(([th.cos(), th.sin(), 0.0], wb));
                        }
                    }
                }
            }
            3 => {
                let e0 = if norm > 0.0 { [pole[0] / norm, pole[1] / norm, pole[2] / norm] } else { [0.0, 0.0, 1.0] };
                // any unit vector orthogonal to e0, then the cross product
                let a = if e0[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let d = a[0] * e0[0] + a[1] * e0[1] + a[2] * e0[2];
                let mut e1 = [a[0] - d * e0[0], a[1] - d * e0[1], a[2] - d * e0[2]];
                let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
                e1.iter_mut().for_each(|v| *v /= l);
                let e2 = [e0[1] * e1[2] - e0[2] * e1[1], e0[2] * e1[0] - e0[0] * e1[2], e0[0] * e1[1] - e0[1] * e1[0]];
                let m = 2 * order;
                for w in breaks.windows(2) {
                    for (b, wb) in g.on(w[0], w[1]) {
                        let (sb, cb) = b.sin_cos();
                        for k in 0..m {
                            let (sp, cp) = (2.0 * PI * (k as f64 + 0.5) / m as f64).sin_cos();
                            let mut p = [0.0; 3];
                            for i in 0..3 {
                                p[i] = cb * e0[i] + sb * (cp * e1[i] + sp * e2[i]);
                            }
                            points.push((p, wb * sb * 2.0 * PI / m as f64));
                        }
                    }
                }
            }
            _ => panic!("focused sphere rules support n in 2..=3"),
        }
        Self { n, points }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[([f64; 3], f64)] {
        &self.points
    }
}

/// Surface measure of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension"),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Parabolic polar rule over `{a < rho < b, 0 < c < 1}` (the past half of a
/// parabolic annulus) about an arbitrary centre.
#[derive(Clone, Debug)]
pub struct PolarRule {
    pub radial: Gauss,
    pub cosine: Vec<(f64, f64)>,
    pub sphere: SphereRule,
}

impl PolarRule {
    /// The cosine direction uses `cosine_panels` panels graded towards
    /// `c = 1`, where the slab `s ~ t0` meets the spatial boundary.
    pub fn new(n: usize, radial: usize, cosine: usize, cosine_panels: usize, azimuthal: usize) -> Self {
        Self {
            radial: Gauss::new(radial),
            cosine: Gauss::new(cosine).graded(0.0, 1.0, cosine_panels),
            sphere: SphereRule::new(n, azimuthal),
        }
    }

    /// Visit every node of the annulus `a < rho < b` about `(x0, t0)`,
    /// calling `f(y, s, weight)`. Weights include the Jacobian.
    pub fn for_each(&self, x0: &[f64], t0: f64, a: f64, b: f64, mut f: impl FnMut(&[f64], f64, f64)) {
        let n = self.sphere.dim();
        let mut y = [0.0; 3];
        for (rho, wr) in self.radial.on(a, b) {
            for &(c, wc) in &self.cosine {
                let jac = 2.0 * rho.powi(n as i32 + 1) * c.powi(n as i32 - 1) * wr * wc;
                let s = t0 - rho * rho * (1.0 - c * c);
                for (omega, wo) in self.sphere.points() {
                    for i in 0..n {
                        y[i] = x0[i] + rho * c * omega[i];
                    }
                    f(&y[..n], s, jac * wo);
                }
            }
        }
    }
}
