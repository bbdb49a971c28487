//! Volume potential `w`, Taylor moments, the polynomial correction `v` and
//! the corrected solution `u = w - v`.
//!
//! Points are written in parabolic polar coordinates: about the origin,
//! `y = rho c omega`, `s = -+ rho^2 (1 - c^2)`, and locally about the
//! evaluation point, `y = x + rho' c omega`, `s = t - rho'^2 (1 - c^2)`.
//!
//! To evaluate `u(x, t)`, with `rho0 = |(x, t)|`:
//! - A bump `phi(rho' / eps)`, `eps = rho0 / 2`, isolates the kernel
//!   singularity. `K phi f` is integrated in local coordinates, where the
//!   Jacobian `rho'^{n+1}` cancels it.
//! - `K (1 - phi) 1(s < t) f` over the near ball `|(y,s)| < R1` (a dyadic
//!   radius `>= 2 rho0`) uses origin-centred panels split where `s = t`.
//! - The Taylor part over the near ball uses precomputed moments.
//! - Beyond `R1` the remainder `(K - sum_m K^m) f` is integrated on one node
//!   set for both terms. Their large, nearly equal integrals then cancel
//!   without amplifying quadrature error.
//!
//! The divergence route replaces `K_jk f_j` by `d_i K_jk g_ij`, after
//! integrating by parts in `y`.

use super::forcing::{Forcing, ForcingForm};
use super::ConstructError;
use crate::kernels::{KernelError, MultiIndexSpec, PointKernel, StokesJet};
use crate::poly::SpaceTimePolynomial;
use crate::quadrature::{Gauss, SphereRule};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

/// Which kernel and density are integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `int K_jk(x - y, t - s) f_j(y, s)`.
    Standard,
    /// `int d_i K_jk(x - y, t - s) g_ij(y, s)`.
    Divergence,
}

/// Node counts. Panels meeting the bump window use the `dense_*` counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialScheme {
    pub radial: usize,
    pub cosine: usize,
    pub cosine_panels: usize,
    pub azimuthal: usize,
    /// Graded cosine panels in the region beyond the near ball.
    pub far_cosine_panels: usize,
    pub dense_radial: usize,
    pub dense_cosine: usize,
    pub dense_cosine_panels: usize,
    /// Gauss order per angular panel of the rule focused on the direction
    /// of `x`, with `dense_angular_levels` dyadic panels.
    pub dense_angular: usize,
    pub dense_angular_levels: u32,
    pub local_radial: usize,
    pub local_cosine: usize,
    pub local_azimuthal: usize,
    /// Origin panels stop at `rho0 * 2^-floor_exponent`.
    pub floor_exponent: u32,
    /// Taylor moments use dyadic panels down to `R * 2^-moment_depth`.
    pub moment_depth: u32,
}

impl Default for PotentialScheme {
    fn default() -> Self {
        Self {
            radial: 6,
            cosine: 6,
            cosine_panels: 8,
            azimuthal: 24,
            far_cosine_panels: 8,
            dense_radial: 6,
            dense_cosine: 6,
            dense_cosine_panels: 8,
            dense_angular: 6,
            dense_angular_levels: 4,
            local_radial: 6,
            local_cosine: 8,
            local_azimuthal: 16,
            floor_exponent: 6,
            moment_depth: 50,
        }
    }
}

impl PotentialScheme {
    /// Every node count scaled by `k` (used for convergence checks).
    pub fn scaled(&self, k: f64) -> Self {
        let s = |v: usize| ((v as f64 * k).round() as usize).max(2);
        Self {
            radial: s(self.radial),
            cosine: s(self.cosine),
            cosine_panels: self.cosine_panels,
            azimuthal: s(self.azimuthal),
            far_cosine_panels: self.far_cosine_panels,
            dense_radial: s(self.dense_radial),
            dense_cosine: s(self.dense_cosine),
            dense_cosine_panels: self.dense_cosine_panels,
            dense_angular: s(self.dense_angular),
            dense_angular_levels: self.dense_angular_levels,
            local_radial: s(self.local_radial),
            local_cosine: s(self.local_cosine),
            local_azimuthal: s(self.local_azimuthal),
            floor_exponent: self.floor_exponent,
            moment_depth: self.moment_depth,
        }
    }

    /// Cheaper settings for 3D smoke runs.
    pub fn coarse() -> Self {
        Self {
            radial: 6,
            cosine: 6,
            cosine_panels: 3,
            azimuthal: 12,
            far_cosine_panels: 4,
            dense_radial: 8,
            dense_cosine: 5,
            dense_cosine_panels: 6,
            dense_angular: 4,
            dense_angular_levels: 3,
            local_radial: 6,
            local_cosine: 8,
            local_azimuthal: 12,
            floor_exponent: 5,
            moment_depth: 40,
        }
    }
}

/// Gauss nodes on `(a, b)` graded towards `b` (`toward_b`) or `a`.
fn graded(g: &Gauss, a: f64, b: f64, toward_b: bool, panels: usize) -> Vec<(f64, f64)> {
    if toward_b {
        g.graded(a, b, panels)
    } else {
        g.graded(b, a, panels).into_iter().map(|(x, w)| (x, -w)).collect()
    }
}

/// A `c` interval of one time half with the terms active on it.
#[derive(Clone, Copy, Debug)]
struct Piece {
    sign: f64,
    lo: f64,
    hi: f64,
    toward_hi: bool,
    kernel: bool,
    taylor: bool,
}

/// Pieces of the sphere `|(y, s)| = rho` on which `s < t` (kernel active)
/// and/or `s < 0` (Taylor terms active).
fn pieces(rho: f64, t: f64, out: &mut Vec<Piece>) {
    out.clear();
    let r2 = rho * rho;
    if t >= 0.0 {
        out.push(Piece { sign: -1.0, lo: 0.0, hi: 1.0, toward_hi: true, kernel: true, taylor: true });
        if t > 0.0 {
            if r2 <= t {
                out.push(Piece { sign: 1.0, lo: 0.0, hi: 1.0, toward_hi: true, kernel: true, taylor: false });
            } else {
                let cf = (1.0 - t / r2).sqrt();
                out.push(Piece { sign: 1.0, lo: cf, hi: 1.0, toward_hi: false, kernel: true, taylor: false });
            }
        }
    } else if r2 > -t {
        let cs = (1.0 + t / r2).sqrt();
        out.push(Piece { sign: -1.0, lo: 0.0, hi: cs, toward_hi: true, kernel: true, taylor: true });
        out.push(Piece { sign: -1.0, lo: cs, hi: 1.0, toward_hi: true, kernel: false, taylor: true });
    } else {
        out.push(Piece { sign: -1.0, lo: 0.0, hi: 1.0, toward_hi: true, kernel: false, taylor: true });
    }
}

/// Radial node sets: dyadic panels between `lo` and `hi`, extra breaks at
/// `rho_t = sqrt|t|` (with `rho = rho_t + (b - rho_t) v^2` on `[rho_t, 2 rho_t]`
/// to absorb the square-root edge of `c*` on
/// panels close to it) and at the bump window.
/// Returns `(rho, weight, dense)`.
fn radial_nodes(
    lo: f64,
    hi: f64,
    t: f64,
    window: Option<(f64, f64)>,
    normal: &Gauss,
    dense: &Gauss,
) -> Vec<(f64, f64, bool)> {
    if !(hi > lo) {
        return Vec::new();
    }
    let mut breaks = vec![lo, hi];
    let mut r = hi;
    while r * 0.5 > lo {
        r *= 0.5;
        breaks.push(r);
    }
    // the cutoff is flat (not analytic) at both ends of (1/2, 1)
    for k in 2..=6 {
        let h = 0.5f64.powi(k);
        for b in [0.5 + h, 1.0 - h] {
            if b > lo && b < hi {
                breaks.push(b);
            }
        }
    }
    let rho_t = t.abs().sqrt();
    for b in [rho_t, 2.0 * rho_t] {
        if b > lo && b < hi {
            breaks.push(b);
        }
    }
    if let Some((a, b)) = window {
        // graded towards the evaluation radius: for time-like offsets the
        // bump edge sits at |rho - rho0| ~ eps^2 / rho0
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut vs = vec![m];
        for k in 0..=5 {
            let d = h * 0.5f64.powi(k);
            vs.extend([m - d, m + d]);
        }
        for v in vs {
            if v > lo && v < hi {
                breaks.push(v);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * hi);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let is_dense = window.is_some_and(|(p, q)| a < q && b > p);
        let g = if is_dense { dense } else { normal };
        // panels just above rho_t see the square-root edge of c*
        let off = a - rho_t;
        if rho_t > 0.0 && off >= -1e-14 * hi && off < 2.0 * (b - a) {
            let (ua, ub) = (off.max(0.0).sqrt(), (b - rho_t).sqrt());
            for (u, wu) in g.on(ua, ub) {
                out.push((rho_t + u * u, 2.0 * u * wu, is_dense));
            }
        } else {
            out.extend(g.on(a, b).map(|(x, wx)| (x, wx, is_dense)));
        }
    }
    out
}

struct LocalNode {
    dy: [f64; 3],
    ds: f64,
    /// Jacobian, quadrature weight and bump factor.
    weight: f64,
    /// Kernel values at `(-dy, -ds)`: `n^2` (standard) or `n^3` (divergence).
    kernel: Vec<f64>,
}

struct FarSlice {
    /// `(y, s, weight * density)` for kernel-active nodes.
    nodes: Vec<([f64; 3], f64, Vec<f64>)>,
    /// Taylor moments over the far region on the same nodes.
    taylor: Vec<f64>,
}

/// Volume potential solver for one forcing, route and truncation degree.
pub struct VolumePotential {
    forcing: Forcing,
    route: Route,
    d: u32,
    n: usize,
    scheme: PotentialScheme,
    base: u32,
    /// Homogeneity degree of the integrated density.
    exponent: f64,
    taylor_specs: Vec<MultiIndexSpec>,
    /// Jet term indices for each Taylor spec (one, or one per `i` for the
    /// divergence route).
    taylor_terms: Vec<Vec<usize>>,
    local: Vec<LocalNode>,
    moments: Mutex<BTreeMap<i32, Arc<Vec<f64>>>>,
    far: Mutex<HashMap<(u64, i32), Arc<FarSlice>>>,
}

/// `x^mu t^l / (mu! l!)`.
fn taylor_monomial(spec: &MultiIndexSpec, x: &[f64], t: f64) -> f64 {
    spec.mu.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>() * t.powi(spec.l as i32) / spec.factorial_weight()
}

impl VolumePotential {
    pub fn new(forcing: Forcing, route: Route, d: u32, scheme: PotentialScheme) -> Result<Self, ConstructError> {
        let n = forcing.n;
        if !(2..=3).contains(&n) {
            return Err(ConstructError::InvalidSpec(format!("dimension {n}")));
        }
        if route == Route::Divergence && forcing.form() != ForcingForm::Divergence && !forcing.is_zero() {
            return Err(ConstructError::InvalidSpec("divergence route needs a divergence-form forcing".into()));
        }
        let base = if route == Route::Divergence { 1 } else { 0 };
        let jet = StokesJet::new(n, d + base);
        let taylor_specs = MultiIndexSpec::up_to_order(n, d);
        let taylor_terms = taylor_specs
            .iter()
            .map(|s| match route {
                Route::Standard => vec![jet.term_index(s).expect("term in jet")],
                Route::Divergence => (0..n)
                    .map(|i| {
                        let mut mu = s.mu.clone();
                        mu[i] += 1;
                        jet.term_index(&MultiIndexSpec::new(mu, s.l)).expect("term in jet")
                    })
                    .collect(),
            })
            .collect();
        let exponent = match (route, forcing.form()) {
            (Route::Standard, ForcingForm::Divergence) => forcing.exponent - 1.0,
            _ => forcing.exponent,
        };
        let mut me = Self {
            exponent,
            forcing,
            route,
            d,
            n,
            scheme,
            base,
            taylor_specs,
            taylor_terms,
            local: Vec::new(),
            moments: Mutex::new(BTreeMap::new()),
            far: Mutex::new(HashMap::new()),
        };
        me.local = me.build_local()?;
        Ok(me)
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> &PotentialScheme {
        &self.scheme
    }

    fn density_len(&self) -> usize {
        match self.route {
            Route::Standard => self.n,
            Route::Divergence => self.n * self.n,
        }
    }

    fn density(&self, y: &[f64], s: f64, out: &mut [f64]) -> Result<(), ConstructError> {
        match self.route {
            Route::Standard => self.forcing.standard(y, s, out),
            Route::Divergence => self.forcing.tensor(y, s, out),
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(ConstructError::NonFinite { y: y.to_vec(), s });
        }
        Ok(())
    }

    /// Contract kernel blocks with a density: `out_k += w * sum K f`.
    fn contract(&self, blocks: &[&[f64]], dens: &[f64], w: f64, out: &mut [f64]) {
        let n = self.n;
        match self.route {
            Route::Standard => {
                let b = blocks[0];
                for k in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += dens[j] * b[j * n + k];
                    }
                    out[k] += w * acc;
                }
            }
            Route::Divergence => {
                for k in 0..n {
                    let mut acc = 0.0;
                    for (i, b) in blocks.iter().enumerate() {
                        for j in 0..n {
                            acc += dens[i * n + j] * b[j * n + k];
                        }
                    }
                    out[k] += w * acc;
                }
            }
        }
    }

    /// `out_k += w * sum K f` with the kernel laid out as in [`PointKernel`].
    #[inline]
    fn contract_flat(&self, kern: &[f64], dens: &[f64], w: f64, out: &mut [f64]) {
        let n = self.n;
        let m = dens.len();
        for k in 0..n {
            let mut acc = 0.0;
            for a in 0..m {
                acc += dens[a] * kern[a * n + k];
            }
            out[k] += w * acc;
        }
    }

    fn kernel_jet(&self) -> PointKernel {
        PointKernel::new(self.n, self.base)
    }

    fn eval_kernel(&self, jet: &mut PointKernel, z: &[f64], tau: f64) -> Result<(), ConstructError> {
        jet.eval(z, tau).map_err(|e| ConstructError::Kernel { at: (z.to_vec(), tau), source: e })
    }

    fn build_local(&self) -> Result<Vec<LocalNode>, ConstructError> {
        let n = self.n;
        let sc = &self.scheme;
        let gr = Gauss::new(sc.local_radial);
        let gc = Gauss::new(sc.local_cosine);
        let sphere = SphereRule::new(n, sc.local_azimuthal);
        let mut jet = self.kernel_jet();
        let mut out = Vec::new();
        let edges = [(0.0, 0.125), (0.125, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)];
        for (a, b) in edges {
            for (rho, wr) in gr.on(a, b) {
                let bump = super::profile::cutoff(rho).0;
                for (c, wc) in graded(&gc, 0.0, 1.0, true, sc.cosine_panels) {
                    let jac = 2.0 * rho.powi(n as i32 + 1) * c.powi(n as i32 - 1) * wr * wc * bump;
                    let ds = -rho * rho * (1.0 - c * c);
                    for (omega, wo) in sphere.points() {
                        let mut dy = [0.0; 3];
                        let mut z = [0.0; 3];
                        for i in 0..n {
                            dy[i] = rho * c * omega[i];
                            z[i] = -dy[i];
                        }
                        self.eval_kernel(&mut jet, &z[..n], -ds)?;
                        let kernel = jet.values().to_vec();
                        out.push(LocalNode { dy, ds, weight: jac * wo, kernel });
                    }
                }
            }
        }
        Ok(out)
    }

    /// `int K phi f` over the local ball of radius `eps` about `(x, t)`.
    fn local_part(&self, x: &[f64], t: f64, eps: f64, out: &mut [f64]) -> Result<(), ConstructError> {
        let n = self.n;
        let scale = eps.powi(2 - self.base as i32);
        let mut dens = vec![0.0; self.density_len()];
        let mut y = [0.0; 3];
        for node in &self.local {
            for i in 0..n {
                y[i] = x[i] + eps * node.dy[i];
            }
            let s = t + eps * eps * node.ds;
            self.density(&y[..n], s, &mut dens)?;
            self.contract_flat(&node.kernel, &dens, node.weight * scale, out);
        }
        Ok(())
    }

    /// `int K (1 - phi) 1(s < t) f` over `lo < |(y, s)| < hi` (origin coordinates).
    fn origin_kernel_part(&self, x: &[f64], t: f64, lo: f64, hi: f64, eps: f64, rho0: f64, out: &mut [f64]) -> Result<(), ConstructError> {
        let n = self.n;
        let sc = &self.scheme;
        let window = (eps > 0.0).then(|| ((rho0 - eps).max(0.0), rho0 + eps));
        let nodes = radial_nodes(lo, hi, t, window, &Gauss::new(sc.radial), &Gauss::new(sc.dense_radial));
        let (gc, gcd) = (Gauss::new(sc.cosine), Gauss::new(sc.dense_cosine));
        let sph = SphereRule::new(n, sc.azimuthal);
        let sphd = SphereRule::focused(n, x, sc.dense_angular, sc.dense_angular_levels);
        let mut jet = self.kernel_jet();
        let mut dens = vec![0.0; self.density_len()];
        let mut pcs = Vec::new();
        let mut y = [0.0; 3];
        let mut z = [0.0; 3];
        for (rho, wr, dense) in nodes {
            pieces(rho, t, &mut pcs);
            let (g, sphere, panels) = if dense { (&gcd, &sphd, sc.dense_cosine_panels) } else { (&gc, &sph, sc.cosine_panels) };
            for p in pcs.iter().filter(|p| p.kernel) {
                for (c, wc) in graded(g, p.lo, p.hi, p.toward_hi, panels) {
                    let jac = 2.0 * rho.powi(n as i32 + 1) * c.powi(n as i32 - 1) * wr * wc;
                    let s = p.sign * rho * rho * (1.0 - c * c);
                    let tau = t - s;
                    if tau <= 0.0 {
                        continue;
                    }
                    for (omega, wo) in sphere.points() {
                        let mut d2 = 0.0;
                        for i in 0..n {
                            y[i] = rho * c * omega[i];
                            z[i] = x[i] - y[i];
                            d2 += z[i] * z[i];
                        }
                        let cut = if eps > 0.0 { 1.0 - super::profile::cutoff((d2 + tau).sqrt() / eps).0 } else { 1.0 };
                        if cut == 0.0 {
                            continue;
                        }
                        self.density(&y[..n], s, &mut dens)?;
                        if dens.iter().all(|&v| v == 0.0) {
                            continue;
                        }
                        self.eval_kernel(&mut jet, &z[..n], tau)?;
                        self.contract_flat(jet.values(), &dens, jac * wo * cut, out);
                    }
                }
            }
        }
        Ok(())
    }

    /// Add the Taylor-moment contributions of one node to `acc` (`spec x n`).
    fn add_taylor(&self, jet: &mut StokesJet, y: &[f64], s: f64, dens: &[f64], w: f64, acc: &mut [f64]) -> Result<(), ConstructError> {
        let n = self.n;
        let z: Vec<f64> = y.iter().map(|v| -v).collect();
        jet.eval(&z, -s).map_err(|e| ConstructError::Kernel { at: (z.clone(), -s), source: e })?;
        for (a, terms) in self.taylor_terms.iter().enumerate() {
            let blocks: Vec<&[f64]> = terms.iter().map(|&k| jet.block(k)).collect();
            self.contract(&blocks, dens, w, &mut acc[a * n..(a + 1) * n]);
        }
        Ok(())
    }

    /// Taylor moments `int_{|(y,s)| < R} D^mu D^l K(-y, -s) f(y, s)` for every
    /// `|mu| + 2l <= d`, flattened as `spec x component`. Dyadic panels reach
    /// `R 2^-depth`; the rest is summed as a geometric tail from the
    /// homogeneity of the integrand.
    pub fn moments(&self, radius: f64) -> Result<Arc<Vec<f64>>, ConstructError> {
        let key = radius.log2().round() as i32;
        if let Some(m) = self.moments.lock().expect("moment cache").get(&key) {
            return Ok(m.clone());
        }
        let r = 2f64.powi(key);
        let n = self.n;
        let sc = &self.scheme;
        let len = self.taylor_specs.len() * n;
        let mut total = vec![0.0; len];
        let mut last = vec![0.0; len];
        let gr = Gauss::new(sc.radial);
        let gc = Gauss::new(sc.cosine);
        let sphere = SphereRule::new(n, sc.azimuthal);
        let mut jet = StokesJet::new(n, self.d + self.base);
        let mut dens = vec![0.0; self.density_len()];
        let mut y = [0.0; 3];
        let cnodes = graded(&gc, 0.0, 1.0, true, sc.cosine_panels);
        if !self.forcing.is_zero() {
            for k in 0..sc.moment_depth {
                let hi = r * 0.5f64.powi(k as i32);
                let lo = 0.5 * hi;
                let mut panel = vec![0.0; len];
                for (rho, wr, _) in radial_nodes(lo, hi, 0.0, None, &gr, &gr) {
                    for &(c, wc) in &cnodes {
                        let jac = 2.0 * rho.powi(n as i32 + 1) * c.powi(n as i32 - 1) * wr * wc;
                        let s = -rho * rho * (1.0 - c * c);
                        for (omega, wo) in sphere.points() {
                            for i in 0..n {
                                y[i] = rho * c * omega[i];
                            }
                            self.density(&y[..n], s, &mut dens)?;
                            if dens.iter().all(|&v| v == 0.0) {
                                continue;
                            }
                            self.add_taylor(&mut jet, &y[..n], s, &dens, jac * wo, &mut panel)?;
                        }
                    }
                }
                total.iter_mut().zip(&panel).for_each(|(a, b)| *a += b);
                last = panel;
            }
            for (a, spec) in self.taylor_specs.iter().enumerate() {
                let e = self.exponent + 2.0 - spec.order() as f64 - self.base as f64;
                let ratio = 0.5f64.powf(e);
                for k in 0..n {
                    total[a * n + k] += last[a * n + k] * ratio / (1.0 - ratio);
                }
            }
        }
        let m = Arc::new(total);
        self.moments.lock().expect("moment cache").insert(key, m.clone());
        Ok(m)
    }

    /// The polynomial correction `v = sum_m int K^m f` as a polynomial in `(x, t)`.
    pub fn polynomial_correction(&self) -> Result<SpaceTimePolynomial, ConstructError> {
        let m = self.moments(1.0)?;
        let data: Vec<(MultiIndexSpec, Vec<f64>)> = self
            .taylor_specs
            .iter()
            .enumerate()
            .map(|(a, s)| (s.clone(), m[a * self.n..(a + 1) * self.n].to_vec()))
            .collect();
        Ok(SpaceTimePolynomial::from_taylor(self.n, self.n, &data))
    }

    fn far_slice(&self, t: f64, r1: f64) -> Result<Arc<FarSlice>, ConstructError> {
        let key = (t.to_bits(), r1.log2().round() as i32);
        if let Some(f) = self.far.lock().expect("far cache").get(&key) {
            return Ok(f.clone());
        }
        let n = self.n;
        let sc = &self.scheme;
        let len = self.taylor_specs.len() * n;
        let mut taylor = vec![0.0; len];
        let mut nodes = Vec::new();
        let g = Gauss::new(sc.radial);
        let gc = Gauss::new(sc.cosine);
        let sphere = SphereRule::new(n, sc.azimuthal);
        let mut jet = StokesJet::new(n, self.d + self.base);
        let mut dens = vec![0.0; self.density_len()];
        let mut pcs = Vec::new();
        let mut y = [0.0; 3];
        if !self.forcing.is_zero() {
            for (rho, wr, _) in radial_nodes(r1, 1.0, t, None, &g, &g) {
                pieces(rho, t, &mut pcs);
                for p in &pcs {
                    for (c, wc) in graded(&gc, p.lo, p.hi, p.toward_hi, sc.far_cosine_panels) {
                        let jac = 2.0 * rho.powi(n as i32 + 1) * c.powi(n as i32 - 1) * wr * wc;
                        let s = p.sign * rho * rho * (1.0 - c * c);
                        for (omega, wo) in sphere.points() {
                            for i in 0..n {
                                y[i] = rho * c * omega[i];
                            }
                            self.density(&y[..n], s, &mut dens)?;
                            if dens.iter().all(|&v| v == 0.0) {
                                continue;
                            }
                            let w = jac * wo;
                            if p.taylor && s < 0.0 {
                                self.add_taylor(&mut jet, &y[..n], s, &dens, w, &mut taylor)?;
                            }
                            if p.kernel && s < t {
                                nodes.push((y, s, dens.iter().map(|v| v * w).collect()));
                            }
                        }
                    }
                }
            }
        }
        let slice = Arc::new(FarSlice { nodes, taylor });
        let mut cache = self.far.lock().expect("far cache");
        if cache.len() >= 16 {
            cache.clear();
        }
        cache.insert(key, slice.clone());
        Ok(slice)
    }

    /// `w(x, t) = int K(x - y, t - s) f(y, s)`.
    pub fn volume_potential(&self, x: &[f64], t: f64) -> Result<Vec<f64>, ConstructError> {
        let n = self.n;
        let mut out = vec![0.0; n];
        if self.forcing.is_zero() {
            return Ok(out);
        }
        let rho0 = crate::point::parabolic_norm(x, t);
        let eps = if rho0 > 0.0 { 0.5 * rho0.min(0.5) } else { 0.25 };
        self.local_part(x, t, eps, &mut out)?;
        let lo = if rho0 > 0.0 { (rho0 * 0.5f64.powi(self.scheme.floor_exponent as i32)).min(0.5 * eps) } else { 0.5 * eps };
        self.origin_kernel_part(x, t, lo, 1.0, eps, rho0, &mut out)?;
        Ok(out)
    }

    /// `u(x, t) = w(x, t) - v(x, t)`, evaluated without forming `w` and `v`
    /// separately near the origin.
    pub fn corrected(&self, x: &[f64], t: f64) -> Result<Vec<f64>, ConstructError> {
        let n = self.n;
        let mut out = vec![0.0; n];
        let rho0 = crate::point::parabolic_norm(x, t);
        if rho0 == 0.0 || self.forcing.is_zero() {
            return Ok(out);
        }
        if rho0 >= 0.25 {
            let w = self.volume_potential(x, t)?;
            let v = self.polynomial_correction()?;
            return Ok(w.iter().zip(v.eval_vec(x, t)).map(|(a, b)| a - b).collect());
        }
        let eps = 0.5 * rho0;
        let r1 = 2f64.powi((2.0 * rho0).log2().ceil() as i32).min(1.0);
        self.local_part(x, t, eps, &mut out)?;
        let lo = rho0 * 0.5f64.powi(self.scheme.floor_exponent as i32);
        self.origin_kernel_part(x, t, lo, r1, eps, rho0, &mut out)?;
        let near = self.moments(r1)?;
        let far = self.far_slice(t, r1)?;
        for (a, spec) in self.taylor_specs.iter().enumerate() {
            let m = taylor_monomial(spec, x, t);
            for k in 0..n {
                out[k] -= m * (near[a * n + k] + far.taylor[a * n + k]);
            }
        }
        let mut jet = self.kernel_jet();
        let mut z = [0.0; 3];
        for (y, s, wd) in &far.nodes {
            for i in 0..n {
                z[i] = x[i] - y[i];
            }
            self.eval_kernel(&mut jet, &z[..n], t - s)?;
            self.contract_flat(jet.values(), wd, 1.0, &mut out);
        }
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) fn pieces_for_test(rho: f64, t: f64) -> Vec<(f64, f64, f64, bool, bool)> {
    let mut v = Vec::new();
    pieces(rho, t, &mut v);
    v.into_iter().map(|p| (p.sign, p.lo, p.hi, p.kernel, p.taylor)).collect()
}

impl From<KernelError> for ConstructError {
    fn from(e: KernelError) -> Self {
        ConstructError::Kernel { at: (Vec::new(), f64::NAN), source: e }
    }
}
