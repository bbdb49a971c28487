//! Spectral operators on periodic grids: Riesz transforms, Leray projection,
//! pressure recovery and an FFT sampler for the Stokes tensor.
//!
//! The box is `[-L, L)^n` with `N` points per axis, so the wave numbers are
//! `xi = pi k / L`. Odd symbols use the wave vector with its Nyquist entries
//! set to zero, and every operator uses that same vector. This keeps the
//! discrete identities exact, e.g. `sum_j R_j R_j = -I` on mean-free fields
//! and `f = leray(f) + grad p`. Modes whose modified wave vector vanishes
//! (the mean and pure-Nyquist modes) are sent to zero by the Riesz
//! transforms and the inverse Laplacian; the Leray projector keeps them,
//! since constants are solenoidal.

use crate::grid::{GridError, GridField, Provenance, SpatialGrid, TimeGrid};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RieszError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("the kernel oracle needs t > 0 (got {0})")]
    NonPositiveTime(f64),
}

/// Real field values on the periodic box, `components` scalars per node,
/// stored component-major and row-major in space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub n: usize,
    pub extent: f64,
    pub points_per_axis: usize,
    pub components: usize,
    pub values: Vec<f64>,
}

impl SpectralGrid {
    pub fn zeros(n: usize, extent: f64, points_per_axis: usize, components: usize) -> Result<Self, RieszError> {
        if !(1..=3).contains(&n) || points_per_axis < 2 || points_per_axis % 2 != 0 || !(extent > 0.0) {
            return Err(RieszError::Shape(format!("n = {n}, N = {points_per_axis}, L = {extent}")));
        }
        let len = points_per_axis.pow(n as u32) * components;
        Ok(Self { n, extent, points_per_axis, components, values: vec![0.0; len] })
    }

    /// Sample `f(x, out)` at every node.
    pub fn from_fn(
        n: usize,
        extent: f64,
        points_per_axis: usize,
        components: usize,
        mut f: impl FnMut(&[f64], &mut [f64]),
    ) -> Result<Self, RieszError> {
        let mut g = Self::zeros(n, extent, points_per_axis, components)?;
        let space = g.space();
        let mut buf = vec![0.0; components];
        for p in 0..g.len() {
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(&space.point(p), &mut buf);
            for c in 0..components {
                g.values[c * space.len() + p] = buf[c];
            }
        }
        Ok(g)
    }

    /// One time slice of a grid field.
    pub fn from_grid_field(field: &GridField, time: usize) -> Result<Self, RieszError> {
        let s = &field.header.space;
        if s.points % 2 != 0 || time >= field.header.time.count {
            return Err(RieszError::Shape("odd grid or time index out of range".into()));
        }
        let mut values = Vec::with_capacity(field.components() * s.len());
        for c in 0..field.components() {
            values.extend_from_slice(field.slice(c, time));
        }
        Ok(Self { n: s.n, extent: s.extent, points_per_axis: s.points, components: field.components(), values })
    }

    /// Wrap as a single-time [`GridField`].
    pub fn to_grid_field(&self, t: f64, provenance: Provenance) -> Result<GridField, GridError> {
        let space = self.space();
        Ok(GridField { header: crate::grid::GridHeader {
            components: self.components,
            space,
            time: TimeGrid::single(t),
            divergence_free: false,
            provenance,
        }, values: self.values.clone() })
    }

    pub fn space(&self) -> SpatialGrid {
        SpatialGrid { n: self.n, extent: self.extent, points: self.points_per_axis }
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points_per_axis as f64
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.values[c * self.len()..(c + 1) * self.len()]
    }

    fn from_components(like: &SpectralGrid, comps: Vec<Vec<f64>>) -> Self {
        Self {
            n: like.n,
            extent: like.extent,
            points_per_axis: like.points_per_axis,
            components: comps.len(),
            values: comps.concat(),
        }
    }

    /// Largest absolute value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Discrete L2 norm (with the cell volume).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.spacing().powi(self.n as i32)).sqrt()
    }
}

/// Planned n-dimensional FFT on a cubic grid.
pub struct FftNd {
    n: usize,
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftNd {
    pub fn new(n: usize, points: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, points, forward: planner.plan_fft_forward(points), inverse: planner.plan_fft_inverse(points) }
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.points;
        let total = m.pow(self.n as u32);
        assert_eq!(data.len(), total);
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.n {
            let stride = m.pow((self.n - 1 - axis) as u32);
            for base in 0..total {
                if (base / stride) % m != 0 {
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform including the `1 / N^n` normalisation.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Wave data for each spectral node: the Nyquist-zeroed wave vector, its
/// squared length, and the integer mode numbers.
struct Waves {
    xi: Vec<[f64; 3]>,
    full: Vec<[f64; 3]>,
    modes: Vec<[i64; 3]>,
}

impl Waves {
    fn new(g: &SpectralGrid) -> Self {
        let m = g.points_per_axis;
        let k_of = |i: usize| if i < m / 2 { i as i64 } else { i as i64 - m as i64 };
        let space = g.space();
        let mut xi = Vec::with_capacity(g.len());
        let mut modes = Vec::with_capacity(g.len());
        let mut full = Vec::with_capacity(g.len());
        for p in 0..g.len() {
            let idx = space.unflatten(p);
            let mut w = [0.0; 3];
            let mut f = [0.0; 3];
            let mut k3 = [0i64; 3];
            for a in 0..g.n {
                k3[a] = k_of(idx[a]);
                f[a] = std::f64::consts::PI * k3[a] as f64 / g.extent;
                if idx[a] != m / 2 {
                    w[a] = f[a];
                }
            }
            xi.push(w);
            full.push(f);
            modes.push(k3);
        }
        Self { xi, full, modes }
    }
}

fn norm2(w: &[f64; 3]) -> f64 {
    w[0] * w[0] + w[1] * w[1] + w[2] * w[2]
}

/// Applies a matrix-valued symbol `S(xi)` (output component `o`, input `i`)
/// to a field.
fn apply_symbol(
    g: &SpectralGrid,
    outputs: usize,
    symbol: impl Fn(&[f64; 3], usize, usize) -> Complex64,
) -> SpectralGrid {
    let fft = FftNd::new(g.n, g.points_per_axis);
    let waves = Waves::new(g);
    let hats: Vec<Vec<Complex64>> = (0..g.components)
        .map(|c| {
            let mut d: Vec<Complex64> = g.component(c).iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.forward(&mut d);
            d
        })
        .collect();
    let comps = (0..outputs)
        .map(|o| {
            let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
            for (p, w) in waves.xi.iter().enumerate() {
                for (i, h) in hats.iter().enumerate() {
                    out[p] += symbol(w, o, i) * h[p];
                }
            }
            fft.inverse(&mut out);
            out.into_iter().map(|v| v.re).collect()
        })
        .collect();
    SpectralGrid::from_components(g, comps)
}

fn require(g: &SpectralGrid, components: usize) -> Result<(), RieszError> {
    if g.components != components {
        return Err(RieszError::Shape(format!("expected {components} components, got {}", g.components)));
    }
    Ok(())
}

/// `R_j g` with symbol `xi_j / (i |xi|)`.
pub fn riesz_transform(j: usize, field: &SpectralGrid) -> Result<SpectralGrid, RieszError> {
    require(field, 1)?;
    if j >= field.n {
        return Err(RieszError::Shape(format!("axis {j} out of range")));
    }
    Ok(apply_symbol(field, 1, |w, _, _| {
        let r = norm2(w).sqrt();
        if r == 0.0 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, -w[j] / r) }
    }))
}

/// Leray projection `(delta_jk - xi_j xi_k / |xi|^2) f_k`.
pub fn leray_project(field: &SpectralGrid) -> Result<SpectralGrid, RieszError> {
    require(field, field.n)?;
    Ok(apply_symbol(field, field.n, |w, o, i| {
        let r2 = norm2(w);
        let delta = if o == i { 1.0 } else { 0.0 };
        let p = if r2 == 0.0 { 0.0 } else { w[o] * w[i] / r2 };
        Complex64::new(delta - p, 0.0)
    }))
}

/// `p = Delta^{-1} div f`, i.e. `p_hat = xi . f_hat / (i |xi|^2)`.
pub fn pressure_from_forcing(f: &SpectralGrid) -> Result<SpectralGrid, RieszError> {
    require(f, f.n)?;
    Ok(apply_symbol(f, 1, |w, _, i| {
        let r2 = norm2(w);
        if r2 == 0.0 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, -w[i] / r2) }
    }))
}

/// Spectral partial derivative along `axis` of every component.
pub fn derivative(axis: usize, field: &SpectralGrid) -> SpectralGrid {
    apply_symbol(field, field.components, |w, o, i| {
        if o == i { Complex64::new(0.0, w[axis]) } else { Complex64::new(0.0, 0.0) }
    })
}

/// Gradient of a scalar field.
pub fn gradient(field: &SpectralGrid) -> Result<SpectralGrid, RieszError> {
    require(field, 1)?;
    Ok(apply_symbol(field, field.n, |w, o, _| Complex64::new(0.0, w[o])))
}

/// Divergence of a vector field.
pub fn divergence(field: &SpectralGrid) -> Result<SpectralGrid, RieszError> {
    require(field, field.n)?;
    Ok(apply_symbol(field, 1, |w, _, i| Complex64::new(0.0, w[i])))
}

/// Laplacian of every component (symbol `-|xi|^2`).
pub fn laplacian(field: &SpectralGrid) -> SpectralGrid {
    apply_symbol(field, field.components, |w, o, i| {
        if o == i { Complex64::new(-norm2(w), 0.0) } else { Complex64::new(0.0, 0.0) }
    })
}

/// FFT sampling of `K_jk(., t)` on the grid nodes.
#[derive(Clone, Debug)]
pub struct KernelOracle {
    pub grid: SpectralGrid,
    /// Set when the box is too small for the periodic images to be negligible.
    pub warning: Option<String>,
}

/// Sample `K_jk(x, t)` by inverse FFT of `(delta_jk - xi_j xi_k / |xi|^2) e^{-|xi|^2 t}`.
///
/// The symbol is even, so the full wave vector is used here (the Nyquist
/// content is negligible once `e^{-|xi|^2 t}` has decayed). The zero mode carries the angular average `delta_jk (1 - 1/n)` so the
/// lattice of periodic images has the same mean as the whole-space kernel.
/// `query_diameter` is the size of the region where the samples will be
/// used; a warning is attached when `L < 8 (sqrt t + query_diameter)`.
pub fn spectral_stokes_kernel_oracle(
    j: usize,
    k: usize,
    t: f64,
    n: usize,
    extent: f64,
    points_per_axis: usize,
    query_diameter: f64,
) -> Result<KernelOracle, RieszError> {
    if !(t > 0.0) {
        return Err(RieszError::NonPositiveTime(t));
    }
    if !(2..=3).contains(&n) || j >= n || k >= n {
        return Err(RieszError::Shape(format!("component ({j}, {k}) in dimension {n}")));
    }
    let mut grid = SpectralGrid::zeros(n, extent, points_per_axis, 1)?;
    let warning = (extent < 8.0 * (t.sqrt() + query_diameter)).then(|| {
        let msg = format!("periodic box L = {extent} is below 8 (sqrt t + diameter) = {}", 8.0 * (t.sqrt() + query_diameter));
        log::warn!("{msg}");
        msg
    });
    let waves = Waves::new(&grid);
    let delta = if j == k { 1.0 } else { 0.0 };
    let mut data: Vec<Complex64> = waves
        .full
        .iter()
        .zip(&waves.modes)
        .map(|(w, m)| {
            let r2 = norm2(w);
            let sym = if r2 == 0.0 {
                if m.iter().all(|&v| v == 0) { delta * (1.0 - 1.0 / n as f64) } else { 0.0 }
            } else {
                (delta - w[j] * w[k] / r2) * (-r2 * t).exp()
            };
            // Phase for grid origin at -L: e^{-i xi L} = (-1)^{k_1 + ... + k_n}.
            let parity = m.iter().take(n).sum::<i64>().rem_euclid(2);
            Complex64::new(if parity == 0 { sym } else { -sym }, 0.0)
        })
        .collect();
    let fft = FftNd::new(n, points_per_axis);
    fft.inverse(&mut data);
    let scale = (points_per_axis as f64 / (2.0 * extent)).powi(n as i32);
    grid.values = data.into_iter().map(|v| v.re * scale).collect();
    Ok(KernelOracle { grid, warning })
}

#[cfg(test)]
mod tests;
