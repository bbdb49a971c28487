//! Manufactured forcings, the volume potential and the corrected solution.

pub mod forcing;
pub mod potential;
pub mod profile;

pub use forcing::{make_forcing, measured_constants, Forcing, ForcingForm, ForcingKind, ForcingSpec, ManufacturedField, ProfileSpec};
pub use potential::{PotentialScheme, Route, VolumePotential};

use crate::grid::{GridError, GridField, Provenance, SpatialGrid, TimeGrid};
use crate::kernels::KernelError;
use crate::quadrature::QuadratureError;
use crate::riesz::{self, RieszError, SpectralGrid};
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum ConstructError {
    #[error("invalid forcing spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("kernel failed at z = {:?}, tau = {}: {source}", at.0, at.1)]
    Kernel { at: (Vec<f64>, f64), source: KernelError },
    #[error("non-finite density at y = {y:?}, s = {s}")]
    NonFinite { y: Vec<f64>, s: f64 },
    #[error("evaluation at x = {x:?}, t = {t} failed: {source}")]
    AtPoint { x: Vec<f64>, t: f64, source: Box<ConstructError> },
    #[error("grid too coarse: {0}")]
    Resolution(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Riesz(#[from] RieszError),
}

fn at_point(x: &[f64], t: f64) -> impl FnOnce(ConstructError) -> ConstructError + '_ {
    move |e| ConstructError::AtPoint { x: x.to_vec(), t, source: Box::new(e) }
}

/// `w` at a list of points.
pub fn volume_potential(p: &VolumePotential, points: &[(Vec<f64>, f64)]) -> Result<Vec<Vec<f64>>, ConstructError> {
    points.par_iter().map(|(x, t)| p.volume_potential(x, *t).map_err(at_point(x, *t))).collect()
}

/// `u = w - v` at a list of points.
pub fn corrected_values(p: &VolumePotential, points: &[(Vec<f64>, f64)]) -> Result<Vec<Vec<f64>>, ConstructError> {
    points.par_iter().map(|(x, t)| p.corrected(x, *t).map_err(at_point(x, *t))).collect()
}

/// `u` and the pressure `p = Delta^{-1} div f` sampled on a grid. The box
/// must contain the unit ball so that the periodic pressure solve sees the
/// whole support of `f`.
pub fn corrected_solution(
    p: &VolumePotential,
    space: SpatialGrid,
    time: TimeGrid,
    provenance: Provenance,
) -> Result<(GridField, GridField), ConstructError> {
    let n = p.dim();
    let mut u = GridField::zeros(n, space.clone(), time.clone(), provenance.clone());
    for k in 0..time.count {
        let t = time.time(k);
        let vals: Vec<Vec<f64>> = (0..space.len())
            .into_par_iter()
            .map(|q| {
                let x = space.point(q);
                p.corrected(&x, t).map_err(at_point(&x, t))
            })
            .collect::<Result<_, _>>()?;
        for (q, v) in vals.iter().enumerate() {
            for c in 0..n {
                let i = u.index(c, k, q);
                u.values[i] = v[c];
            }
        }
    }
    u.header.divergence_free = true;
    let pressure = pressure_field(p.forcing(), space, time, provenance)?;
    Ok((u, pressure))
}

/// `p = Delta^{-1} div f` for the analytic forcing, slice by slice. For
/// divergence forms `f` is itself obtained spectrally from `g`, so that
/// symmetric cancellations in `d_k d_j g_jk` are exact.
pub fn pressure_field(f: &Forcing, space: SpatialGrid, time: TimeGrid, provenance: Provenance) -> Result<GridField, ConstructError> {
    if space.extent <= 1.0 {
        return Err(ConstructError::Resolution(format!("box half-width {} does not contain the support", space.extent)));
    }
    let standard = match f.form() {
        ForcingForm::Standard => f.sample(space.clone(), time.clone(), provenance.clone()),
        ForcingForm::Divergence => divergence_form_forcing_to_standard(&f.sample_tensor(space.clone(), time.clone(), provenance.clone()))?,
    };
    let mut out = GridField::zeros(1, space, time.clone(), provenance);
    for k in 0..time.count {
        let g = SpectralGrid::from_grid_field(&standard, k)?;
        let pr = riesz::pressure_from_forcing(&g)?;
        out.slice_mut(0, k).copy_from_slice(pr.component(0));
    }
    Ok(out)
}

/// `f_k = d_j g_jk` for a gridded `g` (`n * n` components, row-major),
/// differentiated spectrally slice by slice.
pub fn divergence_form_forcing_to_standard(g: &GridField) -> Result<GridField, ConstructError> {
    let n = g.dim();
    if g.components() != n * n {
        return Err(ConstructError::InvalidSpec(format!("expected {} tensor components, got {}", n * n, g.components())));
    }
    let per_diameter = 2.0 / g.header.space.spacing();
    if per_diameter < 16.0 {
        return Err(ConstructError::Resolution(format!("{per_diameter:.1} points per support diameter (< 16)")));
    }
    let mut out = GridField::zeros(n, g.header.space.clone(), g.header.time.clone(), g.header.provenance.clone());
    for k in 0..g.header.time.count {
        let slice = SpectralGrid::from_grid_field(g, k)?;
        let len = slice.len();
        for kc in 0..n {
            let mut acc = vec![0.0; len];
            for j in 0..n {
                let comp = SpectralGrid {
                    n,
                    extent: slice.extent,
                    points_per_axis: slice.points_per_axis,
                    components: 1,
                    values: slice.component(j * n + kc).to_vec(),
                };
                let d = riesz::derivative(j, &comp);
                acc.iter_mut().zip(d.component(0)).for_each(|(a, b)| *a += b);
            }
            out.slice_mut(kc, k).copy_from_slice(&acc);
        }
    }
    Ok(out)
}
