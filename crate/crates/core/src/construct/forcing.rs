//! Forcing specifications, built-in analytic profiles and calibration.

use super::profile::{rot, ScalarProfile};
use super::ConstructError;
use crate::grid::{GridField, Provenance, SpatialGrid, TimeGrid};
use crate::quadrature::{lq_norms_vec, CylinderScheme, DyadicShellDecomposition, ParabolicCylinder, ShellHalf, ShellSampler};
use serde::{Deserialize, Serialize};

/// Standard forcing `f` or divergence form `f_k = d_j g_jk`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForcingForm {
    #[default]
    Standard,
    Divergence,
}

/// Built-in analytic families. Stream profiles give solenoidal forcings
/// `f = rot psi` with `psi = rho^{d-1+alpha} chi(rho) W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `W = 1`.
    Swirl,
    /// `W = 1 + amplitude sin(k . y + omega s)`.
    Oscillatory { wave: Vec<f64>, omega: f64, amplitude: f64 },
    /// `f = grad phi` (not solenoidal; the pressure absorbs it).
    Gradient,
    /// Divergence form `g_jk = delta_jk phi`.
    Diagonal,
    /// Divergence form `g_12 = phi = -g_21`.
    Antisymmetric,
    /// `f = 0`.
    Zero,
}

impl ProfileSpec {
    pub fn form(&self) -> ForcingForm {
        match self {
            ProfileSpec::Diagonal | ProfileSpec::Antisymmetric => ForcingForm::Divergence,
            _ => ForcingForm::Standard,
        }
    }
}

fn default_support() -> f64 {
    1.0
}

/// Parameters of a manufactured forcing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub n: usize,
    pub d: u32,
    pub alpha: f64,
    pub gamma: f64,
    pub q: f64,
    #[serde(default)]
    pub form: ForcingForm,
    pub profile: ProfileSpec,
    #[serde(default = "default_support")]
    pub support_radius: f64,
}

impl ForcingSpec {
    pub fn validate(&self) -> Result<(), ConstructError> {
        let bad = |m: String| Err(ConstructError::InvalidSpec(m));
        if !(2..=3).contains(&self.n) {
            return bad(format!("n = {} (supported: 2, 3)", self.n));
        }
        if self.d < 2 {
            return bad(format!("d = {} (need d >= 2)", self.d));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} (need 0 < alpha < 1)", self.alpha));
        }
        if !(self.gamma > 0.0) {
            return bad(format!("gamma = {} (need gamma > 0)", self.gamma));
        }
        if !(self.q > 1.0 + self.n as f64 / 2.0) {
            return bad(format!("q = {} (need q > 1 + n/2 = {})", self.q, 1.0 + self.n as f64 / 2.0));
        }
        if self.support_radius != 1.0 {
            return bad(format!("support_radius = {} (fixed at 1)", self.support_radius));
        }
        if self.form != self.profile.form() && self.profile != ProfileSpec::Zero {
            return bad(format!("profile {:?} is not of {:?} form", self.profile, self.form));
        }
        if let ProfileSpec::Oscillatory { wave, .. } = &self.profile {
            if wave.len() != self.n {
                return bad(format!("wave vector has {} entries, n = {}", wave.len(), self.n));
            }
        }
        Ok(())
    }

    /// Exponent `d - 2 + alpha + (n + 2) / q` of the Lq decay hypothesis.
    pub fn lq_exponent(&self) -> f64 {
        self.d as f64 - 2.0 + self.alpha + (self.n as f64 + 2.0) / self.q
    }
}

/// `u_m = amplitude * rot psi_m` with `psi_m` from a [`ScalarProfile`]; a
/// smooth solenoidal field used to manufacture nonlinear forcings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedField {
    pub n: usize,
    pub amplitude: f64,
    pub profile: ScalarProfile,
}

impl ManufacturedField {
    /// Field vanishing to order `order` at the origin: `psi = rho^order chi y_1 W`
    /// with an even wave factor, so `u_m` is even in `y`.
    pub fn odd_stream(n: usize, amplitude: f64, order: f64, wave: Vec<f64>, wave_amplitude: f64) -> Self {
        let profile = ScalarProfile { power: order, wave, omega: 0.0, wave_amplitude, even_wave: true, odd_factor: true };
        Self { n, amplitude, profile }
    }

    /// Vanishing order of `u_m` at the origin.
    pub fn order(&self) -> f64 {
        self.profile.homogeneity() - 1.0
    }

    /// Value and Jacobian `jac[k][i] = d_i u_k`.
    pub fn eval(&self, y: &[f64], s: f64) -> ([f64; 3], [[f64; 3]; 3]) {
        let (mut v, mut jac) = rot(&self.profile.eval(y, s), self.n);
        v.iter_mut().for_each(|a| *a *= self.amplitude);
        jac.iter_mut().flatten().for_each(|a| *a *= self.amplitude);
        (v, jac)
    }
}

/// A concrete forcing with its calibrated amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingKind {
    Zero,
    /// `f = amp * rot psi`.
    Stream { amp: f64, psi: ScalarProfile },
    /// `f = amp * grad phi`.
    Gradient { amp: f64, phi: ScalarProfile },
    /// `g = amp * phi * I`.
    Diagonal { amp: f64, phi: ScalarProfile },
    /// `g_12 = amp * phi = -g_21`.
    Antisymmetric { amp: f64, phi: ScalarProfile },
    /// `f = -(a . grad) u_m + extra`.
    Advection { a: Vec<f64>, field: ManufacturedField, extra: Option<Box<ForcingKind>> },
    /// `g = -u_m (x) u_m`.
    Convective { field: ManufacturedField },
}

/// Forcing ready for the volume potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forcing {
    pub n: usize,
    pub kind: ForcingKind,
    /// Degree of homogeneity of the density at the origin (of `f` for the
    /// standard form, of `g` for the divergence form).
    pub exponent: f64,
}

impl Forcing {
    pub fn form(&self) -> ForcingForm {
        match self.kind {
            ForcingKind::Diagonal { .. } | ForcingKind::Antisymmetric { .. } | ForcingKind::Convective { .. } => ForcingForm::Divergence,
            _ => ForcingForm::Standard,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self { n, kind: ForcingKind::Zero, exponent: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ForcingKind::Zero)
    }

    /// `f` (for divergence forms, the analytic `f_k = d_j g_jk`).
    pub fn standard(&self, y: &[f64], s: f64, out: &mut [f64]) {
        standard_of(&self.kind, self.n, y, s, out);
    }

    /// `g` row-major (`out[i * n + j] = g_ij`); zero for standard forms.
    pub fn tensor(&self, y: &[f64], s: f64, out: &mut [f64]) {
        let n = self.n;
        out.iter_mut().for_each(|v| *v = 0.0);
        match &self.kind {
            ForcingKind::Diagonal { amp, phi } => {
                let p = amp * phi.eval(y, s).v;
                for i in 0..n {
                    out[i * n + i] = p;
                }
            }
            ForcingKind::Antisymmetric { amp, phi } => {
                let p = amp * phi.eval(y, s).v;
                out[1] = p;
                out[n] = -p;
            }
            ForcingKind::Convective { field } => {
                let (u, _) = field.eval(y, s);
                for i in 0..n {
                    for j in 0..n {
                        out[i * n + j] = -u[i] * u[j];
                    }
                }
            }
            _ => {}
        }
    }

    /// Scale every amplitude by `k` (for the linearity checks).
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        scale_kind(&mut out.kind, k);
        out
    }

    /// Sample `f` on a grid (`n` components).
    pub fn sample(&self, space: SpatialGrid, time: TimeGrid, provenance: Provenance) -> GridField {
        GridField::from_fn(self.n, space, time, provenance, |x, t, out| self.standard(x, t, out))
    }

    /// Sample `g` on a grid (`n * n` components, row-major).
    pub fn sample_tensor(&self, space: SpatialGrid, time: TimeGrid, provenance: Provenance) -> GridField {
        GridField::from_fn(self.n * self.n, space, time, provenance, |x, t, out| self.tensor(x, t, out))
    }
}

fn scale_kind(kind: &mut ForcingKind, k: f64) {
    match kind {
        ForcingKind::Zero => {}
        ForcingKind::Stream { amp, .. }
        | ForcingKind::Gradient { amp, .. }
        | ForcingKind::Diagonal { amp, .. }
        | ForcingKind::Antisymmetric { amp, .. } => *amp *= k,
        ForcingKind::Advection { field, extra, .. } => {
            field.amplitude *= k;
            if let Some(e) = extra {
                scale_kind(e, k);
            }
        }
        // g is quadratic in u_m
        ForcingKind::Convective { field } => field.amplitude *= k.sqrt(),
    }
}

fn standard_of(kind: &ForcingKind, n: usize, y: &[f64], s: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    match kind {
        ForcingKind::Zero => {}
        ForcingKind::Stream { amp, psi } => {
            let (v, _) = rot(&psi.eval(y, s), n);
            for k in 0..n {
                out[k] = amp * v[k];
            }
        }
        ForcingKind::Gradient { amp, phi } | ForcingKind::Diagonal { amp, phi } => {
            let j = phi.eval(y, s);
            for k in 0..n {
                out[k] = amp * j.g[k];
            }
        }
        ForcingKind::Antisymmetric { amp, phi } => {
            // f_1 = d_2 g_21 = -d_2 phi, f_2 = d_1 g_12 = d_1 phi
            let j = phi.eval(y, s);
            out[0] = -amp * j.g[1];
            out[1] = amp * j.g[0];
        }
        ForcingKind::Advection { a, field, extra } => {
            if let Some(e) = extra {
                standard_of(e, n, y, s, out);
            }
            let (_, jac) = field.eval(y, s);
            for k in 0..n {
                out[k] -= (0..n).map(|i| a[i] * jac[k][i]).sum::<f64>();
            }
        }
        ForcingKind::Convective { field } => {
            // f_k = -d_j (u_j u_k) = -u_j d_j u_k for solenoidal u
            let (u, jac) = field.eval(y, s);
            for k in 0..n {
                out[k] = -(0..n).map(|j| u[j] * jac[k][j]).sum::<f64>();
            }
        }
    }
}

fn unit_kind(spec: &ForcingSpec) -> ForcingKind {
    let p = spec.d as f64 - 1.0 + spec.alpha;
    let radial = ScalarProfile::radial(p);
    match &spec.profile {
        ProfileSpec::Swirl => ForcingKind::Stream { amp: 1.0, psi: radial },
        ProfileSpec::Oscillatory { wave, omega, amplitude } => ForcingKind::Stream {
            amp: 1.0,
            psi: ScalarProfile { wave: wave.clone(), omega: *omega, wave_amplitude: *amplitude, ..radial },
        },
        ProfileSpec::Gradient => ForcingKind::Gradient { amp: 1.0, phi: radial },
        ProfileSpec::Diagonal => ForcingKind::Diagonal { amp: 1.0, phi: radial },
        ProfileSpec::Antisymmetric => ForcingKind::Antisymmetric { amp: 1.0, phi: radial },
        ProfileSpec::Zero => ForcingKind::Zero,
    }
}

/// Radii `2^-k`, `k = 0..=5`, at which the decay hypothesis is measured.
pub const CALIBRATION_RADII: [f64; 6] = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125];

/// Measured decay constants for each calibration radius: for standard
/// forms `max_j ||f_j||_{L^q(Q_r)} / r^{d-2+alpha+(n+2)/q}`, for divergence
/// forms `sup |g_jk| / |(y,s)|^{d-1+alpha}` over the shell `r/2 < |(y,s)| < r`.
pub fn measured_constants(forcing: &Forcing, spec: &ForcingSpec) -> Result<Vec<f64>, ConstructError> {
    let n = spec.n;
    match forcing.form() {
        ForcingForm::Standard => CALIBRATION_RADII
            .iter()
            .map(|&r| {
                let cyl = ParabolicCylinder::centered(n, r)?;
                let norms = lq_norms_vec(&cyl, &CylinderScheme::default(), spec.q, n, |y, s, out| forcing.standard(y, s, out))?;
                Ok(norms.into_iter().fold(0.0, f64::max) / r.powf(spec.lq_exponent()))
            })
            .collect(),
        ForcingForm::Divergence => {
            let e = spec.d as f64 - 1.0 + spec.alpha;
            let sampler = ShellSampler::new(n, 4096, ShellHalf::Full, 0);
            let shells = DyadicShellDecomposition::with_outer_radii(1.0, CALIBRATION_RADII.len());
            let mut buf = vec![0.0; n * n];
            let mut out = Vec::new();
            for (a, b) in shells.shells().into_iter().rev() {
                let mut sup = 0.0f64;
                for (y, s) in sampler.points(a, b) {
                    forcing.tensor(&y, s, &mut buf);
                    let rho = crate::point::parabolic_norm(&y, s);
                    sup = sup.max(buf.iter().fold(0.0f64, |m, v| m.max(v.abs())) / rho.powf(e));
                }
                out.push(sup);
            }
            Ok(out)
        }
    }
}

/// Build the forcing of `spec` with its amplitude calibrated so that the
/// largest measured decay constant equals `gamma`.
pub fn make_forcing(spec: &ForcingSpec) -> Result<Forcing, ConstructError> {
    spec.validate()?;
    let kind = unit_kind(spec);
    let exponent = match spec.form {
        ForcingForm::Standard => spec.d as f64 - 2.0 + spec.alpha,
        ForcingForm::Divergence => spec.d as f64 - 1.0 + spec.alpha,
    };
    let unit = Forcing { n: spec.n, kind, exponent };
    if unit.is_zero() {
        return Ok(unit);
    }
    let consts = measured_constants(&unit, spec)?;
    let top = consts.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(ConstructError::InvalidSpec("profile has zero norm".into()));
    }
    Ok(unit.scaled(spec.gamma / top))
}
