//! Scenario runners and report bundles.

use super::config::{Scenario, ScenarioConfig};
use super::{fit_decay, sample_shells, DecayReport, VerifyError};
use crate::construct::{corrected_values, make_forcing, Forcing, ForcingForm, ForcingKind, ManufacturedField, PotentialScheme, Route, VolumePotential};
use crate::expansion::{caloric_background, extract_space_time, residual_structure, with_pressure, ExponentModel, ExtractionOptions, VectorPolynomial};
use crate::point::SpaceTimePoint;
use crate::poly::SpaceTimePolynomial;
use crate::quadrature::{read_shell_csv, write_shell_csv, ShellHalf, ShellSampler, ShellSup};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

/// One checked claim with its measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub measured: Option<f64>,
    /// `">="` or `"<="`.
    pub relation: String,
    pub threshold: f64,
    #[serde(default)]
    pub detail: String,
}

impl Assertion {
    fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed: measured <= threshold, measured: Some(measured), relation: "<=".into(), threshold, detail: String::new() }
    }

    /// Decay assertion; a field that is zero to the noise floor passes.
    fn decay(name: &str, report: &DecayReport, exponent: f64, tol: f64) -> Self {
        let mut a = Self {
            name: name.into(),
            passed: report.decays_at_least(exponent, tol),
            measured: report.slope,
            relation: ">=".into(),
            threshold: exponent - tol,
            detail: String::new(),
        };
        if report.identically_zero() {
            a.detail = "identically zero to the noise floor".into();
        }
        a
    }

    fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

/// Deterministic part of a report (written as `summary.json`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: Scenario,
    pub seed: u64,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    /// Fitted slope per shell table.
    pub slopes: BTreeMap<String, Option<f64>>,
    pub evaluations: usize,
    pub config: ScenarioConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    pub summary: Summary,
    pub decay: BTreeMap<String, DecayReport>,
    pub polynomial: VectorPolynomial,
    pub elapsed_seconds: f64,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.summary.assertions.iter().find(|a| a.name == name)
    }

    /// Failed assertions as `name: measured relation threshold` lines.
    pub fn failures(&self) -> Vec<String> {
        self.summary
            .assertions
            .iter()
            .filter(|a| !a.passed)
            .map(|a| format!("{}: {} {} {}", a.name, a.measured.map_or("n/a".into(), |m| format!("{m:.6e}")), a.relation, a.threshold))
            .collect()
    }
}

/// Everything accumulated while a scenario runs.
struct Run<'a> {
    cfg: &'a ScenarioConfig,
    assertions: Vec<Assertion>,
    decay: BTreeMap<String, DecayReport>,
    evaluations: usize,
    started: Instant,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Self {
        Self { cfg, assertions: Vec::new(), decay: BTreeMap::new(), evaluations: 0, started: Instant::now() }
    }

    fn sampler(&self, n: usize, offset: u64) -> ShellSampler {
        ShellSampler::new(n, self.cfg.shells.samples, ShellHalf::Past, self.cfg.seed.wrapping_add(offset))
    }

    /// Shell decay of `|F|` (max over entries) for an analytic field.
    fn analytic_decay<F>(&mut self, name: &str, n: usize, f: F) -> Result<DecayReport, VerifyError>
    where
        F: Fn(&[f64], f64) -> f64 + Sync,
    {
        let sampler = self.sampler(n, 11);
        let shells = sample_shells(&SpaceTimePoint::origin(n), &self.cfg.shells.radii, &sampler, |pts| -> Result<Vec<f64>, String> {
            Ok(pts.par_iter().map(|(y, s)| f(y, *s)).collect())
        })?;
        let r = fit_decay(shells)?;
        self.decay.insert(name.into(), r.clone());
        Ok(r)
    }

    fn finish(self, polynomial: VectorPolynomial) -> ScenarioReport {
        let passed = !self.assertions.is_empty() && self.assertions.iter().all(|a| a.passed);
        let slopes = self.decay.iter().map(|(k, v)| (k.clone(), v.slope)).collect();
        ScenarioReport {
            summary: Summary {
                scenario: self.cfg.scenario,
                seed: self.cfg.seed,
                passed,
                assertions: self.assertions,
                slopes,
                evaluations: self.evaluations,
                config: self.cfg.clone(),
            },
            decay: self.decay,
            polynomial,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
        }
    }

    /// The common linear pipeline: `u = corrected(f) + B`, extraction of `P`,
    /// shell decay of `u` and `u - P`, residual structure of `P`.
    fn linear_pipeline(&mut self, potential: &VolumePotential, background: &SpaceTimePolynomial, exponent: f64, model: ExponentModel) -> Result<VectorPolynomial, VerifyError> {
        let cfg = self.cfg;
        let n = potential.dim();
        let d = potential.degree();
        let tol = &cfg.tolerances;
        let opts = ExtractionOptions {
            radii: cfg.extraction.radii_for(d),
            samples: cfg.extraction.samples,
            model,
            constrained: cfg.extraction.constrained,
            max_condition: 1e8,
            inner_fraction: 0.1,
            seed: cfg.seed,
        };
        // u is sampled once; the fits of u and of u + B share the samples
        let mut raw: Vec<Vec<Vec<f64>>> = Vec::new();
        let plain = extract_space_time(
            n,
            d,
            |pts| -> Result<Vec<Vec<f64>>, VerifyError> {
                let v = corrected_values(potential, pts)?;
                raw.push(v.clone());
                Ok(v)
            },
            &opts,
        )?;
        self.evaluations += plain.evaluations;
        let mut batches = raw.into_iter();
        let total = extract_space_time(
            n,
            d,
            |pts| -> Result<Vec<Vec<f64>>, String> {
                let v = batches.next().ok_or("sample batches exhausted")?;
                Ok(v.into_iter().zip(pts).map(|(u, (x, t))| u.iter().zip(background.eval_vec(x, *t)).map(|(a, b)| a + b).collect()).collect())
            },
            &opts,
        )?;
        let p = total.polynomial.clone();
        let recovery = p.add(&background.scale(-1.0)).max_abs_coefficient();
        let name = if background.max_abs_coefficient() > 0.0 { "extraction recovers background" } else { "extracted polynomial vanishes" };
        self.assertions.push(Assertion::at_most(name, recovery, tol.recovery).with_detail(format!("fit condition {:.3e}", total.condition)));
        let superposition = p.add(&plain.polynomial.scale(-1.0)).add(&background.scale(-1.0)).max_abs_coefficient();
        self.assertions.push(Assertion::at_most("superposition P(u+B) - P(u) = B", superposition, 1e-8 * (1.0 + background.max_abs_coefficient())));

        // shells of u and of the remainder u + B - P
        let sampler = self.sampler(n, 1);
        let mut u_rows = Vec::new();
        let mut rem_rows = Vec::new();
        for (i, (a, b)) in super::shells_for(&cfg.shells.radii).into_iter().enumerate() {
            let pts = sampler.points(a, b);
            let vals = corrected_values(potential, &pts)?;
            self.evaluations += pts.len();
            let mut su = 0.0f64;
            let mut sr = 0.0f64;
            for (v, (x, t)) in vals.iter().zip(&pts) {
                let bv = background.eval_vec(x, *t);
                let pv = p.eval_vec(x, *t);
                for k in 0..n {
                    su = su.max(v[k].abs());
                    sr = sr.max((v[k] + bv[k] - pv[k]).abs());
                }
            }
            u_rows.push(ShellSup { shell_index: i + 1, inner_radius: a, outer_radius: b, sup_value: su });
            rem_rows.push(ShellSup { shell_index: i + 1, inner_radius: a, outer_radius: b, sup_value: sr });
        }
        let u_decay = fit_decay(u_rows)?;
        let rem_decay = fit_decay(rem_rows)?;
        self.assertions.push(Assertion::decay("decay of u", &u_decay, exponent, tol.slope));
        self.assertions.push(Assertion::decay("decay of u - P", &rem_decay, exponent, tol.slope));
        self.decay.insert("u".into(), u_decay.clone());
        self.decay.insert("remainder".into(), rem_decay);

        if let Some(k) = cfg.linearity_factor {
            let scaled = VolumePotential::new(potential.forcing().scaled(k), potential.route(), d, potential.scheme().clone())?;
            let mut worst = 0.0f64;
            for (i, (a, b)) in super::shells_for(&cfg.shells.radii).into_iter().enumerate() {
                let pts = sampler.points(a, b);
                let vals = corrected_values(&scaled, &pts)?;
                self.evaluations += pts.len();
                let sup = vals.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                let base = u_decay.shells[i].sup_value;
                if base > super::NOISE_FLOOR {
                    worst = worst.max((sup / base - k).abs() / k);
                }
            }
            self.assertions.push(Assertion::at_most("linearity in gamma", worst, tol.linearity).with_detail(format!("factor {k}")));
        }

        let sliced = with_pressure(&VectorPolynomial::from_space_time(&p, d, &cfg.slices))?;
        let structure = residual_structure(&sliced)?;
        self.assertions.push(Assertion::at_most("residual structure: low-degree mass", structure.low_degree_ratio, tol.residual_low));
        self.assertions.push(Assertion::at_most("divergence of P", structure.divergence, tol.divergence));
        Ok(sliced)
    }
}

fn scheme(cfg: &ScenarioConfig) -> PotentialScheme {
    cfg.scheme.clone().unwrap_or_default()
}

fn background(cfg: &ScenarioConfig, n: usize, d: u32) -> SpaceTimePolynomial {
    match &cfg.background {
        Some(b) => caloric_background(n, d, &b.coefficients),
        None => SpaceTimePolynomial::zero(n, n),
    }
}

fn empty_polynomial(n: usize, d: u32, cfg: &ScenarioConfig) -> VectorPolynomial {
    VectorPolynomial::zero(n, d, &cfg.slices)
}

fn check_common(cfg: &ScenarioConfig) -> Result<(), VerifyError> {
    if cfg.slices.len() < 3 {
        return Err(VerifyError::Config(format!("{} slices (need >= 3)", cfg.slices.len())));
    }
    if cfg.shells.radii.len() < 4 || cfg.shells.samples == 0 {
        return Err(VerifyError::Config("need >= 4 shell radii and a positive sample count".into()));
    }
    if cfg.extraction.radii.as_ref().is_some_and(|r| r.len() < 2) {
        return Err(VerifyError::Config("need >= 2 extraction radii".into()));
    }
    Ok(())
}

/// Run the scenario named in the config.
pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioReport, VerifyError> {
    match cfg.scenario {
        Scenario::Theorem1 => run_theorem1(cfg),
        Scenario::Theorem2 => run_theorem2(cfg),
        Scenario::NavierStokes => run_navier_stokes(cfg),
        Scenario::Oseen => run_oseen(cfg),
    }
}

fn theorem(cfg: &ScenarioConfig, default_route: Route) -> Result<ScenarioReport, VerifyError> {
    check_common(cfg)?;
    let spec = cfg.forcing.as_ref().ok_or_else(|| VerifyError::Config("missing `forcing`".into()))?;
    let forcing = make_forcing(spec).map_err(|e| VerifyError::Config(e.to_string()))?;
    let route = cfg.route.unwrap_or(default_route);
    if cfg.scenario == Scenario::Theorem2 && spec.form != ForcingForm::Divergence && !forcing.is_zero() {
        return Err(VerifyError::Config("theorem2 needs a divergence-form forcing".into()));
    }
    let (n, d, alpha) = (spec.n, spec.d, spec.alpha);
    let mut run = Run::new(cfg);
    let potential = VolumePotential::new(forcing.clone(), route, d, scheme(cfg)).map_err(|e| VerifyError::Config(e.to_string()))?;
    if let Some(cc) = &cfg.cross_check {
        cross_check(&mut run, &forcing, d, cc.points, cc.scheme.clone().unwrap_or_else(|| scheme(cfg).scaled(3.0)))?;
    }
    let bg = background(cfg, n, d);
    let model = ExponentModel::vanishing(d, alpha, cfg.extraction.fractional_terms);
    let p = run.linear_pipeline(&potential, &bg, d as f64 + alpha, model)?;
    Ok(run.finish(p))
}

/// Standard forcing `f` with the decay hypothesis.
pub fn run_theorem1(cfg: &ScenarioConfig) -> Result<ScenarioReport, VerifyError> {
    theorem(cfg, Route::Standard)
}

/// Divergence-form forcing `f = div g`, integrated against `grad K`.
pub fn run_theorem2(cfg: &ScenarioConfig) -> Result<ScenarioReport, VerifyError> {
    theorem(cfg, Route::Divergence)
}

/// Field-wise comparison of the two routes for a divergence-form forcing.
fn cross_check(run: &mut Run, forcing: &Forcing, d: u32, points: usize, scheme: PotentialScheme) -> Result<(), VerifyError> {
    if forcing.form() != ForcingForm::Divergence {
        return Err(VerifyError::Config("cross_check needs a divergence-form forcing".into()));
    }
    let n = forcing.n;
    let pts = ShellSampler::new(n, points, ShellHalf::Past, run.cfg.seed.wrapping_add(29)).points(0.1, 0.9);
    let div = VolumePotential::new(forcing.clone(), Route::Divergence, d, scheme.clone())?;
    let std = VolumePotential::new(forcing.clone(), Route::Standard, d, scheme)?;
    let a = corrected_values(&div, &pts)?;
    let b = corrected_values(&std, &pts)?;
    run.evaluations += 2 * pts.len();
    let scale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().flatten().zip(b.iter().flatten()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let rel = if scale > 0.0 { diff / scale } else { diff };
    run.assertions.push(Assertion::at_most("routes agree field-wise", rel, run.cfg.tolerances.route_agreement).with_detail(format!("{points} points, max |u| {scale:.3e}")));
    Ok(())
}

fn manufactured(cfg: &ScenarioConfig, n: usize) -> Result<ManufacturedField, VerifyError> {
    let m = cfg.manufactured.as_ref().ok_or_else(|| VerifyError::Config("missing `manufactured`".into()))?;
    if !(m.order > 0.0) || !m.amplitude.is_finite() {
        return Err(VerifyError::Config(format!("manufactured order {} / amplitude {}", m.order, m.amplitude)));
    }
    if !m.wave.is_empty() && m.wave.len() != n {
        return Err(VerifyError::Config(format!("wave vector has {} entries, n = {n}", m.wave.len())));
    }
    Ok(ManufacturedField::odd_stream(n, m.amplitude, m.order, m.wave.clone(), m.wave_amplitude))
}

fn dimension(cfg: &ScenarioConfig) -> usize {
    cfg.forcing.as_ref().map(|f| f.n).or_else(|| cfg.advection.as_ref().map(|a| a.len())).or_else(|| cfg.manufactured.as_ref().filter(|m| m.wave.len() == 3).map(|_| 3)).unwrap_or(2)
}

/// Stokes with `f = -div(u_m (x) u_m)` for a manufactured `u_m`; asserts
/// the remainder exponent `d + 1`.
pub fn run_navier_stokes(cfg: &ScenarioConfig) -> Result<ScenarioReport, VerifyError> {
    check_common(cfg)?;
    let d = cfg.degree.ok_or_else(|| VerifyError::Config("missing `degree`".into()))?;
    if d < 2 {
        return Err(VerifyError::Config(format!("degree {d} (need >= 2)")));
    }
    let n = dimension(cfg);
    let field = manufactured(cfg, n)?;
    let tol = cfg.tolerances.clone();
    let mut run = Run::new(cfg);
    let um = run.analytic_decay("manufactured_u", n, |y, s| field.eval(y, s).0[..n].iter().fold(0.0f64, |m, v| m.max(v.abs())))?;
    run.assertions.push(Assertion::decay("hypothesis: vanishing order", &um, d as f64, tol.hypothesis));
    let uu = run.analytic_decay("u_tensor_u", n, |y, s| {
        let u = field.eval(y, s).0;
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max((u[i] * u[j]).abs()))
    })?;
    run.assertions.push(Assertion::decay("hypothesis: order of u (x) u", &uu, 2.0 * d as f64, tol.hypothesis));
    if run.assertions.iter().any(|a| !a.passed) {
        return Ok(run.finish(empty_polynomial(n, d, cfg)));
    }
    let forcing = if um.identically_zero() {
        Forcing::zero(n)
    } else {
        Forcing { n, kind: ForcingKind::Convective { field: field.clone() }, exponent: 2.0 * field.order() }
    };
    let route = cfg.route.unwrap_or(Route::Divergence);
    let potential = VolumePotential::new(forcing, route, d, scheme(cfg))?;
    let bg = background(cfg, n, d);
    let model = ExponentModel { leading: 2.0 * field.order() + 1.0, fractional_terms: cfg.extraction.fractional_terms, smooth_from: d + 1 };
    let p = run.linear_pipeline(&potential, &bg, d as f64 + 1.0, model)?;
    Ok(run.finish(p))
}

/// Stokes with `f = -(a . grad) u_m` (plus an optional extra forcing);
/// asserts the remainder exponent `d + alpha`.
pub fn run_oseen(cfg: &ScenarioConfig) -> Result<ScenarioReport, VerifyError> {
    check_common(cfg)?;
    let extra = cfg.forcing.as_ref().map(|s| make_forcing(s).map_err(|e| VerifyError::Config(e.to_string()))).transpose()?;
    if extra.as_ref().is_some_and(|f| f.form() != ForcingForm::Standard) {
        return Err(VerifyError::Config("oseen takes a standard-form extra forcing".into()));
    }
    let d = cfg.degree.or(cfg.forcing.as_ref().map(|f| f.d)).ok_or_else(|| VerifyError::Config("missing `degree`".into()))?;
    let alpha = cfg.alpha.or(cfg.forcing.as_ref().map(|f| f.alpha)).ok_or_else(|| VerifyError::Config("missing `alpha`".into()))?;
    if !(alpha > 0.0 && alpha < 1.0) || d < 2 {
        return Err(VerifyError::Config(format!("d = {d}, alpha = {alpha}")));
    }
    let n = dimension(cfg);
    let a = cfg.advection.clone().unwrap_or_else(|| vec![0.0; n]);
    if a.len() != n || a.iter().any(|v| !v.is_finite()) {
        return Err(VerifyError::Config(format!("advection {a:?} for n = {n}")));
    }
    let field = manufactured(cfg, n)?;
    let tol = cfg.tolerances.clone();
    let mut run = Run::new(cfg);
    let um = run.analytic_decay("manufactured_u", n, |y, s| field.eval(y, s).0[..n].iter().fold(0.0f64, |m, v| m.max(v.abs())))?;
    run.assertions.push(Assertion::decay("hypothesis: vanishing order", &um, d as f64, tol.hypothesis));
    let adv = run.analytic_decay("advection_term", n, |y, s| {
        let jac = field.eval(y, s).1;
        (0..n).fold(0.0f64, |m, k| m.max((0..n).map(|i| a[i] * jac[k][i]).sum::<f64>().abs()))
    })?;
    run.assertions.push(Assertion::decay("hypothesis: order of (a . grad) u", &adv, d as f64 - 1.0, tol.hypothesis));
    if run.assertions.iter().any(|a| !a.passed) {
        return Ok(run.finish(empty_polynomial(n, d, cfg)));
    }
    let moving = a.iter().any(|&v| v != 0.0);
    let mut exponent = f64::INFINITY;
    if moving {
        exponent = field.order() - 1.0;
    }
    if let Some(e) = &extra {
        exponent = exponent.min(e.exponent);
    }
    let forcing = if !moving && extra.is_none() {
        Forcing::zero(n)
    } else {
        Forcing { n, kind: ForcingKind::Advection { a, field: field.clone(), extra: extra.map(|e| Box::new(e.kind)) }, exponent }
    };
    let potential = VolumePotential::new(forcing, Route::Standard, d, scheme(cfg))?;
    let bg = background(cfg, n, d);
    let leading = (d as f64 + alpha).min(field.order() + 1.0);
    let model = ExponentModel { leading, fractional_terms: cfg.extraction.fractional_terms, smooth_from: d + 1 };
    let p = run.linear_pipeline(&potential, &bg, d as f64 + alpha, model)?;
    Ok(run.finish(p))
}

/// Write `config.json`, `summary.json`, `polynomial.json`, `shells_<name>.csv`
/// and `metadata.json` (the only file with run-dependent content).
pub fn write_bundle(dir: &Path, report: &ScenarioReport) -> Result<(), VerifyError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.json"), report.summary.config.to_json() + "\n")?;
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&report.summary)? + "\n")?;
    std::fs::write(dir.join("polynomial.json"), report.polynomial.to_json()? + "\n")?;
    for (name, r) in &report.decay {
        write_shell_csv(std::fs::File::create(dir.join(format!("shells_{name}.csv")))?, &r.shells)?;
    }
    let meta = serde_json::json!({
        "elapsed_seconds": report.elapsed_seconds,
        "version": env!("CARGO_PKG_VERSION"),
        "unix_time": std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    });
    std::fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

/// All `shells_<name>.csv` tables of a bundle, by name.
pub fn read_bundle_shells(dir: &Path) -> Result<BTreeMap<String, Vec<ShellSup>>, VerifyError> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if let Some(stem) = name.strip_prefix("shells_").and_then(|s| s.strip_suffix(".csv")) {
            out.insert(stem.to_string(), read_shell_csv(std::fs::File::open(&path)?)?);
        }
    }
    Ok(out)
}
