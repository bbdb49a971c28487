//! Validation suites for the kernel evaluators: pointwise identities,
//! agreement with the spectral oracle and shell decay of derivatives.

use super::{decay_exponent, DecayReport, VerifyError};
use crate::kernels::{stokes_kernel, stokes_tensor, MultiIndexSpec, StokesJet};
use crate::point::SpaceTimePoint;
use crate::quadrature::{ShellHalf, ShellSampler};
use crate::riesz::spectral_stokes_kernel_oracle;
use serde::{Deserialize, Serialize};

/// Worst heat residual and divergence of `K` over a point set, each relative
/// to `max(1, |d_t K|)` at the point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: usize,
    pub points: usize,
    pub max_heat_residual: f64,
    pub max_divergence: f64,
}

/// `count` quasi-random points of the future half of `{core < |(x, t)| < 1}`.
pub fn identity_points(n: usize, count: usize, core: f64, seed: u64) -> Vec<SpaceTimePoint> {
    ShellSampler::new(n, count, ShellHalf::Future, seed)
        .points(core, 1.0)
        .into_iter()
        .map(|(x, t)| SpaceTimePoint::new(x, t.max(1e-12)))
        .collect()
}

/// `d_t K_jk - Delta K_jk` and `sum_j d_j K_jk` from the derivative jet.
pub fn kernel_identities(n: usize, points: &[SpaceTimePoint]) -> Result<IdentityReport, VerifyError> {
    let mut jet = StokesJet::new(n, 2);
    let idx = |jet: &StokesJet, mu: Vec<u32>, l: u32| jet.term_index(&MultiIndexSpec::new(mu, l)).expect("term in jet");
    let unit = |i: usize, k: u32| {
        let mut mu = vec![0; n];
        mu[i] = k;
        mu
    };
    let lap: Vec<usize> = (0..n).map(|i| idx(&jet, unit(i, 2), 0)).collect();
    let grad: Vec<usize> = (0..n).map(|i| idx(&jet, unit(i, 1), 0)).collect();
    let dt = idx(&jet, vec![0; n], 1);
    let mut report = IdentityReport { n, points: points.len(), max_heat_residual: 0.0, max_divergence: 0.0 };
    for p in points {
        jet.eval(&p.x, p.t).map_err(|e| VerifyError::Evaluation(e.to_string()))?;
        let scale = jet.block(dt).iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for k in 0..n {
            let div: f64 = (0..n).map(|j| jet.block(grad[j])[j * n + k]).sum();
            report.max_divergence = report.max_divergence.max(div.abs() / scale);
            for j in 0..n {
                let l: f64 = lap.iter().map(|&i| jet.block(i)[j * n + k]).sum();
                let r = jet.block(dt)[j * n + k] - l;
                report.max_heat_residual = report.max_heat_residual.max(r.abs() / scale);
            }
        }
    }
    Ok(report)
}

/// Relative sup difference between the direct evaluator and the periodic
/// FFT oracle on the grid nodes of the unit ball at time `t`.
pub fn spectral_agreement(n: usize, t: f64, extent: f64, points_per_axis: usize) -> Result<f64, VerifyError> {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..n {
        for k in j..n {
            let o = spectral_stokes_kernel_oracle(j, k, t, n, extent, points_per_axis, 1.0).map_err(|e| VerifyError::Evaluation(e.to_string()))?;
            let space = o.grid.space();
            for q in 0..space.len() {
                let x = space.point(q);
                if x.iter().map(|v| v * v).sum::<f64>() > 1.0 {
                    continue;
                }
                let direct = stokes_kernel(j, k, &SpaceTimePoint::new(x, t), n).map_err(|e| VerifyError::Evaluation(e.to_string()))?;
                worst = worst.max((direct - o.grid.values[q]).abs());
                scale = scale.max(direct.abs());
            }
        }
    }
    Ok(worst / scale)
}

/// Shell slope of `max_jk |D^mu D_t^l K_jk|` against the expected `-(n + |mu| + 2l)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDecayRow {
    pub mu: Vec<u32>,
    pub l: u32,
    pub expected: f64,
    pub slope: f64,
    pub report: DecayReport,
}

/// Decay slopes for every `(mu, l)` with `|mu| + 2l <= max_order` over the
/// future shells with the given outer radii.
pub fn kernel_decay_sweep(n: usize, max_order: u32, radii: &[f64], samples: usize, seed: u64) -> Result<Vec<KernelDecayRow>, VerifyError> {
    let origin = SpaceTimePoint::origin(n);
    MultiIndexSpec::up_to_order(n, max_order)
        .into_iter()
        .map(|spec| {
            let f = |y: &[f64], s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                stokes_tensor(&spec, &SpaceTimePoint::new(y.to_vec(), s), n).map_or(f64::NAN, |v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            };
            let report = decay_exponent(f, &origin, radii, samples, ShellHalf::Future, seed)?;
            let slope = report.slope.ok_or_else(|| VerifyError::Evaluation(format!("kernel derivative {spec:?} vanished")))?;
            Ok(KernelDecayRow { expected: -(n as f64 + spec.order() as f64), mu: spec.mu, l: spec.l, slope, report })
        })
        .collect()
}

/// Write the sweep as `mu,l,expected,slope,r_squared`.
pub fn write_decay_csv<W: std::io::Write>(w: W, rows: &[KernelDecayRow]) -> Result<(), VerifyError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["mu", "l", "expected", "slope", "r_squared"])?;
    for r in rows {
        let mu = r.mu.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        out.write_record([mu, r.l.to_string(), r.expected.to_string(), r.slope.to_string(), r.report.r_squared.unwrap_or(f64::NAN).to_string()])?;
    }
    out.flush()?;
    Ok(())
}
