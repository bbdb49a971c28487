use anyhow::{bail, Context};
use clap::{Args, Subcommand, ValueEnum};
use parastokes::kernels::stokes_kernel_deriv;
use parastokes::verify::kernel_checks::{identity_points, kernel_decay_sweep, kernel_identities, spectral_agreement, write_decay_csv};
use parastokes::verify::DEFAULT_SEED;
use parastokes::{MultiIndexSpec, SpaceTimePoint};
use std::path::{Path, PathBuf};

/// Pointwise identities must vanish to this level (relative to `|d_t K|`).
const IDENTITY_TOL: f64 = 1e-6;
const SPECTRAL_TOL: f64 = 1e-5;
const SLOPE_TOL: f64 = 0.1;

#[derive(Subcommand, Debug)]
pub enum KernelCommand {
    /// Print `D^mu D_t^l K_jk(x, t)` as JSON.
    Eval(EvalArgs),
    /// Run one validation suite; exits 2 when it fails.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    j: usize,
    #[arg(long)]
    k: usize,
    /// Comma-separated spatial point.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    x: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Spatial derivative multi-index, comma-separated (default: none).
    #[arg(long, value_delimiter = ',')]
    mu: Vec<u32>,
    /// Number of time derivatives.
    #[arg(long, default_value_t = 0)]
    l: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Shell slopes of every derivative with `|mu| + 2l <= 3`.
    Decay,
    /// Heat residual `d_t K - Delta K` and spectral-oracle agreement.
    Heat,
    /// Column divergence `sum_j d_j K_jk`.
    Divergence,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Quasi-random points for the identity suites, samples per shell for decay.
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output directory (default: `<out-root>/kernel`).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn execute(cmd: &KernelCommand, out_root: &Path) -> anyhow::Result<bool> {
    match cmd {
        KernelCommand::Eval(a) => eval(a),
        KernelCommand::Check(a) => check(a, &a.out.clone().unwrap_or_else(|| out_root.join("kernel"))),
    }
}

fn eval(a: &EvalArgs) -> anyhow::Result<bool> {
    if !(a.t > 0.0) {
        bail!("kernel eval needs t > 0 (got {})", a.t);
    }
    if a.x.len() != a.n {
        bail!("--x has {} entries for n = {}", a.x.len(), a.n);
    }
    let mu = if a.mu.is_empty() { vec![0; a.n] } else { a.mu.clone() };
    let spec = MultiIndexSpec::new(mu.clone(), a.l);
    let value = stokes_kernel_deriv(&spec, a.j, a.k, &SpaceTimePoint::new(a.x.clone(), a.t), a.n)?;
    let out = serde_json::json!({ "n": a.n, "j": a.j, "k": a.k, "x": a.x, "t": a.t, "mu": mu, "l": a.l, "value": value });
    println!("{out}");
    Ok(true)
}

fn check(a: &CheckArgs, out: &Path) -> anyhow::Result<bool> {
    if !(2..=3).contains(&a.n) {
        bail!("--n must be 2 or 3");
    }
    if a.points == 0 {
        bail!("--points must be positive");
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match a.suite {
        Suite::Decay => {
            let radii: Vec<f64> = (1..=5).map(|k| 2f64.powi(k)).collect();
            let rows = kernel_decay_sweep(a.n, 3, &radii, a.points, a.seed)?;
            let path = out.join(format!("kernel_decay_n{}.csv", a.n));
            write_decay_csv(std::fs::File::create(&path)?, &rows)?;
            let mut ok = true;
            for r in &rows {
                let pass = (r.slope - r.expected).abs() <= SLOPE_TOL;
                ok &= pass;
                println!("mu={:?} l={} slope={:.4} expected={} {}", r.mu, r.l, r.slope, r.expected, if pass { "ok" } else { "FAIL" });
            }
            println!("wrote {}", path.display());
            Ok(ok)
        }
        Suite::Heat | Suite::Divergence => {
            let pts = identity_points(a.n, a.points, 0.1, a.seed);
            let r = kernel_identities(a.n, &pts)?;
            let mut summary = serde_json::to_value(&r)?;
            let ok = if a.suite == Suite::Heat {
                let (extent, m) = if a.n == 2 { (16.0, 256) } else { (12.0, 160) };
                let spectral = spectral_agreement(a.n, 0.1, extent, m)?;
                summary["spectral_agreement"] = spectral.into();
                println!("max heat residual: {:.3e}", r.max_heat_residual);
                println!("spectral oracle agreement: {spectral:.3e}");
                r.max_heat_residual <= IDENTITY_TOL && spectral <= SPECTRAL_TOL
            } else {
                println!("max divergence residual: {:.3e}", r.max_divergence);
                r.max_divergence <= IDENTITY_TOL
            };
            let name = if a.suite == Suite::Heat { "heat" } else { "divergence" };
            std::fs::write(out.join(format!("kernel_{name}_n{}.json", a.n)), serde_json::to_string_pretty(&summary)? + "\n")?;
            if !ok {
                eprintln!("kernel {name} check failed");
            }
            Ok(ok)
        }
    }
}
