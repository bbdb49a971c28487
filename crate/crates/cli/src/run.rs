use anyhow::{bail, Context};
use clap::Args;
use parastokes::verify::{run, write_bundle, Scenario, ScenarioConfig, ScenarioReport};
use std::path::{Path, PathBuf};

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    scenario: Scenario,
    /// JSON scenario config; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundle directory (default: `<out-root>/<scenario>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &RunArgs) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ScenarioConfig::from_json(&text).map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?
        }
        None => ScenarioConfig::from_json(&format!(r#"{{"scenario": "{}"}}"#, args.scenario.name())).map_err(anyhow::Error::msg)?,
    };
    if cfg.scenario != args.scenario {
        bail!("config is for scenario {} but --scenario is {}", cfg.scenario.name(), args.scenario.name());
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn print_table(report: &ScenarioReport) {
    eprintln!("{:<42} {:>14} {:>4} {:>12}  status", "assertion", "measured", "", "threshold");
    for a in &report.summary.assertions {
        let measured = a.measured.map_or("-".to_string(), |m| format!("{m:.6e}"));
        eprintln!("{:<42} {:>14} {:>4} {:>12.4e}  {}", a.name, measured, a.relation, a.threshold, if a.passed { "ok" } else { "FAIL" });
    }
}

pub fn execute(args: &RunArgs, out_root: &Path) -> anyhow::Result<bool> {
    let cfg = load(args)?;
    let out = args.out.clone().unwrap_or_else(|| out_root.join(cfg.scenario.name()));
    log::info!("running {} with seed {}", cfg.scenario.name(), cfg.seed);
    let report = run(&cfg)?;
    write_bundle(&out, &report).with_context(|| format!("writing bundle to {}", out.display()))?;
    let passed = report.passed();
    println!("{} {} ({:.1}s, bundle {})", cfg.scenario.name(), if passed { "passed" } else { "FAILED" }, report.elapsed_seconds, out.display());
    if !passed {
        print_table(&report);
    }
    Ok(passed)
}
