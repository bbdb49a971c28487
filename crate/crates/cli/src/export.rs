use anyhow::{bail, Context};
use clap::Args;
use parastokes::expansion::VectorPolynomial;
use parastokes::verify::read_bundle_shells;
use std::path::{Path, PathBuf};

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Report bundle written by `run`.
    #[arg(long)]
    bundle: PathBuf,
    /// Output directory (default: the bundle itself).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn join_index(mu: &[u32]) -> String {
    mu.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// `shells.csv`: `field,shell_index,inner_radius,outer_radius,sup_value`;
/// `polynomial.csv`: `field,t,component,multi_index,value` with field `u` or `p`.
pub fn execute(args: &ExportArgs) -> anyhow::Result<bool> {
    let dir = &args.bundle;
    if !dir.join("summary.json").is_file() || !dir.join("polynomial.json").is_file() {
        bail!("{} is not a report bundle (summary.json / polynomial.json missing)", dir.display());
    }
    let out = args.out.clone().unwrap_or_else(|| dir.clone());
    std::fs::create_dir_all(&out)?;

    let shells = read_bundle_shells(dir)?;
    let mut w = csv::Writer::from_path(out.join("shells.csv"))?;
    w.write_record(["field", "shell_index", "inner_radius", "outer_radius", "sup_value"])?;
    for (field, rows) in &shells {
        for r in rows {
            w.write_record([field.clone(), r.shell_index.to_string(), r.inner_radius.to_string(), r.outer_radius.to_string(), r.sup_value.to_string()])?;
        }
    }
    w.flush()?;

    let text = std::fs::read_to_string(dir.join("polynomial.json"))?;
    let poly = VectorPolynomial::from_json(&text).with_context(|| format!("parsing {}", dir.join("polynomial.json").display()))?;
    write_polynomial(&out.join("polynomial.csv"), &poly)?;
    println!("wrote {} and {}", out.join("shells.csv").display(), out.join("polynomial.csv").display());
    Ok(true)
}

fn write_polynomial(path: &Path, poly: &VectorPolynomial) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["field", "t", "component", "multi_index", "value"])?;
    for r in poly.rows() {
        w.write_record(["u".to_string(), r.t.to_string(), r.component.to_string(), join_index(&r.multi_index), r.value.to_string()])?;
    }
    for s in poly.pressure.iter().flatten() {
        for p in &s.components {
            for (spec, v) in &p.terms {
                w.write_record(["p".to_string(), s.t.to_string(), "0".into(), join_index(&spec.mu), v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
