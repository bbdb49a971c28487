use parastokes::expansion::VectorPolynomial;
use parastokes::kernels::stokes_kernel;
use parastokes::verify::{read_bundle_shells, Summary};
use parastokes::SpaceTimePoint;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_parastokes"));
    c.env_remove("PARASTOKES_OUT_ROOT").env_remove("RUST_LOG");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn kernel_eval_matches_library() {
    let o = bin().args(["kernel", "eval", "--j", "0", "--k", "1", "--x", "0.3,-0.2", "--t", "0.5", "--n", "2"]).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let want = stokes_kernel(0, 1, &SpaceTimePoint::new(vec![0.3, -0.2], 0.5), 2).unwrap();
    assert_eq!(v["value"].as_f64().unwrap(), want);
}

#[test]
fn kernel_eval_rejects_nonpositive_time() {
    for t in ["0", "-0.5"] {
        let o = bin().args(["kernel", "eval", "--j", "0", "--k", "0", "--x", "0.1,0.1", "--t", t]).output().unwrap();
        assert_eq!(code(&o), 1);
        assert!(stderr(&o).contains("t > 0"));
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&bin().args(["kernel", "check", "--suite", "nope"]).output().unwrap()), 1);
    assert_eq!(code(&bin().arg("frobnicate").output().unwrap()), 1);
    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);
}

#[test]
fn kernel_divergence_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["kernel", "check", "--suite", "divergence", "--n", "2", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("max divergence residual"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("kernel_divergence_n2.json")).unwrap()).unwrap();
    assert!(json["max_divergence"].as_f64().unwrap() < 1e-6);
}

#[test]
fn kernel_decay_suite_writes_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["kernel", "check", "--suite", "decay", "--points", "32", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut r = csv::Reader::from_path(dir.path().join("kernel_decay_n2.csv")).unwrap();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let expected: f64 = rec[2].parse().unwrap();
        let slope: f64 = rec[3].parse().unwrap();
        assert!((slope - expected).abs() <= 0.1, "{rec:?}");
        rows += 1;
    }
    // (mu, l) with |mu| + 2l <= 3 in two dimensions
    assert_eq!(rows, 13);
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"scenario": "theorem1", "extraction": {"radii": [0.1, 0.05], "samples": 8, "fractional_terms": 1, "constrained": true, "typo": 3}}"#).unwrap();
    let o = bin().args(["run", "--scenario", "theorem1", "--config"]).arg(&path).arg("--out").arg(dir.path().join("b")).output().unwrap();
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    assert!(e.contains("extraction") && e.contains("typo"), "{e}");

    std::fs::write(&path, r#"{"scenario": "theorem1", "seed": "abc"}"#).unwrap();
    let o = bin().args(["run", "--scenario", "theorem1", "--config"]).arg(&path).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn scenario_mismatch_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["run", "--scenario", "oseen", "--config"]).arg(config("t2_zero.json")).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn failed_hypothesis_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["run", "--scenario", "navier_stokes", "--config"]).arg(config("ns_low_order.json")).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("hypothesis: vanishing order") && e.contains("FAIL"), "{e}");
    assert!(dir.path().join("summary.json").is_file());
}

#[test]
fn zero_forcing_run_is_deterministic_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let o = bin().args(["run", "--scenario", "theorem2", "--config"]).arg(config("t2_zero.json")).arg("--out").arg(dir.path().join(sub)).output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(dir.path().join(sub).join("summary.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));

    let bundle = dir.path().join("a");
    let o = bin().args(["export", "--bundle"]).arg(&bundle).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tables = read_bundle_shells(&bundle).unwrap();
    let mut r = csv::Reader::from_path(bundle.join("shells.csv")).unwrap();
    let mut count = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let row = &tables[&rec[0]][rec[1].parse::<usize>().unwrap() - 1];
        assert_eq!(rec[3].parse::<f64>().unwrap(), row.outer_radius);
        assert_eq!(rec[4].parse::<f64>().unwrap(), row.sup_value);
        count += 1;
    }
    assert_eq!(count, tables.values().map(Vec::len).sum::<usize>());
}

#[test]
fn export_of_missing_bundle_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["export", "--bundle"]).arg(dir.path().join("nothing")).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn out_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().env("PARASTOKES_OUT_ROOT", dir.path()).args(["run", "--scenario", "theorem2", "--config"]).arg(config("t2_zero.json")).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("theorem2").join("summary.json").is_file());
}

/// Reduced sampling so the full pipeline runs in about a minute.
#[test]
fn theorem1_run_and_polynomial_export() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(config("t1_n2_d2.json")).unwrap()).unwrap();
    cfg["extraction"] = serde_json::json!({"radii": [0.125, 0.0625, 0.03125, 0.015625], "samples": 24, "fractional_terms": 1, "constrained": true});
    cfg["shells"] = serde_json::json!({"radii": [0.5, 0.25, 0.125, 0.0625, 0.03125], "samples": 16});
    cfg.as_object_mut().unwrap().remove("linearity_factor");
    let path = dir.path().join("t1.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let bundle = dir.path().join("bundle");
    let o = bin().args(["run", "--scenario", "theorem1", "--config"]).arg(&path).arg("--out").arg(&bundle).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let summary: Summary = serde_json::from_str(&std::fs::read_to_string(bundle.join("summary.json")).unwrap()).unwrap();
    assert!(summary.slopes["remainder"].unwrap() >= 2.35);
    assert_eq!(summary.config.seed, 20_240_601);

    let o = bin().args(["export", "--bundle"]).arg(&bundle).arg("--out").arg(dir.path().join("csv")).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let poly = VectorPolynomial::from_json(&std::fs::read_to_string(bundle.join("polynomial.json")).unwrap()).unwrap();
    let rows = poly.rows();
    assert!(!rows.is_empty());
    let mut r = csv::Reader::from_path(dir.path().join("csv/polynomial.csv")).unwrap();
    let velocity: Vec<csv::StringRecord> = r.records().map(Result::unwrap).filter(|rec| &rec[0] == "u").collect();
    assert_eq!(velocity.len(), rows.len());
    for (rec, row) in velocity.iter().zip(&rows) {
        assert_eq!(rec[1].parse::<f64>().unwrap(), row.t);
        assert_eq!(rec[2].parse::<usize>().unwrap(), row.component);
        let mu: Vec<u32> = rec[3].split(' ').map(|v| v.parse().unwrap()).collect();
        assert_eq!(mu, row.multi_index);
        assert_eq!(rec[4].parse::<f64>().unwrap(), row.value);
    }
    let mut s = csv::Reader::from_path(dir.path().join("csv/shells.csv")).unwrap();
    let radii: Vec<f64> = s.records().map(Result::unwrap).filter(|rec| &rec[0] == "remainder").map(|rec| rec[3].parse().unwrap()).collect();
    assert!(radii.windows(2).all(|w| w[1] < w[0]), "{radii:?}");
}
