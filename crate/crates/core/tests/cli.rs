use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

const TINY_DAA: &str = r#"
problem = "daa"
alphas = [0.0]
variants = ["baseline", "risk-data"]

[seeds]
base = 3
trials = 1

[training]
epochs = 1
dataset_size = 400
hidden = [4]

[daa]
encounters = 40
occupancy_encounters = 40
validation_size = 100
"#;

fn riskperc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_riskperc"))
        .args(args)
        .env_remove("RISKPERC_OUT")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("exp.toml");
    fs::write(&p, body).unwrap();
    p
}

fn run_all(cfg: &Path, out: &Path) {
    for stage in ["solve-risk", "train", "evaluate", "encounters", "export-field"] {
        let (code, _, err) = riskperc(&[stage, "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{stage}: {err}");
    }
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn daa_pipeline_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TINY_DAA);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_all(&cfg, &a);
    run_all(&cfg, &b);
    let fa = files(&a);
    for name in [
        "risk_table.rpct",
        "policy.dpol",
        "train_loss.csv",
        "detectors.csv",
        "detectors_summary.csv",
        "risk_cdf.csv",
        "encounters.csv",
        "traces.csv",
        "weight_field.csv",
        "policy_slice.csv",
        "config.train.toml",
        "checkpoints/baseline-t0.pnet",
        "checkpoints/risk-data-a0-t0.pnet",
    ] {
        assert!(a.join(name).exists(), "missing {name}");
    }
    assert_eq!(fa.len(), files(&b).len());
    for f in fa {
        let rel = f.strip_prefix(&a).unwrap();
        // Resolved configs record their own output directory.
        if rel.to_string_lossy().starts_with("config.") {
            continue;
        }
        assert!(fs::read(&f).unwrap() == fs::read(b.join(rel)).unwrap(), "{} differs", rel.display());
    }
}

#[test]
fn resolved_config_records_defaults_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TINY_DAA);
    let out = tmp.path().join("o");
    let (code, _, err) = riskperc(&[
        "solve-risk", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap(), "--seed", "11", "--alpha", "0.5",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(out.join("config.solve-risk.toml")).unwrap();
    let v: toml::Value = toml::from_str(&text).unwrap();
    assert_eq!(v["seeds"]["base"].as_integer(), Some(11));
    assert_eq!(v["alphas"].as_array().unwrap()[0].as_float(), Some(0.5));
    assert_eq!(v["training"]["epochs"].as_integer(), Some(1));
    assert!(v["training"]["learning_rate"].as_float().is_some());
    assert!(v["daa"]["sky"]["resolution"].as_integer().is_some());
}

#[test]
fn invalid_configs_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TINY_DAA);
    let out = tmp.path().join("o");
    let (code, _, err) = riskperc(&["solve-risk", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap(), "--alpha", "1.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("error"));
    let bad = write_config(tmp.path(), &format!("{TINY_DAA}\nbogus = 1\n"));
    assert_eq!(riskperc(&["train", "-c", bad.to_str().unwrap()]).0, 2);
    let pend = write_config(tmp.path(), "problem = \"pendulum\"\n");
    assert_eq!(riskperc(&["encounters", "-c", pend.to_str().unwrap(), "-o", out.to_str().unwrap()]).0, 2);
    assert_eq!(riskperc(&["train", "-c", tmp.path().join("none.toml").to_str().unwrap()]).0, 2);
}

#[test]
fn missing_prerequisites_exit_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TINY_DAA);
    let out = tmp.path().join("empty");
    for stage in ["train", "evaluate", "encounters", "export-field"] {
        let (code, _, err) = riskperc(&[stage, "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert_eq!(code, 3, "{stage}");
        assert!(err.contains("solve-risk"), "{stage}: {err}");
    }
}
