use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use varexp::cli::{ExperimentConfig, Task};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varexp-solve"))
        .arg("run")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("run_report.json")).unwrap()).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn verify_on_the_model_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("model_verify.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["exit_code"], 0);
    let checks = r["hypotheses"]["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        let status = c["status"].as_str().unwrap();
        assert!(status == "holds_on_sample" || status == "not_applicable", "{c}");
    }
    assert!(checks.iter().any(|c| c["status"] == "holds_on_sample"));
}

#[test]
fn verify_reports_a_growth_gap_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("subcritical_gap_violation.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["hypotheses"]["admissibility"]["growth_gap_ok"], false);
}

#[test]
fn missing_config_fails_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&dir.path().join("absent.toml"), dir.path(), &[]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_keys_are_rejected() {
    let text = fs::read_to_string(config("model_verify.toml")).unwrap();
    let typo = text.replace("[kernel]", "[kernel]\nfamliy = \"px-laplacian\"");
    let err = ExperimentConfig::parse(&typo).unwrap_err();
    assert!(err.to_string().contains("famliy"), "{err}");
    assert!(ExperimentConfig::parse(&format!("{text}\nsolver_typo = 1\n")).is_err());
    assert!(ExperimentConfig::parse(&text).is_ok());
}

#[test]
fn task_names_round_trip() {
    for t in &Task::ALL {
        assert_eq!(t.to_string().parse::<Task>().unwrap(), *t);
    }
    assert!("sideways".parse::<Task>().is_err());
}

#[test]
fn outputs_match_their_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("model_mountain_pass.toml", "mp"),
        ("model_fountain.toml", "fountain"),
        ("model_lambda1.toml", "lambda1"),
    ];
    for (cfg, sub) in cases {
        let out_dir = dir.path().join(sub);
        let out = run(&config(cfg), &out_dir, &[]);
        assert_eq!(out.status.code(), Some(0), "{cfg}: {}", String::from_utf8_lossy(&out.stderr));
        let r = report(&out_dir);
        let listed: Vec<String> = r["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap().to_string()).collect();
        let mut on_disk: Vec<String> = fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n != "run_report.json")
            .collect();
        on_disk.sort();
        let mut sorted = listed.clone();
        sorted.sort();
        assert_eq!(sorted, on_disk, "{cfg}");
        for name in &listed {
            let h = header(&out_dir.join(name));
            let expected = if name.starts_with("solution") {
                "x,value"
            } else if name.starts_with("trace") {
                "iter,e0,j,total,grad_norm"
            } else if name == "fountain.csv" {
                "k,energy,grad_norm,sign_changes"
            } else if name == "lambda1_sweep.csv" {
                "scale,quotient"
            } else {
                panic!("unexpected file {name}")
            };
            assert_eq!(h, expected, "{name}");
        }
    }
}

#[test]
fn seed_and_task_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("model_mountain_pass.toml"), dir.path(), &["--seed", "19", "--task", "verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["seed"], 19);
    assert_eq!(r["task"], "verify");
    assert!(r.get("timings").is_none());
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(run(&config("model_fountain.toml"), d, &[]).status.code(), Some(0));
    }
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}
