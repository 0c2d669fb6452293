use std::process::{Command, Output};

use serde_json::Value;

fn qcommit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcommit")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = qcommit(args);
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json)
}

fn assertion<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["assertions"].as_array().unwrap().iter().find(|a| a["name"] == name).unwrap()
}

#[test]
fn repetition_example_respects_bound() {
    let (code, r) = report(&["repetition", "--k", "2", "--mu", "1e-6", "--seed", "7"]);
    assert_eq!(code, 0);
    let searched = r["results"][0]["cheat"]["average"].as_f64().unwrap();
    assert!(searched <= 0.625 + 2.0 * 4e-6f64.sqrt() + 1e-6);
    assert_eq!(r["config"]["k"], 2);
    assert!(r["assertions"].as_array().unwrap().iter().all(|a| a["pass"] == true));
}

#[test]
fn oracle_protocol_example() {
    let (code, r) = report(&["oracle-protocol", "--d", "2", "--seed", "1"]);
    assert_eq!(code, 0);
    let results = r["results"].as_array().unwrap();
    let by_prover = |p: &str| results.iter().find(|x| x["prover"] == p).unwrap();
    assert_eq!(by_prover("honest")["max_deviation_from_one"].as_f64().unwrap(), 0.0);
    assert!((by_prover("identity")["accept"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(assertion(&r, "searched_prover_at_most_half")["pass"].as_bool().unwrap());
}

#[test]
fn norms_suite_example() {
    let (code, r) = report(&["norms-suite", "--seed", "0"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"][0]["pairs"], 1000);
    assert!(assertion(&r, "fvdg_ordering")["pass"].as_bool().unwrap());
}

#[test]
fn every_suite_passes_at_defaults() {
    for suite in ["qsd-scheme", "qcd-scheme", "pi-scheme", "orthogonalize", "oracle-scaling"] {
        let (code, r) = report(&[suite, "--seed", "3"]);
        assert_eq!(code, 0, "{suite}");
        assert_eq!(r["config"]["subcommand"], suite);
        assert!(!r["assertions"].as_array().unwrap().is_empty());
    }
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["qsd-scheme", "--seed", "11"][..],
        &["repetition", "--k", "1", "--seed", "4"],
        &["oracle-scaling", "--d", "2", "--samples", "500", "--format", "csv"],
    ] {
        let (a, b) = (qcommit(args), qcommit(args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn csv_has_the_sweep_header() {
    let out = qcommit(&["oracle-scaling", "--m", "1", "--samples", "200", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,m,n,estimate,std_error,envelope");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("2,1,200,"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["no-such-suite"][..],
        &["repetition", "--k", "4"],
        &["repetition", "--mu", "0"],
        &["norms-suite", "--k", "2"],
        &["qsd-scheme", "--format", "csv"],
        &["oracle-scaling", "--d", "64"],
        &["pi-scheme", "--out", "/nonexistent-dir/report.json"],
        &["qsd-scheme", "--config", "/nonexistent-dir/config.json"],
    ] {
        assert_eq!(qcommit(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = std::env::temp_dir().join(format!("qcommit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("config.json");
    let out = dir.join("report.json");
    std::fs::write(&cfg, r#"{"k": 3, "seed": 9, "restarts": 2}"#).unwrap();
    let status = qcommit(&["repetition", "--config", cfg.to_str().unwrap(), "--k", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((r["config"]["k"].as_u64(), r["config"]["seed"].as_u64(), r["config"]["restarts"].as_u64()), (Some(1), Some(9), Some(2)));

    std::fs::write(&cfg, r#"{"kay": 3}"#).unwrap();
    assert_eq!(qcommit(&["repetition", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
