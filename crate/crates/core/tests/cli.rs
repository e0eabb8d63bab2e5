use std::process::{Command, Output};

use serde_json::Value;

fn dhs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhs"))
        .args(args)
        .env_remove("DHS_SEED")
        .output()
        .expect("dhs runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn sphere_spectrum_matches_closed_form() {
    let out = dhs(&["spectrum", "--builtin", "sphere:m=2", "--p", "0", "--count", "9"]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    let eigs: Vec<f64> = json[0]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let exact = [0.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 3.0];
    for (a, b) in eigs.iter().zip(exact) {
        assert!((a - b).abs() <= 0.02 * b.max(1e-6), "{a} vs {b}");
    }
    for key in ["degree", "eigenvalues", "residuals", "clusters"] {
        assert!(json[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn circle_one_forms() {
    let out = dhs(&["spectrum", "--builtin", "circle", "--p", "1", "--count", "5"]);
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    let eigs = json[0]["eigenvalues"].as_array().unwrap();
    for (v, b) in eigs.iter().zip([0.0, 1.0, 1.0, 4.0, 4.0]) {
        assert!((v.as_f64().unwrap() - b).abs() < 0.01 * b.max(1.0));
    }
}

#[test]
fn open_mesh_is_a_topology_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("open.off");
    std::fs::write(
        &path,
        "OFF\n4 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n",
    )
    .unwrap();
    let out = dhs(&["spectrum", "--mesh", path.to_str().unwrap(), "--p", "0"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("topolog"));
}

#[test]
fn exact_bounds_on_sphere_pass_with_equalities() {
    let out = dhs(&[
        "bounds", "--builtin", "sphere:m=2", "--spectrum", "analytic", "--p", "0", "--k-max", "10", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "inequality,p,index,bound,observed,slack,pass,mode");
    let tight: Vec<usize> = lines
        .filter(|l| l.starts_with("yang,"))
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[5].parse::<f64>().unwrap().abs() < 1e-9).then(|| f[2].parse().unwrap())
        })
        .collect();
    assert!(tight.contains(&1) && tight.contains(&4), "{tight:?}");
}

#[test]
fn geometric_bounds_on_circle_one_forms_pass() {
    let out = dhs(&["bounds", "--builtin", "circle", "--p", "1", "--mode", "geometric", "--k-max", "10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corrupted_spectrum_exits_one() {
    let out = dhs(&[
        "bounds", "--builtin", "sphere:m=2", "--spectrum", "analytic", "--p", "0", "--scale-eigenvalue", "5:2",
    ]);
    assert_eq!(code(&out), 1);
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rows.as_array().unwrap().iter().any(|r| r["slack"].as_f64().unwrap() < 0.0 && !r["pass"].as_bool().unwrap()));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&dhs(&["abstract", "--trials", "0"])), 2);
    assert_eq!(code(&dhs(&["spectrum", "--builtin", "sphere:m=2", "--p", "3"])), 2);
    assert_eq!(code(&dhs(&["bounds", "--builtin", "sphere:m=2", "--count", "3", "--k-max", "5"])), 2);
    assert_eq!(code(&dhs(&["spectrum"])), 2);
}

#[test]
fn abstract_batch_is_deterministic() {
    let args = ["abstract", "--trials", "1000", "--seed", "7", "--threads", "3"];
    let a = dhs(&args);
    let b = dhs(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let json: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(json["max_violation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(json["trials"], 1000);
    assert!(json["failures"].as_array().unwrap().is_empty());
}

#[test]
fn seed_env_var_is_used() {
    let out = Command::new(env!("CARGO_BIN_EXE_dhs"))
        .args(["verify", "--builtin", "circle:res=32", "--p", "0"])
        .env("DHS_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["seed"], 99);
}
