use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ashgeo(args: &[&str], config: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ashgeo"));
    cmd.arg(args[0]).arg("-c").arg(config).args(&args[1..]);
    cmd.output().expect("spawn ashgeo")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn check_passes_on_frw_configs() {
    for name in ["frw_flat.json", "frw_closed.json", "slice.json"] {
        let out = ashgeo(&["check"], &configs().join(name));
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_eq!(v["passed"], Value::Bool(true));
        assert!(v["suites"].as_array().unwrap().len() >= 20);
    }
}

#[test]
fn output_is_deterministic() {
    let cfg = configs().join("frw_flat.json");
    for args in [&["check"][..], &["eval"][..], &["eval", "--format", "csv"][..]] {
        let a = ashgeo(args, &cfg);
        let b = ashgeo(args, &cfg);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn single_suite_selection() {
    let out = ashgeo(&["check", "--suite", "jacobi"], &configs().join("frw_flat.json"));
    assert!(out.status.success());
    let v = json(&out);
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["name"], "jacobi");
    assert_eq!(suites[0]["status"], "pass");
}

#[test]
fn unknown_suite_is_invalid_input() {
    let out = ashgeo(&["check", "--suite", "nope"], &configs().join("frw_flat.json"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_symmetric_metric_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "bad.json",
        r#"{"model": {"slice": {"metric": [["1","0.1","0"],["0","1","0"],["0","0","1"]]}}}"#,
    );
    let out = ashgeo(&["eval"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("symmetric"));
}

#[test]
fn unknown_field_reports_its_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.json", r#"{"model": {"preset": "frw:flat", "colour": 1}}"#);
    let out = ashgeo(&["eval"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model"));
}

#[test]
fn impossible_tolerance_exits_one() {
    let out = ashgeo(&["check", "--suite", "curvature_dual", "--tol", "curvature_dual=1e-300"], &configs().join("split.json"));
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(false));
    assert_eq!(v["suites"][0]["status"], "fail");
}

#[test]
fn bad_thread_count_is_invalid() {
    let out = Command::new(env!("CARGO_BIN_EXE_ashgeo"))
        .args(["eval", "-c"])
        .arg(configs().join("frw_flat.json"))
        .env("ASHGEO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn frw_flat_eval_values() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "flat.json",
        r#"{"model": {"preset": "frw:flat", "scale": "exp(0.5*t)"}, "beta": "1", "tau": 0,
            "samples": {"points": [[0, 0, 0]]}}"#,
    );
    let out = ashgeo(&["eval"], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["results"][0];
    for a in 0..3 {
        for i in 0..3 {
            let d = if a == i { 1.0 } else { 0.0 };
            // H = 1/2, a(0) = 1: K = H q, k_a^i = H δ, Γ = 0, A = Γ + βk.
            assert!((num(&r["k"][a][i]) - 0.5 * d).abs() < 1e-12);
            assert!(num(&r["Gamma"][a][i]).abs() < 1e-12);
            assert!((num(&r["A"][a][i]["re"]) - 0.5 * d).abs() < 1e-12);
            assert!((num(&r["q"][a][i]) - d).abs() < 1e-12);
            assert!((num(&r["W"][a][i]) - 0.5 * d).abs() < 1e-12);
        }
    }
    assert!((num(&r["det_e"]) - 1.0).abs() < 1e-12);
}

#[test]
fn static_flat_model_has_zero_connection() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "static.json",
        r#"{"model": {"slice": {"metric": [["1","0","0"],["0","1","0"],["0","0","1"]]}},
            "beta": ["1", "i"], "samples": {"count": 3, "seed": 5}}"#,
    );
    let out = ashgeo(&["eval"], &cfg);
    assert!(out.status.success());
    let v = json(&out);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 6);
    for r in results {
        for row in r["A"].as_array().unwrap() {
            for c in row.as_array().unwrap() {
                assert_eq!(num(&c["re"]), 0.0);
                assert_eq!(num(&c["im"]), 0.0);
            }
        }
    }
}

#[test]
fn eval_csv_is_long_format() {
    let out = ashgeo(&["eval", "--format", "csv"], &configs().join("frw_closed.json"));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,x1,x2,x3,beta_re,beta_im,quantity,row,col,re,im");
    // Two points, one β, 8 matrices of 9 entries plus det_e.
    assert_eq!(lines.count(), 2 * (8 * 9 + 1));
}

#[test]
fn check_csv_has_one_row_per_suite() {
    let out = ashgeo(&["check", "--format", "csv", "--suite", "hodge", "--suite", "jacobi"], &configs().join("frw_flat.json"));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("name,status,max_error,tolerance,samples,detail"));
}

#[test]
fn zero_form_holonomy_is_identity() {
    let dir = TempDir::new().unwrap();
    let paths = write(
        &dir,
        "zero.json",
        r#"{"paths": [{"components": ["0.5*t", "0.2*t", "0"]}], "form": [["0","0","0"],["0","0","0"],["0","0","0"]]}"#,
    );
    let out = ashgeo(&["holonomy", "--path", paths.to_str().unwrap()], &configs().join("frw_flat.json"));
    assert!(out.status.success());
    let r = &json(&out)["results"][0];
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            assert_eq!(num(&r["so3"][i][j]["re"]), d);
        }
    }
    assert_eq!(num(&r["residual"]), 0.0);
}

#[test]
fn constant_form_holonomy_matches_exponential() {
    let cfg = configs().join("frw_flat.json");
    let paths = configs().join("constant_m3.json");
    let out = ashgeo(&["holonomy", "--path", paths.to_str().unwrap()], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["results"][0];
    // A = 0.8 M_3 along x1 over unit length: U' = -A U gives exp(-0.8 M_3),
    // with (M_3)_{12} = -1 the (1,2) entry is +sin 0.8.
    let (c, s) = (0.8f64.cos(), 0.8f64.sin());
    let expected = [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((num(&r["so3"][i][j]["re"]) - expected[i][j]).abs() < 1e-8, "({i},{j})");
        }
    }
}

#[test]
fn frw_loop_holonomy_covers() {
    let paths = configs().join("loop.json");
    let out = ashgeo(&["holonomy", "--path", paths.to_str().unwrap()], &configs().join("frw_flat.json"));
    assert!(out.status.success());
    let v = json(&out);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2 * 3);
    for r in results {
        assert!(num(&r["residual"]) < 1e-6);
    }
}

#[test]
fn holonomy_rejects_path_leaving_chart() {
    let dir = TempDir::new().unwrap();
    let paths = write(&dir, "out.json", r#"{"paths": [{"components": ["3*t", "0", "0"]}]}"#);
    let out = ashgeo(&["holonomy", "--path", paths.to_str().unwrap()], &configs().join("frw_flat.json"));
    assert_eq!(out.status.code(), Some(2));
}
