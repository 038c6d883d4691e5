use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.display().to_string()
}

fn weaver(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weaver"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = weaver(args);
    let code = out.status.code().expect("exit code");
    let text = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&text).unwrap_or_else(|e| {
        panic!("bad report ({e}): {text}\nstderr: {}", String::from_utf8_lossy(&out.stderr))
    });
    (code, json)
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn weaver_mercedes_two_blocks() {
    let (code, r) = report(&["weaver", &data("mercedes.json"), "--r", "2", "--verify"]);
    assert_eq!(code, 0);
    let bessel = r["certificate"]["per_block_bessel"].as_array().unwrap();
    let max = bessel.iter().map(f).fold(0.0, f64::max);
    assert!(close(max, 1.0, 1e-9), "{max}");
    assert_eq!(r["verification"]["ok"], true);
    assert_eq!(r["met"], true);
}

#[test]
fn weaver_orthonormal_basis() {
    let (code, r) = report(&["weaver", &data("onb2.json"), "--r", "2"]);
    assert_eq!(code, 0);
    // Both vectors land in the lowest block; that block is a basis.
    let c = &r["certificate"];
    assert_eq!(c["assignment"], serde_json::json!([0, 0]));
    assert_eq!(f(&c["per_block_bessel"][0]), 1.0);
    assert_eq!(f(&c["per_block_lower"][0]), 1.0);
}

#[test]
fn malformed_json_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"dim\": 2, \"vectors\": [").unwrap();
    let out = weaver(&["weaver", p.to_str().unwrap(), "--r", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = weaver(&["weaver", "/nonexistent/frame.json", "--r", "2"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn pave_half_projection_separates_indices() {
    let (code, r) = report(&["pave", &data("halfproj2.json"), "--class", "projection-half", "--eps", "0.9", "--verify"]);
    assert_eq!(code, 0);
    let c = &r["certificate"];
    let a = c["assignment"].as_array().unwrap();
    assert_ne!(a[0], a[1]);
    for b in c["achieved"].as_array().unwrap() {
        assert!(close(f(&b["norm"]), 0.5, 1e-12));
    }
    assert_eq!(r["verification"]["ok"], true);
}

#[test]
fn pave_zero_bounded() {
    let (code, r) = report(&["pave", &data("zero2.json"), "--class", "bounded", "--eps", "0.9", "--verify"]);
    assert_eq!(code, 0);
    let achieved = r["certificate"]["achieved"].as_array().unwrap();
    assert_eq!(achieved.len(), 1);
    assert_eq!(f(&achieved[0]["norm"]), 0.0);
}

#[test]
fn pave_rejects_non_projection() {
    let out = weaver(&["pave", &data("diag03.json"), "--class", "projection-half", "--eps", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_mcp_half_identities() {
    let (code, r) = report(&["certify-mcp", &data("half_identity_pair.json"), "--verify"]);
    assert_eq!(code, 0);
    let c = &r["certificate"];
    assert_eq!(c["ok"], true);
    assert!(close(f(&c["achieved_maxroot"]), 1.0 + 0.5f64.sqrt(), 1e-9));
    assert!(close(f(&c["claimed_bound"]), 4.0, 1e-12));
}

#[test]
fn fourier_gram_small() {
    let (code, r) = report(&["fourier", "--intervals", "0,0.5", "--N", "3", "--verify"]);
    assert_eq!(code, 0);
    let g = &r["certificate"]["gram"];
    assert_eq!(g["dim"], 7);
    for i in 0..7 {
        assert_eq!(f(&g["entries"][i][i][0]), 0.5);
        assert_eq!(f(&g["entries"][i][i][1]), 0.0);
    }
    assert_eq!(r["verification"]["ok"], true);
}

#[test]
fn fourier_json_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.json");
    std::fs::write(&p, r#"{"intervals": [[0.0, 0.25], [0.5, 0.75]], "N": 2}"#).unwrap();
    let (code, r) = report(&["fourier", "--input", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(close(f(&r["certificate"]["measure"]), 0.5, 1e-15));
    let overlap = weaver(&["fourier", "--intervals", "0,0.5", "--intervals", "0.4,0.8", "--N", "2"]);
    assert_eq!(overlap.status.code(), Some(2));
}

#[test]
fn oracle_mercedes() {
    let (code, r) = report(&["oracle", &data("mercedes.json"), "--r", "2", "--verify"]);
    assert_eq!(code, 0);
    assert!(close(f(&r["certificate"]["optimum"]), 1.0, 1e-9));
}

#[test]
fn feichtinger_budget_exit() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("two.json");
    let g = weaver(&["gen", "two-bases", "--d", "2", "--seed", "5", "--out", p.to_str().unwrap()]);
    assert_eq!(g.status.code(), Some(0));
    let (code, r) = report(&["feichtinger", p.to_str().unwrap(), "--eps", "0.5", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(r["verification"]["ok"], true);
    let strict = weaver(&["feichtinger", p.to_str().unwrap(), "--eps", "0.5", "--guaranteed"]);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn repsilon_and_bt() {
    let (code, r) = report(&["repsilon", &data("onb2.json"), "--eps", "0.5", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(r["certificate"]["block_count"], 1);
    // Columns of the half projection have norm 1/sqrt(2), not one.
    let out = weaver(&["bt", &data("halfproj2.json"), "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn complement_mercedes() {
    let (code, r) = report(&["complement", &data("mercedes.json"), "--subset", "0,1", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(r["certificate"]["check"]["passed"], true);
    assert!(f(&r["verification"]["max_discrepancy"]) < 1e-12);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let gen = |seed: &str| weaver(&["gen", "parseval", "--d", "3", "--m", "7", "--seed", seed]).stdout;
    assert_eq!(gen("11"), gen("11"));
    assert_ne!(gen("11"), gen("12"));
    std::fs::write(&p, gen("11")).unwrap();
    let run = || weaver(&["weaver", p.to_str().unwrap(), "--r", "3", "--verify"]).stdout;
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run());
}

#[test]
fn gen_identity_tuple_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    let g = weaver(&["gen", "identity-tuple", "--d", "3", "--m", "4", "--seed", "9", "--out", p.to_str().unwrap()]);
    assert_eq!(g.status.code(), Some(0));
    let (code, r) = report(&["certify-mcp", p.to_str().unwrap(), "--verify", "--tol-profile", "strict"]);
    assert_eq!(code, 0);
    assert!(f(&r["certificate"]["achieved_maxroot"]) <= f(&r["certificate"]["claimed_bound"]));
}

#[test]
fn budget_exceeded_exit() {
    let out = weaver(&["oracle", &data("mercedes.json"), "--r", "2", "--budget", "1"]);
    assert_eq!(out.status.code(), Some(3));
}
