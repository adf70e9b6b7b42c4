use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spiralfd::analysis::spiral_trace;
use spiralfd::construct::{build_submain_p, distortion_field, BuildOptions, Gauge, Phi, TargetModulus};
use spiralfd::io::{read_map, read_trace, MapFile};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spiralfd")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build_map(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec!["build", "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn build_respects_stage_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let p = build_map(dir.path(), "m.json", &["--theorem", "submain_p", "--p", "2", "--phi", "r^5", "--depth", "20"]);
    let file: MapFile = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(file.stages.len(), 20);
    for st in &file.stages {
        assert!(st.q.ln() <= st.ln_alpha.unwrap());
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = build_map(dir.path(), "a.json", &["--depth", "12"]);
    let b = build_map(dir.path(), "b.json", &["--depth", "12"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let ta = dir.path().join("a.csv");
    let tb = dir.path().join("b.csv");
    for (m, t) in [(&a, &ta), (&b, &tb)] {
        assert!(run(&["trace", "--map", s(m), "--rmin", "1e-9", "--points", "64", "--out", s(t)]).status.success());
    }
    assert_eq!(fs::read(&ta).unwrap(), fs::read(&tb).unwrap());
}

#[test]
fn trace_matches_in_memory_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let m = build_map(dir.path(), "m.json", &["--depth", "6"]);
    let t = dir.path().join("t.csv");
    assert!(run(&["trace", "--map", s(&m), "--rmin", "1e-30", "--points", "100", "--out", s(&t)]).status.success());
    let target = TargetModulus::new(Phi::power(5.0).unwrap(), 2.0).unwrap();
    let mem = build_submain_p(&target, &Gauge::compression(target.clone()), &BuildOptions::new(6)).unwrap();
    assert_eq!(read_map(&m).unwrap(), mem);
    let expect = spiral_trace(&mem, &distortion_field(&mem), 1e-30, 1.0, 100).unwrap();
    assert_eq!(read_trace(&t).unwrap(), expect);
}

#[test]
fn verify_modeq_holds() {
    let dir = tempfile::tempdir().unwrap();
    let m = build_map(dir.path(), "map.json", &["--depth", "20"]);
    let out = dir.path().join("modeq.json");
    let o = run(&["verify", "--check", "modeq", "--map", s(&m), "--z0", "0.0625", "--out", s(&out)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["holds"], true);
}

#[test]
fn verify_bound_reports_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let m = build_map(dir.path(), "t4.json", &["--theorem", "submain_1", "--depth", "30", "--epsilon", "0.1"]);
    let rep = dir.path().join("main1.json");
    assert!(run(&["verify", "--check", "main_1", "--map", s(&m), "--out", s(&rep)]).status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    for key in ["radii", "ratios", "fitted_C", "verdict", "depth"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["verdict"], "tends_to_zero");
    let csv = dir.path().join("main1.csv");
    assert!(run(&["export", "--input", s(&rep), "--output", s(&csv)]).status.success());
    assert!(fs::read_to_string(&csv).unwrap().starts_with("radius,ln_radius,ratio,corollary_ratio\n"));
    let stages = dir.path().join("stages.csv");
    assert!(run(&["export", "--input", s(&m), "--output", s(&stages)]).status.success());
    assert_eq!(fs::read_to_string(&stages).unwrap().lines().count(), 31);
    let curves = dir.path().join("curves.csv");
    assert!(run(&["export", "--input", s(&m), "--output", s(&curves), "--view", "curves", "--curves", "4"]).status.success());
    assert!(fs::read_to_string(&curves).unwrap().starts_with("curve,kind,param,ln_modulus,angle\n"));
}

#[test]
fn ring_modulus_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ring.json");
    let rho = dir.path().join("rho.csv");
    let o = run(&[
        "modulus", "--family", "ring", "--grid", "512", "--paths", "720", "--out", s(&out), "--density-out", s(&rho),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - 2.0 * std::f64::consts::PI).abs() < 0.05 * 2.0 * std::f64::consts::PI);
    assert_eq!(v["kind"], "discrete_estimate");
    assert!(v["constants"].get("c_f").is_some());
    assert!(fs::read_to_string(&rho).unwrap().starts_with("x,y,rho\n"));
    assert!(dir.path().join("rho.json").exists());
}

#[test]
fn explicit_density_command() {
    let o = run(&["modulus", "--density", "tube", "--z0", "0.5", "--p", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - (2.0 + std::f64::consts::PI)).abs() < 1e-12);
    assert_eq!(v["kind"], "upper_bound");
}

#[test]
fn distortion_prints_norms() {
    let dir = tempfile::tempdir().unwrap();
    let m = build_map(dir.path(), "m.json", &["--depth", "5"]);
    let o = run(&["distortion", "--map", s(&m), "--p", "1", "--p", "2", "--ball", "1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first["norm"].as_f64().unwrap() >= std::f64::consts::PI);
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"theorem": "rotation", "depth": 4}"#).unwrap();
    let out = dir.path().join("m.json");
    assert!(run(&["--config", s(&cfg), "build", "--out", s(&out)]).status.success());
    let file: MapFile = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.stages.len(), 4);
    assert!(file.stages.iter().all(|st| st.q == 1.0));
}

#[test]
fn exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["build", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["modulus", "--family", "ring", "--z0", "2", "--density", "ball"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["modulus", "--density", "ball", "--z0", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).lines().next().unwrap()).unwrap();
    assert_eq!(err["error"], "invalid_input");

    let out = dir.path().join("bad.json");
    let o = run(&["build", "--phi", "r^3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!out.exists() && !dir.path().join("bad.json.partial").exists());

    let o = run(&[
        "modulus", "--family", "ring", "--grid", "32", "--paths", "16", "--max-sweeps", "1", "--tolerance", "1e-12",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
