use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pingpong_cli::output::without_timestamp;
use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn pingpong(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pingpong"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, body: Value) -> PathBuf {
    let path = dir.path().join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analyze_sanov_finds_positive_growth() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        &dir,
        serde_json::json!({"generators_path": fixture("sanov.json"), "epsilon": 0.05, "radius": 8, "target_delta": 0.05}),
    );
    let o = pingpong(&["analyze", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&out.join("report.json"));
    assert!(report["growth"]["delta_hat"].as_f64().unwrap() > 0.0);
    assert_eq!(report["records"].as_u64(), Some(510));
    let growth = std::fs::read_to_string(out.join("growth.csv")).unwrap();
    assert!(growth.starts_with("t,n,log_n"));
    let cone = std::fs::read_to_string(out.join("cone.csv")).unwrap();
    assert!(cone.starts_with("angle,tau_hat,sample_size"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, "{\"generators_path\": \"x.json\", \"epsilon\": ").unwrap();
    let o = pingpong(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config"), "{}", stderr(&o));
}

#[test]
fn malformed_generators_exit_2() {
    let dir = TempDir::new().unwrap();
    let gens = dir.path().join("g.json");
    std::fs::write(&gens, "[[[1, 2], [0, 1]], [[1, 0], [2]]]").unwrap();
    let o = pingpong(&["certify", "--generators", gens.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn node_cap_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        serde_json::json!({"generators_path": fixture("sanov.json"), "epsilon": 0.05, "radius": 12,
                           "budgets": {"node_cap": 1000}}),
    );
    let out = dir.path().join("out");
    let o = pingpong(&["analyze", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

fn schottky_config(dir: &TempDir, delta: f64) -> PathBuf {
    write_config(
        dir,
        serde_json::json!({"generators_path": fixture("schottky.json"), "epsilon": 0.1, "target_delta": delta,
                           "radius": 4, "seed": 3, "exact_check": 6}),
    )
}

#[test]
fn build_schottky_passes_and_revalidates() {
    let dir = TempDir::new().unwrap();
    let cfg = schottky_config(&dir, 0.01);
    let out = dir.path().join("out");
    let o = pingpong(&["build-semigroup", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&out.join("report.json"));
    let checklist = &report["checklist"];
    assert_eq!(checklist["contraction"], Value::Bool(true));
    assert_eq!(checklist["generator_sum"], Value::Bool(true));
    assert_eq!(checklist["anosov"], Value::Bool(true));
    assert_eq!(checklist["zariski"], Value::String("consistent with Zariski dense".into()));
    assert_eq!(report["generator_sum"]["property_three"]["violations"].as_u64(), Some(0));
    assert_eq!(report["subadditivity"]["holds"], Value::Bool(true));
    let packing = std::fs::read_to_string(out.join("packing.jsonl")).unwrap();
    let selected = report["selected"].as_array().unwrap().len();
    assert_eq!(packing.lines().count(), selected);
    for line in packing.lines() {
        pingpong_core::io::parse_record_line(line).unwrap();
    }
    let cert = out.join("certificate.json");
    let o = pingpong(&["revalidate", "--certificate", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn build_with_huge_delta_exhausts() {
    let dir = TempDir::new().unwrap();
    let cfg = schottky_config(&dir, 10.0);
    let out = dir.path().join("out");
    let o = pingpong(&["build-semigroup", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(!out.join("certificate.json").exists());
    assert_eq!(read_json(&out.join("report.json"))["exit_code"].as_i64(), Some(4));
}

#[test]
fn build_with_duplicate_generators_fails_disjointness() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        serde_json::json!({"generators_path": fixture("duplicate.json"), "epsilon": 0.1, "target_delta": 0.0,
                           "radius": 3, "pinned": [[0], [1]]}),
    );
    let out = dir.path().join("out");
    let o = pingpong(&["build-semigroup", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("shadow_disjointness"), "{}", stderr(&o));
}

#[test]
fn build_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = schottky_config(&dir, 0.01);
    let mut reports = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = pingpong(&["build-semigroup", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        reports.push((
            without_timestamp(&std::fs::read_to_string(out.join("report.json")).unwrap()),
            std::fs::read_to_string(out.join("certificate.json")).unwrap(),
        ));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn explicit_anchors_must_respect_epsilon_bound() {
    let dir = TempDir::new().unwrap();
    // ζ(x, y) = 0.2 here, so ε = 0.1 is far above ζ/8.
    let cfg = write_config(
        &dir,
        serde_json::json!({"generators_path": fixture("schottky.json"), "epsilon": 0.1, "radius": 2,
                           "anchor_x": {"frame": [[0.0, 0.96], [1.0, 0.28]], "kind": "flag"},
                           "anchor_y": {"frame": [[1.0, 0.0], [0.0, 1.0]], "kind": "opposite"}}),
    );
    let o = pingpong(&["build-semigroup", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn certify_fixtures() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ok");
    let o = pingpong(&[
        "certify", "--generators", fixture("schottky.json").to_str().unwrap(), "--epsilon", "0.1",
        "--exact-check", "8", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert = read_json(&out.join("certificate.json"));
    assert_eq!(cert["exact_crosscheck"]["collisions"].as_u64(), Some(0));
    assert_eq!(cert["exact_crosscheck"]["words"].as_u64(), Some(510));

    let out = dir.path().join("power");
    let o = pingpong(&["certify", "--generators", fixture("power.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("shadow_disjointness"), "{}", stderr(&o));

    let out = dir.path().join("rot");
    let o = pingpong(&["certify", "--generators", fixture("rotation.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NotLoxodromic"), "{}", stderr(&o));
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ok");
    let o = pingpong(&[
        "certify", "--generators", fixture("schottky.json").to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = out.join("certificate.json");
    let mut cert = read_json(&path);
    cert["pairwise_separation"][0][1] = serde_json::json!(0.9);
    std::fs::write(&path, serde_json::to_string(&cert).unwrap()).unwrap();
    let o = pingpong(&["revalidate", "--certificate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    std::fs::write(&path, "not json").unwrap();
    let o = pingpong(&["revalidate", "--certificate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
