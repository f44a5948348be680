use std::path::Path;
use std::process::{Command, Output};

use sicluster::donor::{predicted_edge_set, DonorLattice, ProtocolKind};
use sicluster::graph::GraphState;

fn sicluster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sicluster")).args(args).output().expect("spawn sicluster")
}

fn patterns() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/patterns"))
}

#[test]
fn help_lists_every_command() {
    let o = sicluster(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for cmd in ["build-cluster", "verify-protocol", "pulse", "mbqc", "timing", "survey"] {
        assert!(text.contains(cmd), "{cmd}");
    }
    assert_eq!(sicluster(&["mbqc", "--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\n  \"lx\": 3,\n  \"ly\": [\n}").unwrap();
    let o = sicluster(&["build-cluster", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("cfg.json:3:8"), "{err}");

    std::fs::write(&cfg, r#"{"defects": {"meas_flip": 0.1, "colour": 2}}"#).unwrap();
    assert_eq!(sicluster(&["timing", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(sicluster(&["timing", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
}

#[test]
fn statevector_build_matches_predictor() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = sicluster(&[
        "build-cluster",
        "--size",
        "2x2",
        "--backend",
        "statevector",
        "--format",
        "json",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let g = GraphState::from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    let lattice = DonorLattice::new(2, 2).unwrap();
    assert_eq!(g.edges(), predicted_edge_set(&lattice, ProtocolKind::Standard));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["predicted_match"], true);
    assert_eq!(r["backend"], "statevector");
    assert!(r["timing"]["preparation_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn resource_cap_exits_three() {
    let o = sicluster(&["build-cluster", "--size", "5x5", "--backend", "statevector"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("noisy.json");
    std::fs::write(&cfg, r#"{"lx": 5, "ly": 4, "defects": {"meas_flip": 0.05, "dead_fraction": 0.1}}"#).unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(format!("{name}.dot"));
        let report = dir.path().join(format!("{name}.json"));
        let o = sicluster(&[
            "build-cluster",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--raw",
            "--out",
            out.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(out).unwrap(), std::fs::read(report).unwrap())
    };
    let a = run("11", "a");
    let b = run("11", "b");
    let c = run("12", "c");
    assert_eq!(a, b);
    assert_ne!(a.1, c.1);
}

#[test]
fn identity_wire_pattern_verifies() {
    let o = sicluster(&["mbqc", "--pattern", patterns().join("identity_wire.json").to_str().unwrap(), "--shots", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["distance"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["shot_distances"].as_array().unwrap().len(), 20);

    // The same wire judged against the wrong map fails the check.
    let o = sicluster(&["mbqc", "--pattern", patterns().join("identity_wire.json").to_str().unwrap(), "--target", "h"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rotation_and_cz_patterns_verify() {
    let rot = patterns().join("rotation.json");
    let o = sicluster(&["mbqc", "--pattern", rot.to_str().unwrap(), "--target", "zxz:0.3,0.5,0.7", "--shots", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cz = patterns().join("cz.json");
    for backend in ["statevector", "stabilizer"] {
        let o = sicluster(&["mbqc", "--pattern", cz.to_str().unwrap(), "--target", "cz", "--backend", backend]);
        assert_eq!(o.status.code(), Some(0), "{backend}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn bad_pattern_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    std::fs::write(&p, r#"{"inputs":[0],"outputs":[1],"steps":[{"v":0,"basis":"X","angle":0.1}]}"#).unwrap();
    assert_eq!(sicluster(&["mbqc", "--pattern", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(sicluster(&["mbqc", "--pattern", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn carving() {
    let o = sicluster(&[
        "mbqc", "--carve", "--size", "8x6", "--protocol", "square", "--dead", "3,0;3,1;3,2", "--from", "0,0", "--to",
        "7,0", "--shots", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let path = r["path"].as_array().unwrap();
    assert!(path.iter().all(|v| ![3, 11, 19].contains(&v.as_u64().unwrap())));
    assert_eq!(r["pass"], true);

    let o = sicluster(&[
        "mbqc", "--carve", "--size", "4x4", "--dead", "1,0;1,1;1,2;1,3", "--from", "0,0", "--to", "3,3",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn timing_table_values() {
    let o = sicluster(&["timing", "--n", "1,10000"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "N,mode,seconds\n1,sequential,1.100000e-6\n1,parallel,2.100000e-6\n10000,sequential,1.001000e-4\n10000,parallel,2.100000e-6\n"
    );
    assert!(String::from_utf8(o.stderr).unwrap().contains("figure_of_merit,1.000000e5"));
    let o = sicluster(&["timing", "--n", "100", "--format", "json"]);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["figure_of_merit"], 1e5);
}

#[test]
fn pulse_sweep() {
    let o = sicluster(&["pulse", "--theta", "pi", "--rabi-hz", "inf,25e6"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "theta,omega1_hz,fidelity,duration_s");
    assert!(lines[1].starts_with("3.141592653589793,inf,1"));
    assert!(lines[2].starts_with("3.141592653589793,25000000,0.98534"));
    assert_eq!(sicluster(&["pulse", "--theta", ""]).status.code(), Some(2));
    assert_eq!(sicluster(&["pulse", "--rabi-hz", "fast"]).status.code(), Some(2));
}

#[test]
fn verify_protocol_detects_a_broken_predictor() {
    let o = sicluster(&["verify-protocol", "--max-size", "3x3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("3x3 square agreement PASS"));
    assert!(text.ends_with("54 passed, 0 failed, 0 skipped\n"), "{text}");
    let o = sicluster(&["verify-protocol", "--max-size", "2x2", "--inject-wrong-predictor"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn survey_json() {
    let o = sicluster(&["survey", "--size", "20x20", "--protocol", "square", "--dead-fraction", "0.05", "--seed", "2024"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["sites"], 400);
    assert_eq!(r["carve_attempts"], 100);
    assert!(r["success_rate"].as_f64().unwrap() > 0.9);
}
