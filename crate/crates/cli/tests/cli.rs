use ipl_core::domain::{ScenarioConfig, ScenarioKind, Variant};
use ipl_core::harness::{load_scenario, SuiteConfig};
use std::path::PathBuf;
use std::process::{Command, Output};

fn ipl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn verify_optimism_succeeds_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("optimism.json");
    let out = ipl(&["verify-optimism", "--summary", summary.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("checked 63"), "{text}");
    assert!(text.contains("violations 0"), "{text}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(json["violations"].as_array().map(Vec::len), Some(0));
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[suite]\nruns = 5\nrunz = 6\n").unwrap();
    let out = ipl(&["--config", cfg.to_str().unwrap(), "verify-optimism"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let missing = dir.path().join("no-tables");
    let out = ipl(&["evaluate", "--tables", missing.to_str().unwrap(), "--runs", "2"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let out = ipl(&["simulate", "--scenario", "roundabout"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ipl(&["evaluate", "--format", "xml", "--runs", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ipl(&["--config", dir.path().join("absent.toml").to_str().unwrap(), "verify-optimism"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn shipped_default_config_equals_built_in_defaults() {
    let cfg = SuiteConfig::load(&configs().join("default.toml")).unwrap();
    assert_eq!(cfg, SuiteConfig::default());
}

#[test]
fn shipped_scenario_files_equal_presets() {
    for kind in ScenarioKind::ALL {
        for variant in Variant::ALL {
            let path = configs().join("scenarios").join(format!("{kind}-{variant}.toml"));
            let sc = load_scenario(&path).unwrap();
            assert_eq!(sc, ScenarioConfig::preset(kind, variant), "{}", path.display());
        }
    }
}

#[test]
fn simulate_from_scenario_file_writes_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("episode.ndjson");
    let scenario = configs().join("scenarios").join("intersection-unsafe.toml");
    let out = ipl(&[
        "simulate",
        "--scenario-file",
        scenario.to_str().unwrap(),
        "--policy",
        "heuristic-2",
        "--seed",
        "7",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("intersection-unsafe heuristic-2 seed 7"), "{text}");
    assert!(text.contains("outcome"));
    let lines = std::fs::read_to_string(log).unwrap();
    assert!(lines.lines().count() >= 2);
}
