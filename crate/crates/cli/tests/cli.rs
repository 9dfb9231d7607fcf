//! End-to-end tests of the binary: exit codes, byte stability, scenario
//! loading and the metadata sidecar.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ionlink"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ionlink-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn budget_csv_ends_with_expected_rate() {
    let out = bin()
        .args(["budget", "--scenario", "paper-3m"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rate_line = text
        .lines()
        .find(|l| l.starts_with("rate,Success rate,"))
        .expect("success rate row");
    let rate: f64 = rate_line.rsplit(',').next().unwrap().parse().unwrap();
    assert!((rate - 46.227456).abs() < 1e-9);
    assert!(text
        .trim_end()
        .ends_with("infidelity,Total infidelity,0.062"));
}

#[test]
fn unknown_scenario_exits_one() {
    let out = bin()
        .args(["budget", "--scenario", "no-such"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown scenario"));
}

#[test]
fn malformed_scenario_reports_field_path() {
    let dir = temp_dir("badscenario");
    let path = dir.join("broken.json");
    // Clobber a valid scenario with a wrong-typed field.
    let sc = ionlink_core::scenario::Scenario::builtin("paper-3m").unwrap();
    let mut doc: serde_json::Value = serde_json::to_value(&sc).unwrap();
    doc["node"]["attempt_rate_hz"] = serde_json::Value::String("fast".into());
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = bin()
        .args(["budget", "--scenario", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("node.attempt_rate_hz"), "stderr: {err}");
}

#[test]
fn scenario_file_matches_builtin() {
    let dir = temp_dir("roundtrip");
    let path = dir.join("mirror.json");
    let sc = ionlink_core::scenario::Scenario::builtin("paper-1km").unwrap();
    std::fs::write(&path, serde_json::to_string_pretty(&sc).unwrap()).unwrap();

    let from_builtin = bin()
        .args(["budget", "--scenario", "paper-1km"])
        .output()
        .unwrap();
    let from_file = bin()
        .args(["budget", "--scenario", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(from_file.status.success());
    assert_eq!(from_builtin.stdout, from_file.stdout);
}

#[test]
fn scenario_dir_env_resolves_names() {
    let dir = temp_dir("scenariodir");
    let sc = ionlink_core::scenario::Scenario::builtin("paper-3m").unwrap();
    std::fs::write(
        dir.join("local-node.json"),
        serde_json::to_string_pretty(&sc).unwrap(),
    )
    .unwrap();
    let out = bin()
        .env("IONLINK_SCENARIO_DIR", &dir)
        .args(["budget", "--scenario", "local-node"])
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn simulate_node_is_byte_stable_across_workers() {
    let dir = temp_dir("determinism");
    let one = dir.join("one.csv");
    let eight = dir.join("eight.csv");
    for (workers, path) in [("1", &one), ("8", &eight)] {
        let out = bin()
            .args([
                "simulate-node",
                "--scenario",
                "paper-12km",
                "--seed",
                "7",
                "--sequences",
                "1e3",
                "--workers",
                workers,
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = std::fs::read(&one).unwrap();
    let b = std::fs::read(&eight).unwrap();
    assert_eq!(a, b, "worker count changed output bytes");

    // Sidecar carries the seed and scenario fingerprint.
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("one.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["command"], "simulate-node");
    assert!(meta["scenario_hash"].as_str().unwrap().len() == 16);
    let decay = meta["summary"]["decay_fraction"].as_f64().unwrap();
    assert!((decay - 0.224).abs() < 0.05, "decay fraction {decay}");
}

#[test]
fn simulate_node_decay_fraction_at_scale() {
    let dir = temp_dir("decayfrac");
    let path = dir.join("big.csv");
    let out = bin()
        .args([
            "simulate-node",
            "--scenario",
            "paper-12km",
            "--seed",
            "7",
            "--sequences",
            "1e5",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("big.csv.meta.json")).unwrap())
            .unwrap();
    let decay = meta["summary"]["decay_fraction"].as_f64().unwrap();
    assert!((decay - 0.224).abs() <= 0.004, "decay fraction {decay}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = temp_dir("repeat");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.join(format!("run{run}.csv"));
        let out = bin()
            .args([
                "swap-curve",
                "--rates",
                "0.1..100",
                "--points",
                "5",
                "--trials",
                "2000",
                "--seed",
                "3",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn swap_curve_rejects_bad_rates() {
    let out = bin()
        .args(["swap-curve", "--rates", "5..1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_histogram_recovers_tau_and_flags_degenerate_input() {
    let dir = temp_dir("hist");
    let model = ionlink_core::analysis::HistogramModel {
        latency_s: 20e-9,
        jitter_sigma_s: 1e-9,
        decay_tau_s: 6.936e-9,
        amplitude: 1.0,
        window_s: (0.0, 100e-9),
    };
    let samples = ionlink_core::analysis::sample_histogram(&model, 30_000, 5);
    let csv = std::iter::once("arrival_ns".to_string())
        .chain(samples.iter().map(|t| (t * 1e9).to_string()))
        .collect::<Vec<_>>()
        .join("\n");
    let input = dir.join("arrivals.csv");
    std::fs::write(&input, csv).unwrap();

    let out = bin()
        .args(["fit-histogram", "--input", input.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let tau = doc["decay_tau_ns"].as_f64().unwrap();
    let se = doc["decay_tau_stderr_ns"].as_f64().unwrap();
    assert!((tau - 6.936).abs() <= 3.0 * se, "tau {tau} ± {se}");

    // Zero-variance input is a numerical failure: exit code 2.
    let degenerate = dir.join("flat.csv");
    std::fs::write(&degenerate, "5\n".repeat(100)).unwrap();
    let out = bin()
        .args(["fit-histogram", "--input", degenerate.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn herald_table_probabilities_are_complete() {
    for scheme in ["single-photon", "bsm"] {
        let out = bin()
            .args([
                "herald-table",
                "--scenario",
                "paper-12km",
                "--scheme",
                scheme,
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let total: f64 = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "{scheme}: total {total}");
    }
}

#[test]
fn tomography_demo_reconstructs_degraded_state() {
    let out = bin()
        .args([
            "tomography-demo",
            "--scenario",
            "paper-12km",
            "--shots",
            "20000",
            "--seed",
            "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let truth = doc["true_fidelity"].as_f64().unwrap();
    let recon = doc["reconstructed_fidelity"].as_f64().unwrap();
    assert!((truth - recon).abs() < 0.02, "truth {truth} recon {recon}");
    // The degraded 12 km herald state sits near the ledger prediction.
    assert!((truth - 0.8786).abs() < 1e-3);
}

#[test]
fn conversion_point_matches_anchor() {
    let out = bin().args(["conversion"]).output().unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["efficiency"].as_f64().unwrap() - 0.38).abs() < 1e-12);
    assert!((doc["noise_rate_hz"].as_f64().unwrap() - 18.0).abs() < 0.2);
}
