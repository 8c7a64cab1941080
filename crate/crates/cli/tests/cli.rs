use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qmeas::qec::{CodeKind, NoiseModel};
use qmeas::DensityState;
use qmeas_cli::commands::{cmd_channel, cmd_qec, cmd_usd, parse_state_arg};
use qmeas_cli::plan::build;
use qmeas_cli::{execute, run_file, CliError, ExperimentSpec, Mode};

fn experiments() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("experiments")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn qmeas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmeas"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_json_exits_2_with_position() {
    let out = qmeas(&["run", data("malformed.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("malformed.json:5:3"), "{}", stderr(&out));
}

#[test]
fn unknown_field_is_a_parse_error() {
    let dir = std::env::temp_dir().join("qmeas-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("typo.json");
    std::fs::write(&path, r#"{"qubits": 1, "stages": [], "shotz": 3}"#).unwrap();
    let out = qmeas(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("1:"), "{}", stderr(&out));
}

#[test]
fn incomplete_povm_fails_validation() {
    let out = qmeas(&["validate", data("povm_missing_effect.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("completeness deviation"), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], false);
    let dev = report["checks"][1]["deviations"]["completeness"].as_f64().unwrap();
    assert!(dev > 0.1);
}

#[test]
fn non_unitary_gate_fails_validation() {
    let out = qmeas(&["validate", data("nonunitary.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("unitarity"), "{}", stderr(&out));
    let run = qmeas(&["run", data("nonunitary.json").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn bundled_experiments_validate() {
    for entry in std::fs::read_dir(experiments()).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap() == "dephasing_channel.json" {
            continue;
        }
        let out = qmeas(&["validate", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), stderr(&out));
    }
}

#[test]
fn register_cap_is_enforced_and_overridable() {
    let path = experiments().join("bit_flip_decoder.json");
    let capped = Command::new(env!("CARGO_BIN_EXE_qmeas"))
        .args(["validate", path.to_str().unwrap()])
        .env("QMEAS_MAX_QUBITS", "4")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
    assert!(stderr(&capped).contains("QMEAS_MAX_QUBITS"));
    let raised = Command::new(env!("CARGO_BIN_EXE_qmeas"))
        .args(["validate", path.to_str().unwrap()])
        .env("QMEAS_MAX_QUBITS", "5")
        .output()
        .unwrap();
    assert_eq!(raised.status.code(), Some(0));
}

#[test]
fn run_output_is_byte_identical() {
    let path = experiments().join("povm_dephased.json");
    let args = ["run", path.to_str().unwrap(), "--shots", "3000", "--seed", "9"];
    let a = qmeas(&args);
    let b = qmeas(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = qmeas(&["run", path.to_str().unwrap(), "--shots", "3000", "--seed", "10"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn pretty_tables_go_to_stderr_only() {
    let path = experiments().join("parity.json");
    let plain = qmeas(&["run", path.to_str().unwrap(), "--shots", "100"]);
    let pretty = qmeas(&["--pretty", "run", path.to_str().unwrap(), "--shots", "100"]);
    assert_eq!(plain.stdout, pretty.stdout);
    assert!(stderr(&pretty).contains("outcome"));
}

#[test]
fn parity_example_matches_closed_form() {
    let r = run_file(&experiments().join("parity.json"), None, None, None).unwrap();
    let rows = &r.stages[0].outcomes;
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!((row.probability.unwrap() - 0.5).abs() < 1e-12);
        assert!((row.frequency.unwrap() - 0.5).abs() < 0.005);
    }
    assert_eq!(rows.iter().map(|o| o.count.unwrap()).sum::<u64>(), 100_000);
}

#[test]
fn usd_example_matches_closed_form() {
    let r = run_file(&experiments().join("usd.json"), None, None, Some(Mode::Exact)).unwrap();
    let p: Vec<f64> = r.stages[0].outcomes.iter().map(|o| o.probability.unwrap()).collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (a, b) in p.iter().zip([1.0 - s, 0.0, s]) {
        assert!((a - b).abs() < 1e-12, "{p:?}");
    }
}

#[test]
fn bundled_experiments_agree_within_four_sigma() {
    for entry in std::fs::read_dir(experiments()).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap() == "dephasing_channel.json" {
            continue;
        }
        let r = run_file(&path, Some(100_000), None, Some(Mode::Both)).unwrap();
        assert!(!r.diverged, "{}", path.display());
        for s in &r.stages {
            let total: f64 = s.outcomes.iter().filter_map(|o| o.probability).sum();
            if !s.outcomes.is_empty() {
                assert!((total - 1.0).abs() < 1e-9, "{} {}: {total}", path.display(), s.stage);
                assert_eq!(s.outcomes.iter().filter_map(|o| o.count).sum::<u64>(), 100_000);
                assert!(s.max_sigma.unwrap() <= 4.0);
            }
        }
    }
}

#[test]
fn observable_expectations_are_reported() {
    let r = run_file(&experiments().join("bell_zz.json"), Some(2000), None, None).unwrap();
    for s in &r.stages {
        let e = s.expectation.as_ref().unwrap();
        assert!((e.exact.unwrap() - 1.0).abs() < 1e-12);
        assert!((e.estimate.unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn decoder_example_keeps_the_logical_state() {
    // independent flips with p = 0.1: at most one flip happens with probability 0.972
    let r = run_file(&experiments().join("bit_flip_decoder.json"), None, None, Some(Mode::Exact)).unwrap();
    let logical = r.stages.iter().find(|s| s.stage == "logical").unwrap();
    let e = logical.expectation.as_ref().unwrap().exact.unwrap();
    assert!((e - 1.0).abs() < 1e-10, "{e}");
    let decode = r.stages.iter().find(|s| s.stage == "decode").unwrap();
    let p00 = decode.outcomes.iter().find(|o| o.label == "00").unwrap().probability.unwrap();
    assert!((p00 - (0.729 + 0.001)).abs() < 1e-12);
}

#[test]
fn qec_table_and_monte_carlo() {
    for kind in [CodeKind::BitFlip, CodeKind::PhaseFlip] {
        let r = cmd_qec(kind, NoiseModel::Independent, &[0.0], 200, 1).unwrap();
        let syndromes: Vec<&str> = r.table.iter().map(|row| row.syndrome.as_str()).collect();
        assert_eq!(syndromes, ["00", "10", "11", "01"]);
        for row in &r.table {
            assert!((row.fidelity_projective - 1.0).abs() < 1e-10);
            assert!((row.fidelity_circuit - 1.0).abs() < 1e-10);
        }
        assert_eq!(r.monte_carlo[0].logical_errors, 0);
        assert!(r.hamming.saturated);
    }
    let at_most_one = cmd_qec(CodeKind::BitFlip, NoiseModel::AtMostOne, &[1.0], 200, 1).unwrap();
    assert_eq!(at_most_one.monte_carlo[0].logical_errors, 0);
    assert!(cmd_qec(CodeKind::BitFlip, NoiseModel::Independent, &[1.5], 10, 1).is_err());
}

#[test]
fn qec_rejects_bad_probability_with_exit_3() {
    let out = qmeas(&["qec", "--p=-0.2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usd_command_reports_closed_form() {
    let r = cmd_usd(
        parse_state_arg("0").unwrap(),
        parse_state_arg("[[0.7071067811865476,0],[0.7071067811865476,0]]").unwrap(),
        1,
        10_000,
        3,
        Mode::Both,
    )
    .unwrap();
    assert!((r.predicted[1] - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);
    let rows = &r.result.stages[0].outcomes;
    assert!((rows[1].probability.unwrap() - r.predicted[1]).abs() < 1e-12);
    assert_eq!(rows[0].count, Some(0));
}

#[test]
fn channel_command_dephases_plus() {
    let r = cmd_channel(&experiments().join("dephasing_channel.json")).unwrap();
    let half = DensityState::maximally_mixed(1).into_matrix();
    assert!(r.output.max_abs_diff(&half) < 1e-12);
    assert!((r.purity - 0.5).abs() < 1e-12);
}

fn exact_probabilities(json: &str) -> Vec<(String, f64)> {
    let spec = ExperimentSpec::from_json(json, "inline").unwrap();
    let r = execute(&build(&spec).unwrap()).unwrap();
    r.stages
        .last()
        .unwrap()
        .outcomes
        .iter()
        .map(|o| (o.label.clone(), o.probability.unwrap()))
        .filter(|(_, p)| *p > 1e-12)
        .collect()
}

#[test]
fn alternate_state_and_channel_forms() {
    let got = exact_probabilities(
        r#"{"qubits": 3, "initial": "ghz3", "mode": "exact", "stages": [
            {"channel": {"type": "embed", "targets": [2], "inner": {"type": "bitflip", "p": 1.0}}},
            {"measurement": {"type": "computational"}}]}"#,
    );
    assert_eq!(got.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>(), ["1", "6"]);
    assert!(got.iter().all(|(_, p)| (p - 0.5).abs() < 1e-12));

    let got = exact_probabilities(
        r#"{"qubits": 2, "initial": {"basis": "01"}, "mode": "exact", "stages": [
            {"channel": {"type": "kraus", "matrices": [[[0, 1], [1, 0]]], "targets": [0]}},
            {"measurement": {"type": "computational"}}]}"#,
    );
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].0, "3");
    assert!((got[0].1 - 1.0).abs() < 1e-12);

    let got = exact_probabilities(
        r#"{"qubits": 2, "initial": {"bell": "psi-"}, "mode": "exact", "stages": [
            {"measurement": {"type": "parity", "n": 2}}]}"#,
    );
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].0, "1");
    assert!((got[0].1 - 1.0).abs() < 1e-12);

    let bad = ExperimentSpec::from_json(
        r#"{"qubits": 2, "stages": [{"measurement": {"type": "parity", "n": 3}}]}"#,
        "inline",
    )
    .unwrap();
    assert!(matches!(build(&bad), Err(CliError::Validation(_))));
}
