//! End-to-end checks of the compiled binary: CSV shapes, exit codes,
//! determinism, and config round-trips.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qmodes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmodes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("qmodes-test-{}-{}", std::process::id(), name));
    p
}

#[test]
fn probe_converter_anchor_row() {
    let out = qmodes(&[
        "probe",
        "--model",
        "fc",
        "--k",
        "1",
        "--delta",
        "0",
        "--t",
        "1.5707963267948966",
        "--initial",
        "1,0",
        "--final",
        "0,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,prob_closed,prob_oracle,abs_err,prob_closed_printed,note"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let p: f64 = row[1].parse().unwrap();
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn probe_invalid_model_exits_2() {
    let out = qmodes(&["probe", "--model", "quartic"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn probe_mismatched_states_exits_2() {
    let out = qmodes(&["probe", "--model", "fc", "--initial", "1,1", "--final", "0,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decompose_singular_point_exits_4() {
    // full-swap point of the converter: the diagonal factor base vanishes
    let out = qmodes(&[
        "decompose",
        "--model",
        "fc",
        "--k",
        "1",
        "--delta",
        "0",
        "--t",
        "1.5707963267948966",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_is_byte_deterministic() {
    let out_a = temp_path("sweep-a.csv");
    let out_b = temp_path("sweep-b.csv");
    for path in [&out_a, &out_b] {
        let out = qmodes(&[
            "sweep",
            "--model",
            "pa",
            "--k",
            "0.8",
            "--delta",
            "1.2",
            "--initial",
            "0,0",
            "--final",
            "1,1",
            "--t0",
            "0",
            "--t1",
            "2",
            "--steps",
            "16",
            "--nmax",
            "30",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 18); // header + 17 rows
    assert_eq!(text.lines().next().unwrap(), "t,prob_closed,prob_oracle,abs_err");
    std::fs::remove_file(out_a).ok();
    std::fs::remove_file(out_b).ok();
}

#[test]
fn sweep_oscillatory_probability_stays_below_one() {
    let out = qmodes(&[
        "sweep", "--model", "pa", "--k", "1", "--delta", "3", "--initial", "0,0", "--final",
        "1,1", "--t0", "0", "--t1", "10", "--steps", "50", "--nmax", "40",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout_of(&out).lines().skip(1) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(p < 1.0);
    }
}

#[test]
fn decompose_raman_has_nine_factor_rows_and_residual() {
    let out = qmodes(&["decompose", "--model", "raman", "--t", "0.9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "generator,re,im");
    assert_eq!(lines.len(), 11);
    let order: Vec<&str> = lines[1..10]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(order, ["D", "G", "A", "C", "K", "F", "B", "J", "E"]);
    let last: Vec<&str> = lines[10].split(',').collect();
    assert_eq!(last[0], "residual");
    let residual: f64 = last[1].parse().unwrap();
    assert!(residual < 1e-10);
}

#[test]
fn validate_list_prints_criteria() {
    let out = qmodes(&["validate", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 8);
    assert!(text.contains("algebra-exactness"));
    assert!(text.contains("discrepancy-report"));
}

#[test]
fn dump_config_roundtrips_through_file() {
    let out = qmodes(&[
        "probe",
        "--model",
        "raman",
        "--gs",
        "0.55",
        "--t",
        "0.8",
        "--initial",
        "0,0,0",
        "--final",
        "1,1,0",
        "--dump-config",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dumped = stdout_of(&out);
    let config_path = temp_path("roundtrip.cfg");
    std::fs::write(&config_path, &dumped).unwrap();
    let again = qmodes(&[
        "probe",
        "--config",
        config_path.to_str().unwrap(),
        "--dump-config",
    ]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(dumped, stdout_of(&again));
    std::fs::remove_file(config_path).ok();
}

#[test]
fn probe_raman_forbidden_state_flags_selection_rule() {
    let out = qmodes(&[
        "probe", "--model", "raman", "--t", "0.9", "--initial", "0,0,0", "--final", "0,1,0",
        "--nmax", "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let row = text.lines().nth(1).unwrap();
    assert!(row.ends_with(",selection_rule"));
}

#[test]
fn unwritable_output_exits_3() {
    let out = qmodes(&[
        "probe",
        "--model",
        "fc",
        "--out",
        "/nonexistent-dir/qmodes-out.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validate_under_truncated_oracle_fails() {
    // an amplifier oracle capped at 2 photons per mode cannot meet the
    // closed-form tolerance; the suite must report failure
    let out = qmodes(&["validate", "--nmax", "2"]);
    assert_eq!(out.status.code(), Some(1));
}
