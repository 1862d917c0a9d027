//! End-to-end tests of the `qotto` binary.

use std::fs;
use std::process::{Command, Output};

fn qotto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qotto")).args(args).env_remove("QOTTO_WORKERS").output().expect("run qotto")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn copy_sweep_has_one_row_per_copy_number() {
    let out = qotto(&["sweep-n", "--preset", "fig3", "--n-max", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[0].starts_with("N,W,W_per_copy,Q_h,Q_c,"));
    assert!(lines[1].starts_with("1,"));
    assert!(lines[10].starts_with("10,"));
    // the asymptote is a constant column
    let k = lines[0].split(',').position(|c| c == "eta_manybody").unwrap();
    assert!(lines[1..].iter().all(|l| l.split(',').nth(k) == Some("7.24782526566e-2")));
}

#[test]
fn crossings_of_three_fig2d_copies() {
    let out = qotto(&["crossings", "--preset", "fig2d", "--copies", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "{text}");
    assert!(rows[0].contains("k=(0,3,0)") && rows[0].contains("k=(1,0,2)"));
    assert!(rows[0].contains("(1,1,1)") && rows[0].contains("(0,2,2)"));
    assert!(rows[0].contains("6.66666666667e-1"));
}

#[test]
fn selftest_passes() {
    let out = qotto(&["selftest"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}{}", stderr(&out));
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn many_body_limit_of_fig2ab() {
    let out = qotto(&["limit", "--preset", "fig2ab"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("3.81100798314e-1,"));
}

#[test]
fn single_cycle_in_json() {
    let out = qotto(&["run-cycle", "--preset", "fig2ab", "--copies", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.trim_start().starts_with('{') && text.contains("\"columns\"") && text.contains("\"perfect\""));
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.csv", "b.csv"].iter().map(|n| dir.path().join(n)).collect();
    for (path, workers) in paths.iter().zip(["1", "4"]) {
        let out = qotto(&[
            "sweep-tau", "--preset", "fig2ab", "--tau-min", "0.01", "--tau-max", "10", "--tau-points", "4",
            "--workers", workers, "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let a = fs::read(&paths[0]).unwrap();
    assert_eq!(a, fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("tau,p_n_B,p_m_B,delta_E_B,W,Q_h,Q_c,eta,eta_over_carnot,engine,steps,status\n"));
}

#[test]
fn config_file_runs_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    fs::write(
        &good,
        r#"{"params": {"e0": 0, "e1_initial": 0.595, "e1_shift": 0.125, "e2": 1}, "beta_c": 1.85, "beta_h": 1.71, "n_max": 4}"#,
    )
    .unwrap();
    let out = qotto(&["sweep-n", "--config", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 5);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"params": {"e0": 0, "e1_initial": 0.5, "e1_shift": 0.1, "e2": 1}, "beta_c": 2, "beta_h": 1, "betah": 1}"#)
        .unwrap();
    let out = qotto(&["sweep-n", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("betah"), "{}", stderr(&out));
}

#[test]
fn validation_errors_exit_with_one() {
    let unknown = qotto(&["limit", "--preset", "fig4"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(stderr(&unknown).contains("unknown preset 'fig4'"));

    let dir = tempfile::tempdir().unwrap();
    let inverted = dir.path().join("inverted.json");
    fs::write(&inverted, r#"{"params": {"e0": 0, "e1_initial": 0.5, "e1_shift": 0.1, "e2": 1}, "beta_c": 1, "beta_h": 2}"#)
        .unwrap();
    let out = qotto(&["limit", "--config", inverted.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("beta_c > beta_h > 0"));

    // two fig3 copies have no crossing, so there is no pair for the pulse
    let out = qotto(&["sweep-tau", "--preset", "fig3", "--copies", "2", "--tau", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no collective level crossing"));

    assert_eq!(qotto(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(qotto(&["limit"]).status.code(), Some(1));
}

#[test]
fn non_convergence_exits_with_two() {
    let out = qotto(&["run-cycle", "--preset", "fig2ab", "--tau", "10", "--steps", "4", "--max-steps", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("did not converge"));
}
