use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_crn-noma");

fn table1() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table1.json")
}

fn crn(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CRN_GAME_CONFIG")
        .output()
        .expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_writes_result_json() {
    let dir = tempfile::tempdir().unwrap();
    let eq = dir.path().join("eq.json");
    let out = crn(&[
        "solve",
        "--config",
        table1().to_str().unwrap(),
        "--out",
        eq.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sum_su_utility"));

    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&eq).unwrap()).unwrap();
    for key in [
        "final_powers",
        "su_utilities",
        "pu_utilities",
        "sum_su_utility",
        "admitted_sus",
        "iterations_used",
        "converged",
        "residual_history",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["converged"], true);

    let verify = crn(&[
        "verify",
        "--config",
        table1().to_str().unwrap(),
        eq.to_str().unwrap(),
    ]);
    assert_eq!(status(&verify), 0, "{}", stderr(&verify));
    assert!(String::from_utf8_lossy(&verify.stdout).contains("passed = true"));
}

#[test]
fn missing_config_is_status_one() {
    assert_eq!(status(&crn(&["solve", "--config", "missing.json"])), 1);
    assert_eq!(status(&crn(&["solve"])), 1);
}

#[test]
fn config_from_environment() {
    let out = Command::new(BIN)
        .args(["solve", "--quiet"])
        .env("CRN_GAME_CONFIG", table1())
        .output()
        .unwrap();
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn sweep_k_writes_78_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig1.csv");
    let out = crn(&[
        "sweep-k",
        "--config",
        table1().to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + 26 * 3);
}

#[test]
fn sweep_power_and_compare_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = table1();
    let power = dir.path().join("fig2.csv");
    let out = crn(&[
        "sweep-power",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        power.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    assert_eq!(
        std::fs::read_to_string(&power).unwrap().lines().count(),
        1 + 20
    );

    let cmp = dir.path().join("cmp.csv");
    let out = crn(&[
        "compare-oma",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max NOMA improvement"));
    assert_eq!(
        std::fs::read_to_string(&cmp).unwrap().lines().count(),
        1 + 52
    );
}

#[test]
fn sweep_needs_out() {
    assert_eq!(
        status(&crn(&["sweep-k", "--config", table1().to_str().unwrap()])),
        1
    );
}

#[test]
fn invariant_breaking_override_names_field() {
    let out = crn(&[
        "solve",
        "--config",
        table1().to_str().unwrap(),
        "--set",
        "noise_power=0",
    ]);
    assert_eq!(status(&out), 1);
    assert!(stderr(&out).contains("noise_power"));

    let out = crn(&[
        "solve",
        "--config",
        table1().to_str().unwrap(),
        "--set",
        "noise_powr=1",
    ]);
    assert_eq!(status(&out), 1);
    assert!(stderr(&out).contains("unknown config key"));
}

#[test]
fn overrides_reach_solver_options() {
    let dir = tempfile::tempdir().unwrap();
    let eq = dir.path().join("eq.json");
    let out = crn(&[
        "solve",
        "--config",
        table1().to_str().unwrap(),
        "--mode",
        "simultaneous",
        "--epsilon",
        "1e-9",
        "--set",
        "solver.initial_pu_power=1",
        "--out",
        eq.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let r: crn_noma::EquilibriumResult =
        serde_json::from_str(&std::fs::read_to_string(&eq).unwrap()).unwrap();
    assert!(r.final_residual().unwrap() <= 1e-9);
}

#[test]
fn non_convergence_is_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let eq = dir.path().join("eq.json");
    let cfg = table1();
    let out = crn(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--max-iters",
        "1",
        "--out",
        eq.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 2);
    // The last iterate is still written, flagged as not converged.
    let verify = crn(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        eq.to_str().unwrap(),
    ]);
    assert_eq!(status(&verify), 2);
}

#[test]
fn tampered_result_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let eq = dir.path().join("eq.json");
    let cfg = table1();
    let solve = crn(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        eq.to_str().unwrap(),
    ]);
    assert_eq!(status(&solve), 0);
    let mut r: crn_noma::EquilibriumResult =
        serde_json::from_str(&std::fs::read_to_string(&eq).unwrap()).unwrap();
    r.final_powers.su_powers[5] -= 0.1;
    std::fs::write(&eq, serde_json::to_string(&r).unwrap()).unwrap();

    let report = dir.path().join("report.json");
    let out = crn(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        eq.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 1);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let flagged = v["flagged_sus"].as_array().unwrap();
    assert!(flagged.contains(&serde_json::json!(5)));
    assert_eq!(v["worst_player"], serde_json::json!({ "su": 5 }));
}

#[test]
fn unwritable_output_is_status_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("no_such_dir").join("x.csv");
    let out = crn(&[
        "sweep-k",
        "--config",
        table1().to_str().unwrap(),
        "--out",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 3);
    let bad = dir.path().join("no_such_dir").join("eq.json");
    let out = crn(&[
        "solve",
        "--config",
        table1().to_str().unwrap(),
        "--out",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 3);
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = table1();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = crn(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(status(&out), 0);
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn unknown_flag_is_status_one() {
    assert_eq!(status(&crn(&["solve", "--bogus"])), 1);
    assert_eq!(status(&crn(&["--help"])), 0);
}
