//! End-to-end checks of the command-line surface: subcommands, artifact
//! formats, exit codes, and byte-level reproducibility of reruns.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phaselab"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const OBSTACLE: &str = r#"{
    "schema_version": 1,
    "problem": {
        "p": 2.0, "gamma": 1.0,
        "lambda_plus": 1.0, "lambda_minus": 0.0,
        "domain": {"Interval": {"a": -1.0, "b": 1.0}},
        "boundary": {"Ends": {"left": 0.0, "right": 0.25}}
    },
    "solver": {"grid_n": 128}
}"#;

const JET: &str = r#"{
    "schema_version": 1,
    "problem": {
        "p": 2.0, "gamma": 0.0,
        "lambda_plus": 2.0, "lambda_minus": 1.0,
        "domain": {"Interval": {"a": -1.0, "b": 1.0}},
        "boundary": {"Ends": {"left": -1.0, "right": 1.0}}
    },
    "solver": {"grid_n": 128},
    "oracle": {"jet": {"left_value": -1.0, "right_value": 1.0}}
}"#;

#[test]
fn solve_writes_expected_artifacts_and_is_reproducible() {
    let tmp = std::env::temp_dir().join("phaselab_cli_solve");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    let config = write_config(&tmp, "config.json", OBSTACLE);

    for run in ["a", "b"] {
        let out = tmp.join(run);
        let status = bin()
            .args(["solve", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--check", "--plot", "--seed", "11"])
            .status()
            .unwrap();
        assert!(status.success(), "solve run {run} failed");
    }

    for name in ["solution.csv", "solve_report.json", "energy_trace.csv", "plots/solution.svg"] {
        let a = std::fs::read(tmp.join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.join("b").join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
        assert!(!a.is_empty());
    }

    // solution CSV schema: header then coordinate,value rows
    let csv = std::fs::read_to_string(tmp.join("a/solution.csv")).unwrap();
    assert!(csv.starts_with("x,u\n"));
    assert_eq!(csv.lines().count(), 1 + 129);

    // energy trace schema
    let trace = std::fs::read_to_string(tmp.join("a/energy_trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,stage,epsilon,energy,grad_norm\n"));

    // report subcommand summarizes the artifacts
    let output = bin().args(["report", "--out"]).arg(tmp.join("a")).output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("solve:"), "summary was: {text}");
}

#[test]
fn invalid_configs_exit_2() {
    let tmp = std::env::temp_dir().join("phaselab_cli_invalid");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();

    // lambda_minus >= lambda_plus
    let bad = OBSTACLE.replace("\"lambda_minus\": 0.0", "\"lambda_minus\": 3.0");
    let config = write_config(&tmp, "bad.json", &bad);
    let status = bin().args(["solve", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(2));

    // unknown key
    let unknown = OBSTACLE.replace("\"solver\"", "\"solvar\"");
    let config = write_config(&tmp, "unknown.json", &unknown);
    let status = bin().args(["solve", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(2));

    // gamma = 0 through the solve command
    let gamma0 = OBSTACLE.replace("\"gamma\": 1.0", "\"gamma\": 0.0");
    let config = write_config(&tmp, "gamma0.json", &gamma0);
    let status = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(tmp.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // empty sweep list
    let sweep = OBSTACLE.replace(
        "\"solver\": {\"grid_n\": 128}",
        "\"solver\": {\"grid_n\": 128}, \"sweep\": {\"gammas\": [], \"ps\": [2.0], \"qs\": [null]}",
    );
    let config = write_config(&tmp, "sweep.json", &sweep);
    let status = bin().args(["sweep", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn continue_and_oracle_agree_on_the_jet() {
    let tmp = std::env::temp_dir().join("phaselab_cli_jet");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    let config = write_config(&tmp, "config.json", JET);

    let cont_out = tmp.join("cont");
    let status = bin()
        .args(["continue", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&cont_out)
        .arg("--check")
        .status()
        .unwrap();
    assert!(status.success(), "continue --check failed");

    let oracle_out = tmp.join("oracle");
    let status = bin()
        .args(["oracle", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&oracle_out)
        .status()
        .unwrap();
    assert!(status.success());

    let cont: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(cont_out.join("continuation_report.json")).unwrap(),
    )
    .unwrap();
    let oracle: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(oracle_out.join("oracle_report.json")).unwrap(),
    )
    .unwrap();
    let j0 = cont["j0_per_stage"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    let j_oracle = oracle["jet"]["energy"].as_f64().unwrap();
    assert!(
        (j0 - j_oracle).abs() / j_oracle <= 0.01,
        "continuation J0 {j0} vs oracle {j_oracle}"
    );

    // default schedule was applied and noted
    assert_eq!(cont["default_schedule_applied"], serde_json::Value::Bool(true));
}

#[test]
fn diagnose_reads_solution_csv() {
    let tmp = std::env::temp_dir().join("phaselab_cli_diag");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    // N = 256: the growth fit needs four dyadic scales between its 4h
    // floor and the half-distance-to-boundary cap
    let config_text = OBSTACLE.replace("\"grid_n\": 128", "\"grid_n\": 256");
    let config = write_config(&tmp, "config.json", &config_text);

    // produce a solution, then diagnose it from the CSV
    let solve_out = tmp.join("solve");
    assert!(bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&solve_out)
        .status()
        .unwrap()
        .success());

    let diag_config = config_text.replace(
        "\"solver\": {\"grid_n\": 256}",
        &format!(
            "\"solver\": {{\"grid_n\": 256}}, \"diagnostics\": {{\"input_solution\": {:?}}}",
            solve_out.join("solution.csv").to_str().unwrap()
        ),
    );
    let diag_path = write_config(&tmp, "diag.json", &diag_config);
    let diag_out = tmp.join("diag");
    assert!(bin()
        .args(["diagnose", "--config"])
        .arg(&diag_path)
        .arg("--out")
        .arg(&diag_out)
        .arg("--check")
        .status()
        .unwrap()
        .success());

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(diag_out.join("regularity_report.json")).unwrap(),
    )
    .unwrap();
    let growth = report["report"]["growth"]["exponent"].as_f64().unwrap();
    assert!((growth - 2.0).abs() / 2.0 <= 0.10, "growth exponent {growth}");
}

#[test]
fn sweep_rows_deterministic_across_thread_counts() {
    let tmp = std::env::temp_dir().join("phaselab_cli_sweep");
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();
    let sweep = OBSTACLE.replace(
        "\"solver\": {\"grid_n\": 128}",
        "\"solver\": {\"grid_n\": 128}, \"sweep\": {\"gammas\": [0.5, 1.0], \"ps\": [2.0], \"qs\": [null]}",
    );
    let config = write_config(&tmp, "config.json", &sweep);

    for (run, threads) in [("a", "1"), ("b", "4")] {
        let out = tmp.join(run);
        assert!(bin()
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .status()
            .unwrap()
            .success());
    }
    let a = std::fs::read(tmp.join("a/sweep.csv")).unwrap();
    let b = std::fs::read(tmp.join("b/sweep.csv")).unwrap();
    assert_eq!(a, b, "sweep.csv depends on worker count");
}
