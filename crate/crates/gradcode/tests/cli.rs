//! End-to-end checks of the `gradcode` binary: exit codes, output files,
//! CSV headers and replay determinism through the real subcommand surface.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gradcode(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradcode"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).expect("config written");
    path.to_string_lossy().into_owned()
}

const FIVE_WORKER: &str = r#"{
  "placement": {"n_workers":5,"n_partitions":5,
    "gamma":[[1,2,3,4,5],[1,2,3],[1],[2,3,4,5],[1,4,5]]},
  "scheme": {"s":1,"a":0,"d":4,"arithmetic":"rational"}
}"#;

#[test]
fn plan_prints_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", FIVE_WORKER);

    let out = gradcode(&["plan", "--config", &cfg], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("feasible"));
    assert!(text.contains("yes"));
    assert!(text.contains("2 symbols/worker"));

    let out = gradcode(&["plan", "--config", &cfg, "--json"], dir.path());
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["cost"], "2");
    assert_eq!(parsed["m"], 2);
    assert_eq!(parsed["feasible"], "yes");
}

#[test]
fn malformed_config_exits_2_with_silent_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{ not json");
    let out = gradcode(&["plan", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty(), "stdout must stay silent on config errors");
    assert!(!out.stderr.is_empty());

    // Unknown keys are config errors too.
    let cfg = write_config(
        dir.path(),
        "unknown.json",
        r#"{"placement": {"n_workers":1,"n_partitions":1,"gamma":[[1]]},
            "scheme": {"s":0,"a":0,"d":2}, "extra": true}"#,
    );
    let out = gradcode(&["plan", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_result_round_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", FIVE_WORKER);
    let out = gradcode(
        &["run", "--config", &cfg, "--seed", "3", "--out", "artifacts", "--json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["matches_oracle"], true);

    let round = fs::read_to_string(dir.path().join("artifacts/round.csv")).unwrap();
    assert!(round.starts_with("worker,latency,responded,corrupted,flagged\n"));
    assert_eq!(round.lines().count(), 6);
    assert!(dir.path().join("artifacts/result.json").exists());
    assert!(dir.path().join("artifacts/manifest.json").exists());
}

#[test]
fn replayed_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", FIVE_WORKER);
    let out = gradcode(
        &["run", "--config", &cfg, "--seed", "9", "--out", "first"],
        dir.path(),
    );
    assert!(out.status.success());

    let manifest = dir.path().join("first/manifest.json");
    let out = gradcode(
        &[
            "run",
            "--config",
            manifest.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            "second",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    for file in ["result.json", "round.csv", "manifest.json"] {
        let a = fs::read(dir.path().join("first").join(file)).unwrap();
        let b = fs::read(dir.path().join("second").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs under replay");
    }
}

#[test]
fn approx_run_in_float_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        r#"{
          "placement": {"generate": {"n_workers":12,"n_partitions":4,"r_target":11,"kind":"uniform"}},
          "scheme": {"s":1,"a":0,"d":6,"m":2,"arithmetic":"float64","cutoff":{"count":9}}
        }"#,
    );
    let out = gradcode(
        &["run", "--config", &cfg, "--mode", "approx", "--out", "out", "--json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["responders"].as_array().unwrap().len(), 9);
    assert!(result["max_abs_error"].as_f64().unwrap().is_finite());

    // The same command in rational arithmetic is a config error.
    let cfg = write_config(
        dir.path(),
        "rat.json",
        r#"{
          "placement": {"generate": {"n_workers":12,"n_partitions":4,"r_target":11,"kind":"uniform"}},
          "scheme": {"s":1,"a":0,"d":6,"m":2}
        }"#,
    );
    let out = gradcode(
        &["run", "--config", &cfg, "--mode", "approx", "--out", "out2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn matrix_run_recovers_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        r#"{
          "placement": {"generate": {"n_workers":6,"n_partitions":3,"r_target":5,"kind":"uniform"}},
          "scheme": {"s":1,"a":0,"d":3,"deg_h":2}
        }"#,
    );
    let out = gradcode(
        &["run", "--config", &cfg, "--mode", "matrix", "--out", "m", "--json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["matches_oracle"], true);
    assert_eq!(result["mode"], "matrix");
}

#[test]
fn train_writes_loss_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        r#"{
          "placement": {"n_workers":5,"n_partitions":5,
            "gamma":[[1,2,3,4,5],[1,2,3],[1],[2,3,4,5],[1,4,5]]},
          "scheme": {"s":1,"a":0,"d":4,"arithmetic":"rational"},
          "train": {"synthetic":{"n_samples":20,"n_features":4,"noise":0.125},
                    "k_partitions":5,"eta":0.05,"iterations":6,"mode":"exact"}
        }"#,
    );
    let out = gradcode(
        &["train", "--config", &cfg, "--seed", "4", "--out", "t"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("t/train.csv")).unwrap();
    assert!(csv.starts_with("iter,loss,responders,decoder,bound\n"));
    assert_eq!(csv.lines().count(), 7);
    // Losses decrease on this synthetic problem.
    let losses: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(losses.last().unwrap() < losses.first().unwrap());
}

#[test]
fn analyze_emits_requested_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = gradcode(
        &["analyze", "--kind", "lebesgue", "--sizes", "8,16", "--s1", "2"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("n,s1,lambda_estimate,lambda_bound\n"));
    assert_eq!(csv.trim_end().lines().count(), 3);

    let out = gradcode(
        &["analyze", "--kind", "bounds", "--sizes", "16", "--s1", "2", "--out", "b.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert!(csv.starts_with("n,s1,lambda_estimate,lambda_bound,emp_error,bound\n"));

    // Unknown kinds are usage errors (exit 2 via argument parsing).
    let out = gradcode(&["analyze", "--kind", "nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    // --json re-encodes the same table as records.
    let out = gradcode(
        &["analyze", "--kind", "lebesgue", "--sizes", "8", "--s1", "1", "--json"],
        dir.path(),
    );
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["n"], 8.0);
}

#[test]
fn supplied_gradients_decode_exactly() {
    let dir = tempfile::tempdir().unwrap();
    // One CSV row per partition; decimal values quantize exactly in
    // rational mode.
    fs::write(
        dir.path().join("grads.csv"),
        "1.5, -2, 0.25, 3\n0.5, 1, -1.25, 2\n-1, 0, 4.75, -0.5\n2, 2, 2, 2\n0, -3.5, 1, 0\n",
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        r#"{
          "placement": {"n_workers":5,"n_partitions":5,
            "gamma":[[1,2,3,4,5],[1,2,3],[1],[2,3,4,5],[1,4,5]]},
          "scheme": {"s":1,"a":0,"d":4,"gradients":{"file":"grads.csv"}}
        }"#,
    );
    let out = gradcode(
        &["run", "--config", &cfg, "--out", "g", "--json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["matches_oracle"], true);
    // Column sums of the CSV above: 3, -2.5, 6.75, 6.5.
    let agg: Vec<&str> = result["aggregate"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(agg, vec!["3", "-5/2", "27/4", "13/2"]);

    // Inline JSON arrays work the same way, mixing numbers and fractions.
    let cfg = write_config(
        dir.path(),
        "inline.json",
        r#"{
          "placement": {"n_workers":3,"n_partitions":2,"gamma":[[1,2],[1,2],[1,2]]},
          "scheme": {"s":1,"a":0,"d":2,
            "gradients":[[1, "1/3"], ["-2/3", 0.5]]}
        }"#,
    );
    let out = gradcode(
        &["run", "--config", &cfg, "--out", "g2", "--json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let agg: Vec<&str> = result["aggregate"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(agg, vec!["1/3", "5/6"]);
}

#[test]
fn witness_and_selftest_round_out_the_surface() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "thin.json",
        r#"{
          "placement": {"n_workers":3,"n_partitions":2,"gamma":[[1,2],[1,2],[2]]},
          "scheme": {"s":0,"a":1,"d":2}
        }"#,
    );
    let out = gradcode(&["witness", "--config", &cfg, "--json"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["applicable"], true);
    assert_eq!(report["witness"]["stacks_identical"], true);

    let cfg = write_config(dir.path(), "five.json", FIVE_WORKER);
    let out = gradcode(&["selftest", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("0 failures"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", FIVE_WORKER);
    let run = || {
        let out = gradcode(
            &["plan", "--config", &cfg, "--seed", "7", "--json"],
            dir.path(),
        );
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());

    let analyze = || {
        let out = gradcode(
            &["analyze", "--kind", "condition", "--sizes", "4,8", "--seed", "1"],
            dir.path(),
        );
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(analyze(), analyze());
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", FIVE_WORKER);
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_gradcode"))
            .args(["selftest", "--config", &cfg, "--seed", "2", "--json"])
            .env("GRADCODE_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .expect("binary runs");
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}
