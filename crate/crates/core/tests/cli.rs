//! End-to-end checks of the command-line surface: verb round trips, output
//! artifacts, determinism and the exit-code contract (0 ok, 1 usage,
//! 2 infeasible/invalid, 3 internal limit).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aionet"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn aionet")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_tiny_generation_config(path: &Path) {
    std::fs::write(
        path,
        r#"{ "n_nodes": 2, "n_aps": 1, "horizon": 6, "messages_per_pair": [1, 1],
             "max_window_len": 2, "sigma": [0.5, 0.5] }"#,
    )
    .unwrap();
}

#[test]
fn generate_solve_check_aoi_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("gen.json");
    let scenario = dir.path().join("scenario.json");
    let schedule = dir.path().join("schedule.json");
    let solution = dir.path().join("solution.json");
    let metrics = dir.path().join("aoi.json");
    write_tiny_generation_config(&config);

    let gen = run(&[
        "scenario",
        "gen",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        scenario.to_str().unwrap(),
    ]);
    assert!(gen.status.success(), "{gen:?}");
    assert!(stdout(&gen).contains("2 nodes + 1 APs"));

    let solve = run(&[
        "solve",
        "--scenario",
        scenario.to_str().unwrap(),
        "--gap",
        "0",
        "--out",
        solution.to_str().unwrap(),
        "--schedule-out",
        schedule.to_str().unwrap(),
    ]);
    assert!(solve.status.success(), "{solve:?}");
    assert!(stdout(&solve).contains("proof     optimal"));
    assert!(solution.exists() && schedule.exists());

    let check = run(&[
        "check",
        "--scenario",
        scenario.to_str().unwrap(),
        "--schedule",
        schedule.to_str().unwrap(),
    ]);
    assert!(check.status.success(), "{check:?}");
    assert!(stdout(&check).contains("feasible"));

    let aoi = run(&[
        "aoi",
        "--scenario",
        scenario.to_str().unwrap(),
        "--schedule",
        schedule.to_str().unwrap(),
        "--out",
        metrics.to_str().unwrap(),
    ]);
    assert!(aoi.status.success(), "{aoi:?}");
    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert!(body["mean_aoi"].as_f64().unwrap() > 0.0);
    assert!(!body["streams"].as_array().unwrap().is_empty());
}

#[test]
fn solving_from_a_seed_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("gen.json");
    write_tiny_generation_config(&config);
    let args = [
        "solve",
        "--seed",
        "3",
        "--config",
        config.to_str().unwrap(),
        "--gap",
        "0",
    ];
    let once = run(&args);
    let twice = run(&args);
    assert!(once.status.success());
    assert_eq!(stdout(&once), stdout(&twice));
}

#[test]
fn usage_errors_exit_1() {
    let no_verb = run(&[]);
    assert_eq!(no_verb.status.code(), Some(1));
    let bad_flag = run(&["solve", "--does-not-exist"]);
    assert_eq!(bad_flag.status.code(), Some(1));
    let no_source = run(&["solve"]);
    assert_eq!(no_source.status.code(), Some(1));
    let bad_alpha = run(&["solve", "--seed", "1", "--alpha", "0.9,0.9,0.9"]);
    assert_eq!(bad_alpha.status.code(), Some(1));
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn invalid_inputs_exit_2() {
    let missing = run(&["check", "--seed", "1", "--schedule", "/nonexistent/s.json"]);
    assert_eq!(missing.status.code(), Some(2));

    // An infeasible schedule: same exit class, violations on stdout.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("gen.json");
    let scenario = dir.path().join("scenario.json");
    let schedule = dir.path().join("schedule.json");
    write_tiny_generation_config(&config);
    assert!(run(&[
        "scenario",
        "gen",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        scenario.to_str().unwrap(),
    ])
    .status
    .success());
    std::fs::write(
        &schedule,
        r#"{ "schema_version": 1,
             "schedule": { "n_devices": 3, "horizon": 6, "transmissions": [
               { "sender": 0, "receiver": 0, "tech": "rf", "step": 0 } ] } }"#,
    )
    .unwrap();
    let check = run(&[
        "check",
        "--scenario",
        scenario.to_str().unwrap(),
        "--schedule",
        schedule.to_str().unwrap(),
    ]);
    assert_eq!(check.status.code(), Some(2));
    assert!(stdout(&check).contains("self_loop"));
}

#[test]
fn search_space_refusal_exits_3() {
    // Default-scale generation is far beyond exhaustive enumeration.
    let brute = run(&["solve", "--seed", "1", "--method", "brute"]);
    assert_eq!(brute.status.code(), Some(3));
}

#[test]
fn campaign_manifest_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    std::fs::write(
        &config,
        r#"{ "generation": { "n_nodes": 2, "n_aps": 1, "horizon": 6,
                             "messages_per_pair": [1, 1], "max_window_len": 2,
                             "sigma": [0.5, 0.5] },
             "mode": "hybrid", "iterations": 3, "seed_base": 5,
             "solver": { "gap_target": 0.0, "node_limit": null } }"#,
    )
    .unwrap();
    let run_out = run(&[
        "campaign",
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        first.to_str().unwrap(),
    ]);
    assert!(run_out.status.success(), "{run_out:?}");

    let rerun = run(&[
        "campaign",
        "run",
        "--manifest",
        first.join("manifest.json").to_str().unwrap(),
        "--out-dir",
        second.to_str().unwrap(),
    ]);
    assert!(rerun.status.success(), "{rerun:?}");
    for name in ["manifest.json", "iterations.csv", "aggregates.csv", "aoi_trajectories.csv"] {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap(),
            "{name} differs"
        );
    }

    // Overrides are meaningless on an exact rerun.
    let refused = run(&[
        "campaign",
        "run",
        "--manifest",
        first.join("manifest.json").to_str().unwrap(),
        "--iterations",
        "9",
    ]);
    assert_eq!(refused.status.code(), Some(1));
}

#[test]
fn sweep_emits_csv_with_expected_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("gen.json");
    let out = dir.path().join("pareto.csv");
    write_tiny_generation_config(&config);
    let sweep = run(&[
        "sweep",
        "alpha1",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        "0,1",
        "--seeds",
        "2",
        "--gap",
        "0",
        "--node-limit",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(sweep.status.success(), "{sweep:?}");
    let body = std::fs::read_to_string(&out).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("alpha1,energy_pct,delay_pct,n_scheduled,zero_delay"));
    // Pure energy weight sits at the zero-energy/full-delay corner.
    let last = lines.last().unwrap();
    assert!(last.starts_with("1,0,100,"), "unexpected extreme row: {last}");
}

#[test]
fn export_lp_writes_a_reparsable_model() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("gen.json");
    let out = dir.path().join("model.lp");
    write_tiny_generation_config(&config);
    let export = run(&[
        "export",
        "lp",
        "--seed",
        "3",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(export.status.success(), "{export:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    let parsed = aionet::parse_lp_string(&text).unwrap();
    assert!(parsed.minimize);
    assert!(!parsed.constraints.is_empty());
}
