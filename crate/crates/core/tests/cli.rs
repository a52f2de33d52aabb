use std::fs;
use std::path::Path;

use moga_hardness::cli::{run, EXIT_CONFIG, EXIT_IO};
use moga_hardness::experiment::SuiteReport;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("moga-hardness").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn evolve_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let (code, _, err) = invoke(&[
            "evolve",
            "--objective",
            "combined",
            "--seed",
            "7",
            "--generations",
            "20",
            "--out-dir",
            d.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let name = "trace_combined_ranked_7.csv";
    assert_eq!(files_in(&a), vec![name.to_string(), "trace_combined_ranked_7.json".to_string()]);
    assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
    let csv = fs::read_to_string(a.join(name)).unwrap();
    assert_eq!(csv.lines().count(), 21);

    // the JSON sidecar carries the effective configuration
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("trace_combined_ranked_7.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["command"], "evolve");
    assert_eq!(json["config"]["ga"]["evolution"]["generations"], 20);
    assert_eq!(json["config"]["ga"]["evolution"]["seed"], 7);
}

#[test]
fn rerunning_from_embedded_config_reproduces_trace() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let (code, _, err) = invoke(&[
        "evolve",
        "--objective",
        "usability",
        "--seed",
        "3",
        "--generations",
        "6",
        "--steps",
        "60",
        "--games",
        "4",
        "--out-dir",
        first.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.join("trace_usability_ranked_3.json")).unwrap()).unwrap();
    let ga = &json["config"]["ga"]["evolution"];
    let game = &json["config"]["settings"]["game"];
    let second = dir.path().join("second");
    let cfg = serde_json::json!({
        "seed": ga["seed"],
        "generations": ga["generations"],
        "population": ga["population_size"],
        "elite": ga["elite_count"],
        "objective": "usability",
        "steps": game["steps_max"],
        "games": game["games_per_eval"],
        "score-max": game["score_max"],
        "mu": game["challenge_mu"],
        "sigma": game["challenge_sigma"],
        "out-dir": second,
    });
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (code, _, err) = invoke(&["evolve", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(
        fs::read(first.join("trace_usability_ranked_3.csv")).unwrap(),
        fs::read(second.join("trace_usability_ranked_3.csv")).unwrap()
    );
}

#[test]
fn suite_writes_conventional_files_only_in_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let (code, stdout, err) = invoke(&[
        "suite",
        "--runs",
        "2",
        "--master-seed",
        "1",
        "--generations",
        "4",
        "--games",
        "2",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("Experiment #\tConvergence Time"));
    let expected: Vec<String> = {
        let mut v: Vec<String> = ["lifespan", "usability", "combined", "combined_unranked"]
            .iter()
            .flat_map(|s| [format!("{s}_1.csv"), format!("{s}_1.json")])
            .collect();
        v.sort();
        v
    };
    assert_eq!(files_in(&out), expected);
    assert_eq!(files_in(dir.path()), vec!["reports".to_string()]);
    let report = SuiteReport::from_json(&fs::read_to_string(out.join("combined_1.json")).unwrap()).unwrap();
    assert_eq!(report.records.len(), 2);
    assert_eq!(report.config.evolution.generations, 4);
    assert_eq!(report.config.game.games_per_eval, 2);
}

#[test]
fn replay_zero_predator_genome() {
    let dir = tempfile::tempdir().unwrap();
    let genome = dir.path().join("zero.json");
    fs::write(&genome, serde_json::to_string(&vec![0; 30]).unwrap()).unwrap();
    let (code, out, err) = invoke(&["replay", "--genome", genome.to_str().unwrap(), "--seed", "5", "--render"]);
    assert_eq!(code, 0, "{err}");
    let steps: Vec<&str> = out.lines().filter(|l| l.starts_with("t=")).collect();
    assert_eq!(steps.len(), 101);
    assert!(steps.iter().all(|l| l.contains("score=0")));
    assert!(steps.last().unwrap().starts_with("t=100 "));
    assert_eq!(out.lines().filter(|l| l.contains('A') && l.len() == 14).count(), 101);
    assert!(out.contains("outcome=TimedOut steps=100 score=0"));
}

#[test]
fn error_exit_codes() {
    let (code, _, err) = invoke(&["evolve", "--sigma", "0"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("--sigma"));
    let (code, _, _) = invoke(&["evolve", "--not-a-flag"]);
    assert_eq!(code, 2);
    let (code, _, _) = invoke(&[]);
    assert_eq!(code, 2);
    let (code, _, _) = invoke(&["replay", "--genome", "/nonexistent/genome.csv"]);
    assert_eq!(code, EXIT_IO);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "21,0,0").unwrap();
    let (code, _, err) = invoke(&["replay", "--genome", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("expected 30 genes"));

    // an occupied file path as output directory is an I/O failure
    let file = dir.path().join("file");
    fs::write(&file, "x").unwrap();
    let (code, _, _) = invoke(&["evolve", "--generations", "1", "--out-dir", file.to_str().unwrap()]);
    assert_eq!(code, EXIT_IO);

    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, 0);
    for cmd in ["evolve", "suite", "replay"] {
        assert!(out.contains(cmd));
    }
    let (_, out, _) = invoke(&["evolve", "--help"]);
    for flag in ["--seed", "--generations", "--steps", "--objective", "--mode", "--out-dir", "--raw", "--sigma", "--config"] {
        assert!(out.contains(flag), "{flag} missing from help");
    }
}
