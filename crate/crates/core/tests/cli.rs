use std::path::Path;
use std::process::{Command, Output};

use handbrain::session::{read_log, replay_session};

fn handbrain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_handbrain")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = handbrain(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    handbrain(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["train", "--help"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["simulate", "--frobnicate"]), 1);
    assert_eq!(code(&["fragility"]), 1, "needs --fen or --pgn");
    assert_eq!(code(&["train", "--data", "/nonexistent/missing.csv"]), 2);
    assert_eq!(code(&["fragility", "--fen", "not a fen"]), 2);
    assert_eq!(code(&["replay", "--log", "/nonexistent.jsonl"]), 2);
}

#[test]
fn simulate_extract_train_eval_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let logs = dir.path().join("logs");
    let data = dir.path().join("data.csv");
    ok(&["simulate", "--sessions", "2", "--turns", "10", "--seed", "7", "--logdir", p(&logs)]);
    assert!(logs.join("sim-000.jsonl").exists() && logs.join("sim-001.jsonl").exists());

    ok(&["extract", "--logdir", p(&logs), "--out", p(&data)]);
    for name in ["data.csv", "data.train.csv", "data.test.csv", "data.split.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }

    let model = dir.path().join("model.json");
    ok(&["train", "--data", p(&dir.path().join("data.train.csv")), "--out", p(&model), "--trees", "10"]);
    let metrics: serde_json::Value =
        serde_json::from_str(&ok(&["eval", "--model", p(&model), "--data", p(&dir.path().join("data.test.csv"))]))
            .unwrap();
    for key in ["f1", "accuracy"] {
        let v = metrics[key].as_f64().unwrap_or_else(|| panic!("{key} in {metrics}"));
        assert!((0.0..=1.0).contains(&v));
    }
    let c = &metrics["confusion"];
    let total: u64 = ["tp", "fp", "tn", "fn"].iter().map(|k| c[k].as_u64().unwrap()).sum();
    assert_eq!(total, metrics["rows"].as_u64().unwrap());

    let report = dir.path().join("report.json");
    ok(&["analyze", "--data", p(&data), "--out", p(&report)]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(report["variables"].as_array().unwrap().len(), 6);
}

#[test]
fn explicit_flags_beat_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let logs = dir.path().join("logs");
    std::fs::write(
        &cfg,
        serde_json::json!({"seed": 7, "simulate": {"sessions": 1, "turns": 3, "prefix": "cfg", "logdir": p(&logs)}})
            .to_string(),
    )
    .unwrap();
    ok(&["--config", p(&cfg), "simulate", "--turns", "4"]);
    let events = read_log(&logs.join("cfg-000.jsonl")).unwrap();
    assert_eq!(replay_session(&events).unwrap().turns.len(), 4);

    std::fs::write(&cfg, r#"{"simulate": {"sessions": "many"}}"#).unwrap();
    assert_eq!(code(&["--config", p(&cfg), "simulate"]), 1);
}

#[test]
fn replay_and_fragility_read_simulated_games() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["simulate", "--sessions", "1", "--turns", "5", "--seed", "3", "--logdir", p(dir.path())]);
    let log = dir.path().join("sim-000.jsonl");
    let state = replay_session(&read_log(&log).unwrap()).unwrap();

    for k in 1..=state.turns.len() {
        let fen = ok(&["replay", "--log", p(&log), "--turn", &k.to_string()]);
        assert_eq!(fen.trim(), state.turns[k - 1].fen_after);
    }
    let start = ok(&["replay", "--log", p(&log), "--turn", "0"]);
    assert_eq!(start.trim(), handbrain::chess::Position::startpos().to_fen());
    let text = ok(&["replay", "--log", p(&log)]);
    assert!(text.contains(&format!("final {}", state.position.to_fen())));

    let pgn = dir.path().join("game.pgn");
    std::fs::write(&pgn, ok(&["replay", "--log", p(&log), "--format", "pgn"])).unwrap();
    let lines = ok(&["fragility", "--pgn", p(&pgn), "--json"]);
    let plies: Vec<serde_json::Value> = lines.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(plies.len(), state.moves.len() + 1);
    assert_eq!(plies.last().unwrap()["fen"], state.position.to_fen());

    let table = ok(&["fragility", "--fen", "r3k3/8/8/8/8/8/8/R3K3 w - - 0 1"]);
    assert!(table.starts_with("fragility "));
}
