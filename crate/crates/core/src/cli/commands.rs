use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use super::{read_json, write_text, AnalyzeArgs, Cli, CliError, Command, EvalArgs, ExtractArgs, FragilityArgs};
use super::{ReplayArgs, ReplayFormat, ServeArgs, Side, SimulateArgs, TrainArgs, UciArgs};
use crate::chess::{parse_pgn, Color, Position};
use crate::engine::{serve_uci, EngineConfig, EngineRole};
use crate::features::{extract_logs, is_task_feature, split_dataset, Dataset};
use crate::fragility::{fragility_report, FragilityReport};
use crate::learner::{evaluate_metrics, train, tune, BoostedModel, TrainParams};
use crate::session::serve::{ServeConfig, Server};
use crate::session::{list_logs, read_log, replay_prefix, replay_session, write_log, SessionState};
use crate::sim::{generate_many, SimConfig, TruthPolicy};
use crate::stats::analysis_report;

const DEFAULT_SEED: u64 = 0;

struct Ctx {
    seed: u64,
    verbose: bool,
    clock: Instant,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[{:>7.2}s] {}", self.clock.elapsed().as_secs_f64(), msg.as_ref());
        }
    }
}

pub(super) fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let ctx = Ctx {
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        verbose: cli.verbose,
        clock: Instant::now(),
    };
    match &cli.command {
        Command::Serve(a) => serve(&ctx, a),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Extract(a) => extract(&ctx, a),
        Command::Train(a) => train_cmd(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Analyze(a) => analyze(&ctx, a),
        Command::Fragility(a) => fragility(a),
        Command::Replay(a) => replay(a),
        Command::Uci(a) => uci(a),
    }
}

fn engine_config(path: Option<&Path>, role: EngineRole, depth: u32) -> Result<EngineConfig, CliError> {
    match path {
        Some(p) => Ok(EngineConfig::load(p)?),
        None => Ok(EngineConfig::builtin(role, depth)),
    }
}

fn serve(ctx: &Ctx, a: &ServeArgs) -> Result<(), CliError> {
    let mut cfg = ServeConfig::new(&a.logdir);
    cfg.teammate = engine_config(a.teammate.as_deref(), EngineRole::Teammate, 2)?.with_seed(ctx.seed);
    cfg.opponent = engine_config(a.opponent.as_deref(), EngineRole::Opponent, 2)?;
    cfg.team_color = match a.team_color {
        Side::White => Color::White,
        Side::Black => Color::Black,
    };
    cfg.k = a.k;
    if let Some(path) = &a.model {
        cfg.model = Some(Arc::new(BoostedModel::load(path)?));
    }
    let server = Server::bind(&format!("{}:{}", a.host, a.port), cfg)?;
    eprintln!("listening on ws://{}", server.local_addr()?);
    Ok(server.run()?)
}

fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<(), CliError> {
    let policy = match &a.policy {
        Some(p) => read_json::<TruthPolicy>(p)?,
        None => TruthPolicy::default(),
    };
    policy.validate().map_err(CliError::data)?;
    let cfg = SimConfig {
        turns: a.turns,
        teammate: engine_config(a.teammate.as_deref(), EngineRole::Teammate, 2)?,
        opponent: engine_config(a.opponent.as_deref(), EngineRole::Opponent, 2)?,
        ..SimConfig::default()
    };
    ctx.note(format!("simulating {} sessions of {} turns", a.sessions, a.turns));
    let logs = generate_many(&policy, &cfg, &a.prefix, ctx.seed, a.sessions)?;
    std::fs::create_dir_all(&a.logdir).map_err(|e| CliError::data(format!("{}: {e}", a.logdir.display())))?;
    for (i, events) in logs.iter().enumerate() {
        let path = a.logdir.join(format!("{}-{i:03}.jsonl", a.prefix));
        write_log(&path, events)?;
    }
    ctx.note(format!("wrote {} logs to {}", logs.len(), a.logdir.display()));
    Ok(())
}

/// `data.csv` -> `data.<part>.<ext>`
fn sibling(out: &Path, part: &str, ext: &str) -> PathBuf {
    let stem = out.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{part}.{ext}"))
}

fn extract(ctx: &Ctx, a: &ExtractArgs) -> Result<(), CliError> {
    let evaluator = engine_config(a.evaluator.as_deref(), EngineRole::Evaluator, 1)?;
    let paths = list_logs(&a.logdir)?;
    if paths.is_empty() {
        return Err(CliError::data(format!("no .jsonl logs in {}", a.logdir.display())));
    }
    let logs = paths.iter().map(|p| read_log(p)).collect::<Result<Vec<_>, _>>()?;
    ctx.note(format!("extracting {} logs with k={}", logs.len(), a.k));
    let rows = extract_logs(&logs, a.k, &evaluator)?;
    let split = split_dataset(&rows, ctx.seed)?;
    Dataset::new(split.all).write_csv(&a.out)?;
    Dataset::new(split.train).write_csv(&sibling(&a.out, "train", "csv"))?;
    Dataset::new(split.test).write_csv(&sibling(&a.out, "test", "csv"))?;
    let manifest = serde_json::to_string_pretty(&split.manifest).expect("manifest serializes");
    write_text(&sibling(&a.out, "split", "json"), &manifest)?;
    ctx.note(format!(
        "{} rows; {} train turns, {} test turns ({:.3} train)",
        rows.len(),
        split.manifest.train_turns,
        split.manifest.test_turns,
        split.manifest.train_fraction
    ));
    Ok(())
}

fn train_params(a: &TrainArgs) -> TrainParams {
    let mut p = TrainParams::default();
    if let Some(v) = a.trees {
        p.trees = v;
    }
    if let Some(v) = a.depth {
        p.max_depth = v;
    }
    if let Some(v) = a.learning_rate {
        p.learning_rate = v;
    }
    if let Some(v) = a.min_leaf {
        p.min_leaf = v;
    }
    if let Some(v) = a.lambda {
        p.lambda = v;
    }
    if let Some(v) = a.subsample {
        p.subsample = v;
    }
    if let Some(v) = a.gamma {
        p.loss.gamma = v;
    }
    if let Some(v) = a.alpha {
        p.loss.alpha = v;
    }
    if let Some(v) = a.beta {
        p.loss.beta = v;
    }
    p
}

fn train_cmd(ctx: &Ctx, a: &TrainArgs) -> Result<(), CliError> {
    let mut ds = Dataset::read_csv(&a.data)?;
    if a.no_task_features {
        ds = ds.without(is_task_feature);
    }
    let mut params = train_params(a);
    if a.tune {
        let report = tune(&ds, &params, ctx.seed)?;
        for t in &report.trials {
            ctx.note(format!(
                "depth {} lr {} gamma {}: validation F1 {:.4}",
                t.params.max_depth, t.params.learning_rate, t.params.loss.gamma, t.validation_f1
            ));
        }
        params = report.best;
    }
    ctx.note(format!("training on {} rows, {} features", ds.rows.len(), ds.feature_names.len()));
    let model = train(&ds, &params, ctx.seed)?;
    model.save(&a.out)?;
    ctx.note(format!("model {} -> {}", &model.digest()[..12], a.out.display()));
    Ok(())
}

fn eval(ctx: &Ctx, a: &EvalArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::usage(format!("threshold must be in [0, 1], got {}", a.threshold)));
    }
    let model = BoostedModel::load(&a.model)?;
    let ds = Dataset::read_csv(&a.data)?.select(&model.feature_names)?;
    let metrics = evaluate_metrics(&model, &ds, a.threshold)?;
    let json = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
    match &a.out {
        Some(path) => write_text(path, &json)?,
        None => println!("{json}"),
    }
    let mut table = String::from("feature                     gain\n");
    for f in &metrics.importance {
        table.push_str(&format!("{:<24} {:>10.4}\n", f.feature, f.gain));
    }
    eprint!("{table}");
    ctx.note(format!("F1 {:.4}, accuracy {:.4}", metrics.f1, metrics.accuracy));
    Ok(())
}

fn analyze(ctx: &Ctx, a: &AnalyzeArgs) -> Result<(), CliError> {
    let ds = Dataset::read_csv(&a.data)?;
    let report = analysis_report(&ds);
    ctx.note(format!(
        "{} turns: {} switch, {} no switch",
        report.turns, report.switch_turns, report.no_switch_turns
    ));
    match &a.out {
        Some(path) if path.extension().is_some_and(|e| e == "json") => write_text(path, &report.to_json()),
        Some(path) => write_text(path, &report.to_markdown()),
        None => {
            print!("{}", report.to_markdown());
            Ok(())
        }
    }
}

fn print_fragility(out: &mut impl Write, label: &str, r: &FragilityReport) -> io::Result<()> {
    writeln!(out, "{label}fragility {:.6}", r.score)?;
    writeln!(out, "  square piece betweenness attacked")?;
    for p in &r.pieces {
        writeln!(
            out,
            "  {:<6} {:<5} {:>11.4} {}",
            p.square,
            p.piece,
            p.betweenness,
            if p.attacked { "yes" } else { "" }
        )?;
    }
    Ok(())
}

fn fragility(a: &FragilityArgs) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let io_err = |e: io::Error| CliError::data(e.to_string());
    if let Some(fen) = &a.fen {
        let pos: Position = fen.parse().map_err(|e| CliError::data(format!("FEN: {e}")))?;
        let r = fragility_report(&pos);
        if a.json {
            writeln!(out, "{}", serde_json::to_string(&r).expect("report serializes")).map_err(io_err)?;
        } else {
            print_fragility(&mut out, "", &r).map_err(io_err)?;
        }
        return out.flush().map_err(io_err);
    }
    let path = a.pgn.as_ref().expect("clap requires --fen or --pgn");
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let games = parse_pgn(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    for (g, game) in games.iter().enumerate() {
        for (ply, pos) in game.positions().iter().enumerate() {
            let r = fragility_report(pos);
            if a.json {
                let line = serde_json::json!({
                    "game": g + 1,
                    "ply": ply,
                    "fen": pos.to_fen(),
                    "score": r.score,
                    "pieces": r.pieces,
                });
                writeln!(out, "{line}").map_err(io_err)?;
            } else {
                print_fragility(&mut out, &format!("game {} ply {ply}: ", g + 1), &r).map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let events = read_log(&a.log)?;
    let state = match a.turn {
        // a prefix is enough to look at an earlier board
        Some(_) => replay_prefix(&events)?,
        None => replay_session(&events)?,
    };
    if let Some(k) = a.turn {
        let fen = fen_after_turn(&state, k)?;
        match a.format {
            ReplayFormat::Json => println!("{}", serde_json::json!({ "turn": k, "fen": fen })),
            _ => println!("{fen}"),
        }
        return Ok(());
    }
    match a.format {
        ReplayFormat::Pgn => print!("{}", state.to_pgn().to_pgn()),
        ReplayFormat::Json => {
            let v = serde_json::json!({
                "session_id": state.session_id,
                "team_color": state.team_color.to_string(),
                "turns": state.turns,
                "final_fen": state.position.to_fen(),
                "result": state.result().map(|r| r.as_str()),
                "end_reason": state.end_reason,
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("replay serializes"));
        }
        ReplayFormat::Text => {
            println!("session {} ({} team)", state.session_id, state.team_color);
            for t in &state.turns {
                println!(
                    "{:>3} {:<5} {:<7} {:>6.2}s  {}",
                    t.index,
                    t.mode,
                    t.san,
                    t.thinking_time_s(),
                    t.fen_after
                );
            }
            println!("final {}", state.position.to_fen());
            if let Some(r) = state.result() {
                let reason = state.end_reason.map(|r| format!(" ({r:?})")).unwrap_or_default();
                println!("result {r}{reason}");
            }
        }
    }
    Ok(())
}

/// Board after team turn `k`; turn 0 is the starting position.
fn fen_after_turn(state: &SessionState, k: u32) -> Result<String, CliError> {
    if k == 0 {
        return Ok(state.start.to_fen());
    }
    state
        .turns
        .iter()
        .find(|t| t.index == k)
        .map(|t| t.fen_after.clone())
        .ok_or_else(|| CliError::data(format!("log has {} team turns, no turn {k}", state.turns.len())))
}

fn uci(a: &UciArgs) -> Result<(), CliError> {
    let role: EngineRole = serde_json::from_value(serde_json::Value::String(a.role.clone()))
        .map_err(|_| CliError::usage(format!("unknown role '{}'", a.role)))?;
    let cfg = EngineConfig::builtin(role, a.depth);
    serve_uci(io::stdin().lock(), io::stdout(), cfg).map_err(|e| CliError::engine(e.to_string()))
}
