//! The `handbrain` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 engine or
//! transport error. Diagnostics go to standard error.

mod commands;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::engine::EngineError;
use crate::features::FeatureError;
use crate::learner::LearnError;
use crate::session::serve::ServeError;
use crate::session::{LogError, ReplayError, SessionError};
use crate::sim::SimError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_ENGINE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "handbrain",
    version,
    about = "Hand-and-brain chess with switch prediction: play, simulate, extract, train, evaluate, analyze"
)]
pub struct Cli {
    /// Seed for simulation, splitting and training
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file presetting flags; flags given on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Progress messages on standard error
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Host hand-and-brain sessions over WebSocket
    #[command(args_override_self = true)]
    Serve(ServeArgs),
    /// Generate synthetic session logs from a known switching policy
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Turn session logs into a feature dataset with a train/test split
    #[command(args_override_self = true)]
    Extract(ExtractArgs),
    /// Train the switch classifier
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Score a model on a dataset
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Mann-Whitney comparison of switch and no-switch turns
    #[command(args_override_self = true)]
    Analyze(AnalyzeArgs),
    /// Fragility score of a position, or of every position in a PGN
    #[command(args_override_self = true)]
    Fragility(FragilityArgs),
    /// Re-derive a session's state from its log
    #[command(args_override_self = true)]
    Replay(ReplayArgs),
    /// Run the builtin engine as a UCI engine on stdin/stdout
    #[command(hide = true, args_override_self = true)]
    Uci(UciArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Teammate engine config (JSON); builtin when absent
    #[arg(long, value_name = "FILE")]
    pub teammate: Option<PathBuf>,
    /// Opponent engine config (JSON); builtin when absent
    #[arg(long, value_name = "FILE")]
    pub opponent: Option<PathBuf>,
    #[arg(long, default_value = "logs")]
    pub logdir: PathBuf,
    /// Model used to push switch predictions each second
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Local feature window for live predictions
    #[arg(long, default_value_t = 3, value_parser = window_size)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = Side::White)]
    pub team_color: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    White,
    Black,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 10)]
    pub sessions: u64,
    /// Team turns per session
    #[arg(long, default_value_t = 30)]
    pub turns: u32,
    /// Truth policy (JSON); the default logistic policy when absent
    #[arg(long, value_name = "FILE")]
    pub policy: Option<PathBuf>,
    #[arg(long, default_value = "logs")]
    pub logdir: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub teammate: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub opponent: Option<PathBuf>,
    /// Session id prefix
    #[arg(long, default_value = "sim")]
    pub prefix: String,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory of *.jsonl session logs
    #[arg(long)]
    pub logdir: PathBuf,
    /// Local feature window (3 or 5 turns)
    #[arg(long, default_value_t = 3, value_parser = window_size)]
    pub k: usize,
    /// All rows; train/test files and the split manifest go next to it
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
    /// Evaluator engine config (JSON); builtin depth 1 when absent
    #[arg(long, value_name = "FILE")]
    pub evaluator: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// Drop the evaluation, fragility and time columns
    #[arg(long)]
    pub no_task_features: bool,
    /// Choose hyperparameters on a validation holdout first
    #[arg(long)]
    pub tune: bool,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Focal-loss focusing exponent
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Focal-loss scale
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Time-weight exponent
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Metrics JSON file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// report.json or report.md; markdown on standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FragilityArgs {
    #[arg(long, required_unless_present = "pgn", conflicts_with = "pgn")]
    pub fen: Option<String>,
    /// Score every position of every game
    #[arg(long, value_name = "FILE")]
    pub pgn: Option<PathBuf>,
    /// JSON output, one line per position
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub log: PathBuf,
    /// Show the board after this many team turns
    #[arg(long)]
    pub turn: Option<u32>,
    #[arg(long, value_enum, default_value_t = ReplayFormat::Text)]
    pub format: ReplayFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReplayFormat {
    Text,
    Json,
    Pgn,
}

#[derive(Debug, Args)]
pub struct UciArgs {
    #[arg(long, default_value = "teammate")]
    pub role: String,
    #[arg(long, default_value_t = 2)]
    pub depth: u32,
}

fn window_size(s: &str) -> Result<usize, String> {
    match s {
        "3" => Ok(3),
        "5" => Ok(5),
        _ => Err(format!("window must be 3 or 5, got {s}")),
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: m.into(),
        }
    }

    pub fn data(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: m.into(),
        }
    }

    pub fn engine(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_ENGINE,
            message: m.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Config(_) => CliError::data(e.to_string()),
            _ => CliError::engine(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::Engine(e) => e.into(),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Engine(e) => e.into(),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Engine(e) => e.into(),
            SimError::Session(e) => e.into(),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<ServeError> for CliError {
    fn from(e: ServeError) -> Self {
        match e {
            ServeError::Engine(e) => e.into(),
            ServeError::Log(_) | ServeError::Model(_) => CliError::data(e.to_string()),
            _ => CliError::engine(e.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<LogError> for CliError {
    fn from(e: LogError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<ReplayError> for CliError {
    fn from(e: ReplayError) -> Self {
        CliError::data(e.to_string())
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

const SUBCOMMANDS: [&str; 9] = [
    "serve",
    "simulate",
    "extract",
    "train",
    "eval",
    "analyze",
    "fragility",
    "replay",
    "uci",
];

/// Turns a config object into flags for `sub`: top-level keys apply to
/// every subcommand, a nested object named after a subcommand only to it.
fn config_flags(config: &Value, sub: &str) -> Result<Vec<String>, CliError> {
    let Value::Object(map) = config else {
        return Err(CliError::usage("config file must hold a JSON object"));
    };
    let mut flags = Vec::new();
    let mut push = |key: &str, value: &Value| -> Result<(), CliError> {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => flags.push(flag),
            Value::String(s) => flags.extend([flag, s.clone()]),
            Value::Number(n) => flags.extend([flag, n.to_string()]),
            Value::Array(items) => {
                for v in items {
                    let text = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    flags.extend([flag.clone(), text]);
                }
            }
            Value::Object(_) => return Err(CliError::usage(format!("config key '{key}' cannot be an object"))),
        }
        Ok(())
    };
    for (key, value) in map {
        if SUBCOMMANDS.contains(&key.as_str()) {
            continue;
        }
        if key == "config" {
            return Err(CliError::usage("config files cannot name another config"));
        }
        push(key, value)?;
    }
    if let Some(section) = map.get(sub) {
        let Value::Object(inner) = section else {
            return Err(CliError::usage(format!("config section '{sub}' must be an object")));
        };
        for (key, value) in inner {
            push(key, value)?;
        }
    }
    Ok(flags)
}

/// Position of the subcommand token and the `--config` path, if any.
fn scan(args: &[String]) -> (Option<usize>, Option<String>) {
    let mut sub = None;
    let mut config = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--" {
            break;
        }
        if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(path) = a.strip_prefix("--config=") {
            config = Some(path.to_string());
        } else if a == "--seed" {
            i += 2;
            continue;
        } else if sub.is_none() && !a.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    (sub, config)
}

fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let (sub, config) = scan(&args);
    let (Some(config), Some(sub)) = (config, sub) else {
        return Ok(args);
    };
    let value: Value = read_json(Path::new(&config)).map_err(|e| CliError::usage(e.message))?;
    let name = args[sub].clone();
    let preset = config_flags(&value, &name)?;
    let mut out = args[..=sub].to_vec();
    out.extend(preset);
    out.extend(args[sub + 1..].iter().cloned());
    Ok(out)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn config_presets_come_before_explicit_flags() {
        let cfg: Value = serde_json::json!({
            "seed": 4,
            "verbose": true,
            "train": {"trees": 20, "no_task_features": true},
            "simulate": {"sessions": 3}
        });
        let flags = config_flags(&cfg, "train").unwrap();
        // key order within the object depends on serde_json's map features
        let mut sorted = flags.clone();
        sorted.sort();
        assert_eq!(sorted, strings(&["--no-task-features", "--seed", "--trees", "--verbose", "20", "4"]));
        let pos = |f: &str| flags.iter().position(|x| x == f).unwrap();
        assert_eq!(flags[pos("--seed") + 1], "4");
        assert_eq!(flags[pos("--trees") + 1], "20");
        let parsed = Cli::try_parse_from(
            strings(&["handbrain", "train"])
                .into_iter()
                .chain(flags)
                .chain(strings(&["--data", "d.csv", "--trees", "7"])),
        )
        .unwrap();
        let Command::Train(t) = parsed.command else { panic!() };
        assert_eq!((t.trees, t.no_task_features, parsed.seed), (Some(7), true, Some(4)));
    }

    #[test]
    fn scan_finds_subcommand_after_globals() {
        let args = strings(&["handbrain", "--seed", "3", "--config", "c.json", "eval", "--model", "m"]);
        assert_eq!(scan(&args), (Some(5), Some("c.json".into())));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["handbrain", "train", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["handbrain"]), EXIT_USAGE);
        assert_eq!(run(["handbrain", "extract", "--logdir", "x", "--k", "4"]), EXIT_USAGE);
        assert_eq!(run(["handbrain", "--help"]), EXIT_OK);
    }
}
