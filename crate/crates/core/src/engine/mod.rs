//! Engine bridge: evaluation, opponent play and the teammate's constrained
//! moves, either through an external UCI engine or the deterministic builtin.

mod builtin;
mod uci;
mod uci_server;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chess::{Color, Move, PieceType, Position};

pub use builtin::{fallback_move, sample_move, static_eval, BuiltinEngine};
pub use uci::UciEngine;
pub use uci_server::serve_uci;

/// Mate scores map to `±(MATE_SCORE - plies)` centipawns.
pub const MATE_SCORE: i32 = 30_000;

/// Default rating of the teammate engine.
pub const TEAMMATE_ELO: u32 = 1500;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("engine transport: {0}")]
    Transport(String),
    #[error("engine timed out: {0}")]
    Timeout(String),
    #[error("engine protocol: {0}")]
    Protocol(String),
    #[error("no move of type {0}")]
    NoMoveOfType(PieceType),
    #[error("no legal moves in position")]
    NoLegalMoves,
    #[error("engine config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineRole {
    Teammate,
    Opponent,
    Evaluator,
}

/// Exactly one search limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchLimit {
    Depth(u32),
    MovetimeMs(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub role: EngineRole,
    /// Executable path, or `"builtin"`.
    #[serde(default = "builtin_name")]
    pub engine: String,
    pub limit: SearchLimit,
    /// Strength limit, sent as `UCI_Elo` to engines that support it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elo: Option<u32>,
    /// Sampling seed for the builtin teammate.
    #[serde(default)]
    pub seed: u64,
    /// Per-request deadline for external engines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

fn builtin_name() -> String {
    "builtin".to_string()
}

impl EngineConfig {
    pub fn builtin(role: EngineRole, depth: u32) -> Self {
        EngineConfig {
            role,
            engine: builtin_name(),
            limit: SearchLimit::Depth(depth),
            elo: (role == EngineRole::Teammate).then_some(TEAMMATE_ELO),
            seed: 0,
            timeout_ms: None,
        }
    }

    pub fn uci(role: EngineRole, path: impl Into<String>, limit: SearchLimit) -> Self {
        EngineConfig {
            role,
            engine: path.into(),
            limit,
            elo: None,
            seed: 0,
            timeout_ms: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_builtin(&self) -> bool {
        self.engine == "builtin"
    }

    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Score {
    /// White's point of view.
    Centipawns(i32),
    Mate { winner: Color, plies: u32 },
}

impl Score {
    /// Centipawns from White's point of view, mates folded into `±(30000 - plies)`.
    pub fn to_cp(self) -> i32 {
        match self {
            Score::Centipawns(cp) => cp,
            Score::Mate { winner, plies } => winner.sign() * (MATE_SCORE - plies as i32),
        }
    }

    pub fn negated(self) -> Score {
        match self {
            Score::Centipawns(cp) => Score::Centipawns(-cp),
            Score::Mate { winner, plies } => Score::Mate {
                winner: winner.opposite(),
                plies,
            },
        }
    }

    /// Builds a score from a value seen by `side`, detecting mate distances.
    pub(crate) fn from_side_value(value: i32, side: Color) -> Score {
        if value.abs() >= MATE_SCORE - 1000 {
            let plies = (MATE_SCORE - value.abs()) as u32;
            let winner = if value > 0 { side } else { side.opposite() };
            Score::Mate { winner, plies }
        } else {
            Score::Centipawns(value * side.sign())
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Centipawns(cp) => write!(f, "{cp:+} cp"),
            Score::Mate { winner, plies } => write!(f, "mate for {winner} in {plies} plies"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub score: Score,
    pub depth: u32,
}

impl Evaluation {
    pub fn cp(&self) -> i32 {
        self.score.to_cp()
    }
}

/// One engine process (or builtin instance) with exclusive ownership.
pub trait Engine: Send {
    fn config(&self) -> &EngineConfig;

    fn evaluate(&mut self, pos: &Position) -> Result<Evaluation, EngineError>;

    /// Best move among `legal_moves_of_type(pos, constraint)`.
    fn constrained_best_move(
        &mut self,
        pos: &Position,
        constraint: Option<PieceType>,
    ) -> Result<Move, EngineError>;

    /// The move this engine actually plays in a game. `ply` lets sampling
    /// engines vary their draws over a game while staying reproducible.
    fn play_move(
        &mut self,
        pos: &Position,
        constraint: Option<PieceType>,
        ply: u64,
    ) -> Result<Move, EngineError> {
        let _ = ply;
        self.constrained_best_move(pos, constraint)
    }

    /// Hand mode: the type of the engine's best unrestricted move.
    fn pick_piece_type(&mut self, pos: &Position) -> Result<PieceType, EngineError> {
        Ok(self.constrained_best_move(pos, None)?.piece)
    }
}

/// Opens the engine described by `cfg`.
pub fn connect(cfg: &EngineConfig) -> Result<Box<dyn Engine>, EngineError> {
    if cfg.is_builtin() {
        Ok(Box::new(BuiltinEngine::new(cfg.clone())))
    } else {
        Ok(Box::new(UciEngine::spawn(cfg.clone())?))
    }
}

fn require_role(cfg: &EngineConfig, role: EngineRole) -> Result<(), EngineError> {
    if cfg.role == role {
        Ok(())
    } else {
        Err(EngineError::Config(format!(
            "expected a {role:?} engine, got {:?}",
            cfg.role
        )))
    }
}

pub(crate) fn constrained_moves(
    pos: &Position,
    constraint: Option<PieceType>,
) -> Result<Vec<Move>, EngineError> {
    let moves = pos.legal_moves_of_type(constraint);
    if moves.is_empty() {
        return Err(match constraint {
            Some(t) => EngineError::NoMoveOfType(t),
            None => EngineError::NoLegalMoves,
        });
    }
    Ok(moves)
}

/// One-shot evaluation with an evaluator engine.
pub fn evaluate(pos: &Position, cfg: &EngineConfig) -> Result<Evaluation, EngineError> {
    require_role(cfg, EngineRole::Evaluator)?;
    connect(cfg)?.evaluate(pos)
}

pub fn constrained_best_move(
    pos: &Position,
    constraint: Option<PieceType>,
    cfg: &EngineConfig,
) -> Result<Move, EngineError> {
    connect(cfg)?.constrained_best_move(pos, constraint)
}

pub fn pick_piece_type(pos: &Position, cfg: &EngineConfig) -> Result<PieceType, EngineError> {
    connect(cfg)?.pick_piece_type(pos)
}
