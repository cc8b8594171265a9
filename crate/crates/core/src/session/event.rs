use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chess::{Color, PieceType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    /// AI names the piece type, the human moves it.
    Hand,
    /// The human names the piece type, the AI moves it.
    Brain,
}

impl ControlMode {
    pub fn other(self) -> ControlMode {
        match self {
            ControlMode::Hand => ControlMode::Brain,
            ControlMode::Brain => ControlMode::Hand,
        }
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlMode::Hand => "hand",
            ControlMode::Brain => "brain",
        })
    }
}

impl FromStr for ControlMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hand" => Ok(ControlMode::Hand),
            "brain" => Ok(ControlMode::Brain),
            _ => Err(format!("unknown control mode '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Human,
    Ai,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GameResult {
    #[serde(rename = "1-0")]
    WhiteWins,
    #[serde(rename = "0-1")]
    BlackWins,
    #[serde(rename = "1/2-1/2")]
    Draw,
    #[serde(rename = "*")]
    Unfinished,
}

impl GameResult {
    pub fn as_str(self) -> &'static str {
        match self {
            GameResult::WhiteWins => "1-0",
            GameResult::BlackWins => "0-1",
            GameResult::Draw => "1/2-1/2",
            GameResult::Unfinished => "*",
        }
    }

    pub fn win_for(color: Color) -> GameResult {
        match color {
            Color::White => GameResult::WhiteWins,
            Color::Black => GameResult::BlackWins,
        }
    }
}

impl fmt::Display for GameResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Checkmate,
    Stalemate,
    ThreefoldRepetition,
    FiftyMoveRule,
    Resignation,
    TurnLimit,
    Aborted,
}

/// Screen rectangle of the board, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoardRect {
    pub x: f64,
    pub y: f64,
    pub size: f64,
}

impl Default for BoardRect {
    fn default() -> Self {
        BoardRect {
            x: 100.0,
            y: 100.0,
            size: 800.0,
        }
    }
}

impl BoardRect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x && x < self.x + self.size && y >= self.y && y < self.y + self.size
    }

    /// Board cell `(file, rank_from_top)` under a screen point, if on the board.
    pub fn cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !self.contains(x, y) {
            return None;
        }
        let side = self.size / 8.0;
        let col = (((x - self.x) / side) as usize).min(7);
        let row = (((y - self.y) / side) as usize).min(7);
        Some((col, row))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: u64,
    pub x: f64,
    pub y: f64,
    #[serde(default = "yes")]
    pub valid: bool,
}

fn yes() -> bool {
    true
}

pub const EMOTIONS: [&str; 7] = ["angry", "disgust", "fear", "happy", "sad", "surprise", "neutral"];
pub const SURPRISE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionSample {
    pub t: u64,
    /// Probabilities in [`EMOTIONS`] order.
    pub p: [f64; 7],
}

impl EmotionSample {
    pub fn surprise(&self) -> f64 {
        self.p[SURPRISE]
    }

    pub fn check(&self) -> Result<(), String> {
        if self.p.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(format!("emotion probability out of [0,1] at t={}", self.t));
        }
        let sum: f64 = self.p.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(format!("emotion probabilities sum to {sum} at t={}", self.t));
        }
        Ok(())
    }
}

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Milliseconds since session start.
    pub t: u64,
    pub seq: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventBody {
    SessionStart {
        session_id: String,
        fen: String,
        team_color: Color,
        #[serde(default)]
        board: BoardRect,
        /// Producer of the log, e.g. `"serve"` or `"simulator"`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin: Option<String>,
        /// Free-form producer metadata (simulator seed and policy, engine configs).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        meta: Option<serde_json::Value>,
    },
    OpponentMove {
        uci: String,
        san: String,
    },
    ModeChosen {
        mode: ControlMode,
    },
    PieceTypeChosen {
        by: Actor,
        piece: PieceType,
    },
    MoveMade {
        by: Actor,
        uci: String,
        san: String,
    },
    GazeBatch {
        samples: Vec<GazeSample>,
    },
    EmotionBatch {
        samples: Vec<EmotionSample>,
    },
    PredictionEmitted {
        turn: u32,
        elapsed_s: f64,
        p_switch: f64,
    },
    SessionEnd {
        result: GameResult,
        reason: EndReason,
    },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::SessionStart { .. } => "session_start",
            EventBody::OpponentMove { .. } => "opponent_move",
            EventBody::ModeChosen { .. } => "mode_chosen",
            EventBody::PieceTypeChosen { .. } => "piece_type_chosen",
            EventBody::MoveMade { .. } => "move_made",
            EventBody::GazeBatch { .. } => "gaze_batch",
            EventBody::EmotionBatch { .. } => "emotion_batch",
            EventBody::PredictionEmitted { .. } => "prediction_emitted",
            EventBody::SessionEnd { .. } => "session_end",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_json_shape() {
        let ev = SessionEvent {
            t: 1500,
            seq: 3,
            body: EventBody::PieceTypeChosen {
                by: Actor::Ai,
                piece: PieceType::Knight,
            },
        };
        let text = serde_json::to_string(&ev).unwrap();
        assert_eq!(text, r#"{"t":1500,"seq":3,"kind":"piece_type_chosen","by":"ai","piece":"knight"}"#);
        assert_eq!(serde_json::from_str::<SessionEvent>(&text).unwrap(), ev);
    }

    #[test]
    fn board_cells() {
        let b = BoardRect::default();
        assert_eq!(b.cell(100.0, 100.0), Some((0, 0)));
        assert_eq!(b.cell(899.9, 899.9), Some((7, 7)));
        assert_eq!(b.cell(900.0, 500.0), None);
        assert_eq!(b.cell(50.0, 500.0), None);
    }
}
