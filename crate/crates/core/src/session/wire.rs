//! JSON wire protocol between the server and the browser client.
//!
//! Every message is an object with a `"kind"` field. Unknown fields are kept
//! in `extra` so a newer client can talk to an older server and back.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::event::{ControlMode, EmotionSample, EndReason, GameResult, GazeSample};
use super::live::{Intent, SessionError};
use super::state::{Phase, SessionState};
use crate::chess::{Color, PieceType};

pub type Extra = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMsg {
    pub session_id: String,
    pub fen: String,
    pub phase: String,
    pub turn: u32,
    pub team_color: Color,
    pub to_move: Color,
    pub mode: Option<ControlMode>,
    pub constraint: Option<PieceType>,
    pub legal_piece_types: Vec<PieceType>,
    pub legal_moves: Vec<String>,
    pub last_move: Option<String>,
    pub result: Option<GameResult>,
    pub end_reason: Option<EndReason>,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChooseModeMsg {
    pub mode: ControlMode,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoosePieceMsg {
    pub piece: PieceType,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveMsg {
    pub uci: String,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeBatchMsg {
    pub samples: Vec<GazeSample>,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionBatchMsg {
    pub samples: Vec<EmotionSample>,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMsg {
    pub turn: u32,
    pub elapsed_s: f64,
    pub p_switch: f64,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMsg {
    pub code: String,
    pub message: String,
    /// JSON pointer into the offending message, for decode errors.
    pub path: Option<String>,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResignMsg {
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    State(StateMsg),
    ChooseMode(ChooseModeMsg),
    ChoosePiece(ChoosePieceMsg),
    Move(MoveMsg),
    GazeBatch(GazeBatchMsg),
    EmotionBatch(EmotionBatchMsg),
    Prediction(PredictionMsg),
    Error(ErrorMsg),
    Resign(ResignMsg),
}

pub const KINDS: [&str; 9] = [
    "state",
    "choose_mode",
    "choose_piece",
    "move",
    "gaze_batch",
    "emotion_batch",
    "prediction",
    "error",
    "resign",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct DecodeError {
    /// JSON pointer, `""` for the whole document.
    pub path: String,
    pub message: String,
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::State(_) => "state",
            Message::ChooseMode(_) => "choose_mode",
            Message::ChoosePiece(_) => "choose_piece",
            Message::Move(_) => "move",
            Message::GazeBatch(_) => "gaze_batch",
            Message::EmotionBatch(_) => "emotion_batch",
            Message::Prediction(_) => "prediction",
            Message::Error(_) => "error",
            Message::Resign(_) => "resign",
        }
    }

    pub fn to_value(&self) -> Value {
        let payload = match self {
            Message::State(m) => serde_json::to_value(m),
            Message::ChooseMode(m) => serde_json::to_value(m),
            Message::ChoosePiece(m) => serde_json::to_value(m),
            Message::Move(m) => serde_json::to_value(m),
            Message::GazeBatch(m) => serde_json::to_value(m),
            Message::EmotionBatch(m) => serde_json::to_value(m),
            Message::Prediction(m) => serde_json::to_value(m),
            Message::Error(m) => serde_json::to_value(m),
            Message::Resign(m) => serde_json::to_value(m),
        }
        .expect("messages serialize");
        let mut obj = match payload {
            Value::Object(obj) => obj,
            _ => unreachable!("messages are structs"),
        };
        obj.insert("kind".into(), Value::String(self.kind().into()));
        Value::Object(obj)
    }

    pub fn encode(&self) -> String {
        self.to_value().to_string()
    }

    pub fn decode(text: &str) -> Result<Message, DecodeError> {
        let value: Value = serde_json::from_str(text).map_err(|e| DecodeError {
            path: String::new(),
            message: format!("invalid JSON: {e}"),
        })?;
        Message::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Message, DecodeError> {
        let Value::Object(mut obj) = value else {
            return Err(DecodeError {
                path: String::new(),
                message: "message must be a JSON object".into(),
            });
        };
        let kind = match obj.remove("kind") {
            Some(Value::String(k)) => k,
            Some(_) => {
                return Err(DecodeError {
                    path: "/kind".into(),
                    message: "kind must be a string".into(),
                })
            }
            None => {
                return Err(DecodeError {
                    path: "/kind".into(),
                    message: "missing required field".into(),
                })
            }
        };
        let body = Value::Object(obj);
        Ok(match kind.as_str() {
            "state" => Message::State(payload(body)?),
            "choose_mode" => Message::ChooseMode(payload(body)?),
            "choose_piece" => Message::ChoosePiece(payload(body)?),
            "move" => Message::Move(payload(body)?),
            "gaze_batch" => Message::GazeBatch(payload(body)?),
            "emotion_batch" => Message::EmotionBatch(payload(body)?),
            "prediction" => Message::Prediction(payload(body)?),
            "error" => Message::Error(payload(body)?),
            "resign" => Message::Resign(payload(body)?),
            other => {
                return Err(DecodeError {
                    path: "/kind".into(),
                    message: format!("unknown message kind '{other}'"),
                })
            }
        })
    }

    /// The session intent a client message asks for, if it is a client message.
    pub fn to_intent(&self) -> Option<Intent> {
        Some(match self {
            Message::ChooseMode(m) => Intent::ChooseMode(m.mode),
            Message::ChoosePiece(m) => Intent::ChoosePiece(m.piece),
            Message::Move(m) => Intent::HumanMove(m.uci.clone()),
            Message::GazeBatch(m) => Intent::Gaze(m.samples.clone()),
            Message::EmotionBatch(m) => Intent::Emotion(m.samples.clone()),
            Message::Resign(_) => Intent::Resign,
            _ => return None,
        })
    }
}

fn payload<T: DeserializeOwned>(body: Value) -> Result<T, DecodeError> {
    serde_path_to_error::deserialize(body).map_err(|err| {
        let mut path = String::new();
        for seg in err.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => path.push_str(&format!("/{index}")),
                Segment::Map { key } => path.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
                Segment::Enum { variant } => path.push_str(&format!("/{variant}")),
                Segment::Unknown => path.push_str("/?"),
            }
        }
        let message = err.inner().to_string();
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next())
        {
            path.push('/');
            path.push_str(field);
        }
        DecodeError { path, message }
    })
}

pub fn state_message(state: &SessionState) -> StateMsg {
    let pos = &state.position;
    let (types, moves) = match state.phase {
        Phase::AwaitModeChoice | Phase::AwaitPieceType => (pos.movable_piece_types(), pos.legal_moves()),
        Phase::AwaitHumanMove { piece } => (vec![piece], pos.legal_moves_of_type(Some(piece))),
        _ => (Vec::new(), Vec::new()),
    };
    StateMsg {
        session_id: state.session_id.clone(),
        fen: pos.to_fen(),
        phase: state.phase.name().to_string(),
        turn: state.turn_index(),
        team_color: state.team_color,
        to_move: pos.side_to_move(),
        mode: state.current_mode(),
        constraint: state.phase.constraint(),
        legal_piece_types: types,
        legal_moves: moves.iter().map(|m| m.uci()).collect(),
        last_move: state.moves.last().map(|m| m.uci()),
        result: state.result(),
        end_reason: state.end_reason,
        extra: Extra::new(),
    }
}

pub fn error_message(err: &SessionError) -> ErrorMsg {
    let code = match err {
        SessionError::OutOfPhase { .. } => "protocol_violation",
        SessionError::WrongPieceType { .. } | SessionError::NoMoveOfType(_) => "constraint_violation",
        SessionError::IllegalMove(_) => "illegal_move",
        SessionError::TimeWentBackwards { .. } | SessionError::InvalidData(_) => "invalid_data",
        SessionError::Finished => "finished",
        SessionError::Engine(_) => "engine_error",
    };
    ErrorMsg {
        code: code.into(),
        message: err.to_string(),
        path: None,
        extra: Extra::new(),
    }
}

pub fn decode_error_message(err: &DecodeError) -> ErrorMsg {
    ErrorMsg {
        code: "decode_error".into(),
        message: err.message.clone(),
        path: Some(err.path.clone()),
        extra: Extra::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_kind_points_at_kind() {
        let err = Message::decode(r#"{"mode":"hand"}"#).unwrap_err();
        assert_eq!(err.path, "/kind");
    }

    #[test]
    fn nested_errors_carry_pointer() {
        let err = Message::decode(r#"{"kind":"gaze_batch","samples":[{"t":1,"x":2,"y":3},{"t":2,"x":"a","y":3}]}"#)
            .unwrap_err();
        assert_eq!(err.path, "/samples/1/x");
        let err = Message::decode(r#"{"kind":"choose_mode"}"#).unwrap_err();
        assert_eq!(err.path, "/mode");
        let err = Message::decode(r#"{"kind":"choose_mode","mode":"feet"}"#).unwrap_err();
        assert_eq!(err.path, "/mode");
    }

    #[test]
    fn unknown_fields_survive_round_trip() {
        let text = r#"{"kind":"choose_mode","mode":"brain","client_ts":1234,"ui":{"v":2}}"#;
        let msg = Message::decode(text).unwrap();
        let Message::ChooseMode(ref m) = msg else { panic!() };
        assert_eq!(m.mode, ControlMode::Brain);
        assert_eq!(m.extra["client_ts"], 1234);
        assert_eq!(Message::decode(&msg.encode()).unwrap(), msg);
    }
}
