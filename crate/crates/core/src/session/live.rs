use serde_json::Value;
use thiserror::Error;

use super::event::{
    Actor, BoardRect, ControlMode, EmotionSample, EndReason, EventBody, GameResult, GazeSample, SessionEvent,
};
use super::state::{Phase, SessionState};
use crate::chess::{Color, PieceType, Position, START_FEN};
use crate::engine::{Engine, EngineError};

/// What a participant (or the driver) asks the session to do.
#[derive(Debug, Clone, PartialEq)]
pub enum Intent {
    ChooseMode(ControlMode),
    ChoosePiece(PieceType),
    /// Human move in UCI notation.
    HumanMove(String),
    Gaze(Vec<GazeSample>),
    Emotion(Vec<EmotionSample>),
    Prediction { turn: u32, elapsed_s: f64, p_switch: f64 },
    /// Let the opponent engine answer.
    OpponentReply,
    Resign,
    End { result: GameResult, reason: EndReason },
}

impl Intent {
    pub fn name(&self) -> &'static str {
        match self {
            Intent::ChooseMode(_) => "choose_mode",
            Intent::ChoosePiece(_) => "choose_piece",
            Intent::HumanMove(_) => "move",
            Intent::Gaze(_) => "gaze_batch",
            Intent::Emotion(_) => "emotion_batch",
            Intent::Prediction { .. } => "prediction",
            Intent::OpponentReply => "opponent_reply",
            Intent::Resign => "resign",
            Intent::End { .. } => "end",
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{intent} is not allowed in phase {phase}")]
    OutOfPhase { intent: &'static str, phase: &'static str },
    #[error("this turn must move a {required}, not a {got}")]
    WrongPieceType { required: PieceType, got: PieceType },
    #[error("illegal move {0}")]
    IllegalMove(String),
    #[error("no legal move of type {0}")]
    NoMoveOfType(PieceType),
    #[error("timestamp {t} ms is earlier than {last} ms")]
    TimeWentBackwards { last: u64, t: u64 },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("session has ended")]
    Finished,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSetup {
    pub session_id: String,
    pub fen: String,
    pub team_color: Color,
    pub board: BoardRect,
    pub origin: Option<String>,
    pub meta: Option<Value>,
}

impl SessionSetup {
    pub fn new(session_id: impl Into<String>) -> Self {
        SessionSetup {
            session_id: session_id.into(),
            fen: START_FEN.to_string(),
            team_color: Color::White,
            board: BoardRect::default(),
            origin: None,
            meta: None,
        }
    }
}

/// A live game: the pure state plus the two engines that answer for the
/// teammate and the opponent.
pub struct Session {
    state: SessionState,
    events: Vec<SessionEvent>,
    teammate: Box<dyn Engine>,
    opponent: Box<dyn Engine>,
}

impl Session {
    pub fn start(
        setup: SessionSetup,
        teammate: Box<dyn Engine>,
        opponent: Box<dyn Engine>,
        t: u64,
    ) -> Result<Session, SessionError> {
        let pos: Position = setup
            .fen
            .parse()
            .map_err(|e| SessionError::InvalidData(format!("start FEN: {e}")))?;
        let start = SessionEvent {
            t,
            seq: 0,
            body: EventBody::SessionStart {
                session_id: setup.session_id,
                fen: pos.to_fen(),
                team_color: setup.team_color,
                board: setup.board,
                origin: setup.origin,
                meta: setup.meta,
            },
        };
        let state = SessionState::from_start(&start).map_err(SessionError::InvalidData)?;
        let mut session = Session {
            state,
            events: vec![start],
            teammate,
            opponent,
        };
        if let Phase::Finished { result } = session.state.phase {
            let reason = session.state.end_reason.expect("finished with a reason");
            session.commit(vec![EventBody::SessionEnd { result, reason }], t)?;
        }
        Ok(session)
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<SessionEvent> {
        self.events
    }

    /// Handles one intent at time `t`. Rejected intents leave the session
    /// untouched; accepted ones return the events they appended.
    pub fn step(&mut self, intent: Intent, t: u64) -> Result<Vec<SessionEvent>, SessionError> {
        if self.state.ended {
            return Err(SessionError::Finished);
        }
        if t < self.state.last_t {
            return Err(SessionError::TimeWentBackwards {
                last: self.state.last_t,
                t,
            });
        }
        let bodies = self.decide(intent)?;
        self.commit(bodies, t)
    }

    fn out_of_phase(&self, intent: &Intent) -> SessionError {
        SessionError::OutOfPhase {
            intent: intent.name(),
            phase: self.state.phase.name(),
        }
    }

    fn ply(&self) -> u64 {
        self.state.moves.len() as u64
    }

    fn decide(&mut self, intent: Intent) -> Result<Vec<EventBody>, SessionError> {
        let phase = self.state.phase;
        let pos = self.state.position.clone();
        let mut out = Vec::new();
        match intent {
            Intent::ChooseMode(mode) => {
                if phase != Phase::AwaitModeChoice {
                    return Err(self.out_of_phase(&intent));
                }
                out.push(EventBody::ModeChosen { mode });
                if mode == ControlMode::Hand {
                    let piece = self.teammate.pick_piece_type(&pos)?;
                    if pos.legal_moves_of_type(Some(piece)).is_empty() {
                        return Err(EngineError::Protocol(format!("teammate picked {piece} without a legal move")).into());
                    }
                    out.push(EventBody::PieceTypeChosen { by: Actor::Ai, piece });
                }
            }
            Intent::ChoosePiece(piece) => {
                if phase != Phase::AwaitPieceType {
                    return Err(self.out_of_phase(&intent));
                }
                if pos.legal_moves_of_type(Some(piece)).is_empty() {
                    return Err(SessionError::NoMoveOfType(piece));
                }
                out.push(EventBody::PieceTypeChosen {
                    by: Actor::Human,
                    piece,
                });
                let mv = self.teammate.play_move(&pos, Some(piece), self.ply())?;
                if mv.piece != piece {
                    return Err(EngineError::Protocol(format!("teammate moved {} for a {piece} turn", mv.uci())).into());
                }
                out.push(EventBody::MoveMade {
                    by: Actor::Ai,
                    uci: mv.uci(),
                    san: pos.san(&mv),
                });
            }
            Intent::HumanMove(ref text) => {
                let Phase::AwaitHumanMove { piece } = phase else {
                    return Err(self.out_of_phase(&intent));
                };
                let mv = pos
                    .parse_uci_move(text)
                    .map_err(|_| SessionError::IllegalMove(text.clone()))?;
                if mv.piece != piece {
                    return Err(SessionError::WrongPieceType {
                        required: piece,
                        got: mv.piece,
                    });
                }
                out.push(EventBody::MoveMade {
                    by: Actor::Human,
                    uci: mv.uci(),
                    san: pos.san(&mv),
                });
            }
            Intent::OpponentReply => {
                if phase != Phase::OpponentThinking {
                    return Err(self.out_of_phase(&intent));
                }
                let mv = self.opponent.play_move(&pos, None, self.ply())?;
                out.push(EventBody::OpponentMove {
                    uci: mv.uci(),
                    san: pos.san(&mv),
                });
            }
            Intent::Gaze(samples) => out.push(EventBody::GazeBatch { samples }),
            Intent::Emotion(samples) => out.push(EventBody::EmotionBatch { samples }),
            Intent::Prediction {
                turn,
                elapsed_s,
                p_switch,
            } => out.push(EventBody::PredictionEmitted {
                turn,
                elapsed_s,
                p_switch,
            }),
            Intent::Resign => out.push(EventBody::SessionEnd {
                result: GameResult::win_for(self.state.team_color.opposite()),
                reason: EndReason::Resignation,
            }),
            Intent::End { result, reason } => {
                if !matches!(reason, EndReason::TurnLimit | EndReason::Aborted | EndReason::Resignation) {
                    return Err(SessionError::InvalidData(format!("{reason:?} cannot be declared")));
                }
                out.push(EventBody::SessionEnd { result, reason });
            }
        }
        Ok(out)
    }

    /// Applies `bodies` to a copy of the state, appending the automatic
    /// `SessionEnd` when a move finished the game, then commits atomically.
    fn commit(&mut self, bodies: Vec<EventBody>, t: u64) -> Result<Vec<SessionEvent>, SessionError> {
        let mut next = self.state.clone();
        let mut emitted = Vec::with_capacity(bodies.len() + 1);
        let mut seq = self.events.last().map_or(0, |e| e.seq + 1);
        let mut pending = bodies.into_iter().collect::<std::collections::VecDeque<_>>();
        while let Some(body) = pending.pop_front() {
            let ev = SessionEvent { t, seq, body };
            next.apply_event(&ev).map_err(SessionError::InvalidData)?;
            seq += 1;
            emitted.push(ev);
            if pending.is_empty() && !next.ended {
                if let Phase::Finished { result } = next.phase {
                    let reason = next.end_reason.expect("finished with a reason");
                    pending.push_back(EventBody::SessionEnd { result, reason });
                }
            }
        }
        self.state = next;
        self.events.extend(emitted.iter().cloned());
        Ok(emitted)
    }
}
