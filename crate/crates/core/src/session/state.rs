use std::collections::HashMap;

use serde::Serialize;

use super::event::{Actor, BoardRect, ControlMode, EndReason, EventBody, GameResult, SessionEvent};
use crate::chess::{Color, Move, Outcome, PgnGame, PieceType, Position};

/// Where the turn automaton is. The two `Teammate*` phases only exist between
/// an intent and the teammate's immediate answer inside one step; they are
/// visible in logs that were cut at exactly that point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Phase {
    AwaitModeChoice,
    TeammatePicking,
    AwaitPieceType,
    TeammateMoving { piece: PieceType },
    AwaitHumanMove { piece: PieceType },
    OpponentThinking,
    Finished { result: GameResult },
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::AwaitModeChoice => "await_mode_choice",
            Phase::TeammatePicking => "teammate_picking",
            Phase::AwaitPieceType => "await_piece_type",
            Phase::TeammateMoving { .. } => "teammate_moving",
            Phase::AwaitHumanMove { .. } => "await_human_move",
            Phase::OpponentThinking => "opponent_thinking",
            Phase::Finished { .. } => "finished",
        }
    }

    /// Piece type the current move must use, if one has been fixed.
    pub fn constraint(&self) -> Option<PieceType> {
        match self {
            Phase::TeammateMoving { piece } | Phase::AwaitHumanMove { piece } => Some(*piece),
            _ => None,
        }
    }
}

/// One completed team turn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnRecord {
    /// 1-based team turn number.
    pub index: u32,
    /// Opponent's last move (or session start for an opening turn).
    pub start_t: u64,
    pub mode_t: u64,
    pub move_t: u64,
    pub mode: ControlMode,
    pub piece: PieceType,
    pub piece_by: Actor,
    pub uci: String,
    pub san: String,
    pub fen_before: String,
    pub fen_after: String,
}

impl TurnRecord {
    /// Time from the opponent's move to the mode choice, in seconds.
    pub fn thinking_time_s(&self) -> f64 {
        (self.mode_t - self.start_t) as f64 / 1000.0
    }
}

#[derive(Debug, Clone, PartialEq)]
struct TurnInProgress {
    index: u32,
    start_t: u64,
    mode_t: u64,
    mode: ControlMode,
    piece: Option<(PieceType, Actor)>,
    fen_before: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub session_id: String,
    pub origin: Option<String>,
    pub meta: Option<serde_json::Value>,
    pub team_color: Color,
    pub board: BoardRect,
    pub start: Position,
    pub position: Position,
    pub phase: Phase,
    pub turns: Vec<TurnRecord>,
    pub moves: Vec<Move>,
    pub end_reason: Option<EndReason>,
    /// Start of the current team turn (last opponent move).
    pub turn_start_t: u64,
    pub last_t: u64,
    pub last_seq: u64,
    /// A `SessionEnd` event has been applied.
    pub ended: bool,
    current: Option<TurnInProgress>,
    repetitions: HashMap<String, u32>,
}

fn end_of(pos: &Position, repetitions: &HashMap<String, u32>) -> Option<(GameResult, EndReason)> {
    match pos.outcome() {
        Some(Outcome::Checkmate { winner }) => Some((GameResult::win_for(winner), EndReason::Checkmate)),
        Some(Outcome::Stalemate) => Some((GameResult::Draw, EndReason::Stalemate)),
        _ if repetitions.get(&pos.repetition_key()).copied().unwrap_or(0) >= 3 => {
            Some((GameResult::Draw, EndReason::ThreefoldRepetition))
        }
        Some(Outcome::FiftyMoveRule) => Some((GameResult::Draw, EndReason::FiftyMoveRule)),
        None => None,
    }
}

impl SessionState {
    /// State right after a `SessionStart` event.
    pub fn from_start(ev: &SessionEvent) -> Result<SessionState, String> {
        let EventBody::SessionStart {
            session_id,
            fen,
            team_color,
            board,
            origin,
            meta,
        } = &ev.body
        else {
            return Err("missing SessionStart".into());
        };
        let start: Position = fen.parse().map_err(|e| format!("bad start FEN: {e}"))?;
        let mut repetitions = HashMap::new();
        repetitions.insert(start.repetition_key(), 1);
        let mut state = SessionState {
            session_id: session_id.clone(),
            origin: origin.clone(),
            meta: meta.clone(),
            team_color: *team_color,
            board: *board,
            position: start.clone(),
            start,
            phase: Phase::OpponentThinking,
            turns: Vec::new(),
            moves: Vec::new(),
            end_reason: None,
            turn_start_t: ev.t,
            last_t: ev.t,
            last_seq: ev.seq,
            ended: false,
            current: None,
            repetitions,
        };
        state.phase = state.phase_after_move();
        Ok(state)
    }

    /// Completed team turns so far.
    pub fn turn_count(&self) -> usize {
        self.turns.len()
    }

    /// Index of the team turn being played (or about to be).
    pub fn turn_index(&self) -> u32 {
        self.current
            .as_ref()
            .map_or(self.turns.len() as u32 + 1, |c| c.index)
    }

    pub fn modes(&self) -> Vec<ControlMode> {
        self.turns.iter().map(|t| t.mode).collect()
    }

    /// Mode chosen in the turn being played, if any.
    pub fn current_mode(&self) -> Option<ControlMode> {
        self.current.as_ref().map(|c| c.mode)
    }

    pub fn is_team_to_move(&self) -> bool {
        self.position.side_to_move() == self.team_color
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, Phase::Finished { .. })
    }

    pub fn result(&self) -> Option<GameResult> {
        match self.phase {
            Phase::Finished { result } => Some(result),
            _ => None,
        }
    }

    fn phase_after_move(&mut self) -> Phase {
        if let Some((result, reason)) = end_of(&self.position, &self.repetitions) {
            self.end_reason = Some(reason);
            Phase::Finished { result }
        } else if self.is_team_to_move() {
            Phase::AwaitModeChoice
        } else {
            Phase::OpponentThinking
        }
    }

    fn legal_move(&self, uci: &str, constraint: Option<PieceType>) -> Result<Move, String> {
        let mv = self
            .position
            .parse_uci_move(uci)
            .map_err(|_| format!("illegal move {uci}"))?;
        if let Some(piece) = constraint {
            if mv.piece != piece {
                return Err(format!("move {uci} must use a {piece}"));
            }
        }
        Ok(mv)
    }

    fn play(&mut self, mv: &Move) {
        self.position = self.position.play_unchecked(mv);
        self.moves.push(*mv);
        *self.repetitions.entry(self.position.repetition_key()).or_insert(0) += 1;
        self.phase = self.phase_after_move();
    }

    /// Folds one event into the state. On error the state is unchanged.
    pub fn apply_event(&mut self, ev: &SessionEvent) -> Result<(), String> {
        if self.ended {
            return Err(format!("{} after SessionEnd", ev.body.kind()));
        }
        if ev.seq <= self.last_seq {
            return Err(format!("sequence number {} does not increase (last {})", ev.seq, self.last_seq));
        }
        if ev.t < self.last_t {
            return Err(format!("time {} ms goes backwards (last {})", ev.t, self.last_t));
        }
        let out_of_phase = || format!("{} not allowed in phase {}", ev.body.kind(), self.phase.name());

        match &ev.body {
            EventBody::SessionStart { .. } => return Err("duplicate SessionStart".into()),
            EventBody::OpponentMove { uci, .. } => {
                if self.phase != Phase::OpponentThinking {
                    return Err(out_of_phase());
                }
                let mv = self.legal_move(uci, None)?;
                self.play(&mv);
                self.turn_start_t = ev.t;
            }
            EventBody::ModeChosen { mode } => {
                if self.phase != Phase::AwaitModeChoice {
                    return Err(out_of_phase());
                }
                self.current = Some(TurnInProgress {
                    index: self.turns.len() as u32 + 1,
                    start_t: self.turn_start_t,
                    mode_t: ev.t,
                    mode: *mode,
                    piece: None,
                    fen_before: self.position.to_fen(),
                });
                self.phase = match mode {
                    ControlMode::Hand => Phase::TeammatePicking,
                    ControlMode::Brain => Phase::AwaitPieceType,
                };
            }
            EventBody::PieceTypeChosen { by, piece } => {
                let next = match (self.phase, by) {
                    (Phase::TeammatePicking, Actor::Ai) => Phase::AwaitHumanMove { piece: *piece },
                    (Phase::AwaitPieceType, Actor::Human) => Phase::TeammateMoving { piece: *piece },
                    _ => return Err(out_of_phase()),
                };
                if self.position.legal_moves_of_type(Some(*piece)).is_empty() {
                    return Err(format!("no legal {piece} move"));
                }
                self.current.as_mut().expect("turn in progress").piece = Some((*piece, *by));
                self.phase = next;
            }
            EventBody::MoveMade { by, uci, san } => {
                let piece = match (self.phase, by) {
                    (Phase::AwaitHumanMove { piece }, Actor::Human) => piece,
                    (Phase::TeammateMoving { piece }, Actor::Ai) => piece,
                    _ => return Err(out_of_phase()),
                };
                let mv = self.legal_move(uci, Some(piece))?;
                let cur = self.current.take().expect("turn in progress");
                let (piece, piece_by) = cur.piece.expect("piece chosen");
                let fen_before = cur.fen_before;
                self.play(&mv);
                self.turns.push(TurnRecord {
                    index: cur.index,
                    start_t: cur.start_t,
                    mode_t: cur.mode_t,
                    move_t: ev.t,
                    mode: cur.mode,
                    piece,
                    piece_by,
                    uci: mv.uci(),
                    san: san.clone(),
                    fen_before,
                    fen_after: self.position.to_fen(),
                });
            }
            EventBody::GazeBatch { samples } => {
                if samples.windows(2).any(|w| w[1].t < w[0].t) {
                    return Err("gaze samples out of order".into());
                }
            }
            EventBody::EmotionBatch { samples } => {
                if samples.windows(2).any(|w| w[1].t < w[0].t) {
                    return Err("emotion samples out of order".into());
                }
                samples.iter().try_for_each(|s| s.check())?;
            }
            EventBody::PredictionEmitted { p_switch, .. } => {
                if !(0.0..=1.0).contains(p_switch) {
                    return Err(format!("prediction {p_switch} outside [0,1]"));
                }
            }
            EventBody::SessionEnd { result, reason } => match self.phase {
                Phase::Finished { result: expected } => {
                    if *result != expected || Some(*reason) != self.end_reason {
                        return Err(format!(
                            "SessionEnd {result} ({reason:?}) contradicts the board ({expected}, {:?})",
                            self.end_reason
                        ));
                    }
                    self.ended = true;
                }
                _ => {
                    if !matches!(reason, EndReason::Resignation | EndReason::TurnLimit | EndReason::Aborted) {
                        return Err(format!("{reason:?} claimed but the game is not over"));
                    }
                    self.current = None;
                    self.end_reason = Some(*reason);
                    self.phase = Phase::Finished { result: *result };
                    self.ended = true;
                }
            },
        }
        self.last_t = ev.t;
        self.last_seq = ev.seq;
        Ok(())
    }

    /// The game so far as PGN.
    pub fn to_pgn(&self) -> PgnGame {
        let (white, black) = match self.team_color {
            Color::White => ("Hand-and-brain team", "Opponent"),
            Color::Black => ("Opponent", "Hand-and-brain team"),
        };
        let result = self.result().unwrap_or(GameResult::Unfinished).as_str().to_string();
        PgnGame {
            tags: vec![
                ("Event".into(), "Hand-and-brain session".into()),
                ("Site".into(), "handbrain".into()),
                ("Date".into(), "????.??.??".into()),
                ("Round".into(), self.session_id.clone()),
                ("White".into(), white.into()),
                ("Black".into(), black.into()),
                ("Result".into(), result.clone()),
            ],
            start: self.start.clone(),
            moves: self.moves.clone(),
            result,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("replay failed at event {index}: {reason}")]
pub struct ReplayError {
    pub index: usize,
    pub reason: String,
}

/// Re-derives the state of a log without consulting any engine. The log must
/// be complete, i.e. end with `SessionEnd`.
pub fn replay_session(events: &[SessionEvent]) -> Result<SessionState, ReplayError> {
    let state = replay_prefix(events)?;
    if !state.ended {
        let reason = match state.phase {
            Phase::TeammatePicking => "log ends before the teammate's piece type".to_string(),
            Phase::TeammateMoving { .. } => "log ends before the teammate's move".to_string(),
            ref p => format!("log ends in phase {} without SessionEnd", p.name()),
        };
        return Err(ReplayError {
            index: events.len(),
            reason,
        });
    }
    Ok(state)
}

/// Like [`replay_session`] but accepts an unfinished log.
pub fn replay_prefix(events: &[SessionEvent]) -> Result<SessionState, ReplayError> {
    let first = events.first().ok_or_else(|| ReplayError {
        index: 0,
        reason: "missing SessionStart".into(),
    })?;
    let mut state = SessionState::from_start(first).map_err(|reason| ReplayError { index: 0, reason })?;
    for (i, ev) in events.iter().enumerate().skip(1) {
        state
            .apply_event(ev)
            .map_err(|reason| ReplayError { index: i, reason })?;
    }
    Ok(state)
}
