//! Hand-and-brain sessions: the per-turn automaton, its event log and the
//! wire protocol.
//!
//! A turn starts in `AwaitModeChoice`. Choosing Brain lets the human name a
//! piece type that the AI then moves; choosing Hand lets the AI name the type
//! and the human move it. Live play decides which events happen (asking the
//! engines where needed) and folds them through [`SessionState::apply_event`],
//! the same function replay uses, so a log always replays to the live state.

mod event;
mod live;
mod log;
pub mod serve;
mod state;
pub mod wire;

pub use event::{
    Actor, BoardRect, ControlMode, EmotionSample, EndReason, EventBody, GameResult, GazeSample, SessionEvent,
    EMOTIONS, SURPRISE,
};
pub use live::{Intent, Session, SessionError, SessionSetup};
pub use log::{list_logs, parse_jsonl, read_log, to_jsonl, write_log, LogError, LogWriter};
pub use state::{replay_prefix, replay_session, Phase, ReplayError, SessionState, TurnRecord};

/// Turn `i >= 2` is a switch when its mode differs from turn `i - 1`.
pub fn switch_labels(modes: &[ControlMode]) -> Vec<bool> {
    modes.windows(2).map(|w| w[0] != w[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::PieceType;
    use crate::engine::{connect, EngineConfig, EngineRole};

    fn new_session() -> Session {
        let mate = connect(&EngineConfig::builtin(EngineRole::Teammate, 1)).unwrap();
        let opp = connect(&EngineConfig::builtin(EngineRole::Opponent, 1)).unwrap();
        Session::start(SessionSetup::new("t"), mate, opp, 0).unwrap()
    }

    #[test]
    fn brain_turn_goes_through_piece_choice() {
        let mut s = new_session();
        assert_eq!(s.state().phase, Phase::AwaitModeChoice);
        s.step(Intent::ChooseMode(ControlMode::Brain), 1200).unwrap();
        assert_eq!(s.state().phase, Phase::AwaitPieceType);
        let evs = s.step(Intent::ChoosePiece(PieceType::Knight), 2000).unwrap();
        assert_eq!(evs.len(), 2);
        assert!(matches!(evs[1].body, EventBody::MoveMade { by: Actor::Ai, .. }));
        assert_eq!(s.state().phase, Phase::OpponentThinking);
        assert_eq!(s.state().turns[0].piece, PieceType::Knight);
        assert_eq!(s.state().turns[0].thinking_time_s(), 1.2);
    }

    #[test]
    fn hand_turn_rejects_wrong_piece() {
        let mut s = new_session();
        s.step(Intent::ChooseMode(ControlMode::Hand), 500).unwrap();
        let Phase::AwaitHumanMove { piece } = s.state().phase else {
            panic!("{:?}", s.state().phase)
        };
        let before = s.state().clone();
        let wrong = if piece == PieceType::Knight { "e2e4" } else { "g1f3" };
        let err = s.step(Intent::HumanMove(wrong.into()), 600).unwrap_err();
        assert!(matches!(err, SessionError::WrongPieceType { required, .. } if required == piece));
        assert_eq!(s.state(), &before);
        assert_eq!(s.events().len(), 3);
    }

    #[test]
    fn out_of_phase_is_rejected() {
        let mut s = new_session();
        let err = s.step(Intent::ChoosePiece(PieceType::Pawn), 10).unwrap_err();
        assert!(matches!(err, SessionError::OutOfPhase { .. }));
        let err = s.step(Intent::OpponentReply, 10).unwrap_err();
        assert!(matches!(err, SessionError::OutOfPhase { .. }));
        s.step(Intent::ChooseMode(ControlMode::Brain), 20).unwrap();
        assert!(matches!(
            s.step(Intent::ChoosePiece(PieceType::Bishop), 30),
            Err(SessionError::NoMoveOfType(PieceType::Bishop))
        ));
        assert!(matches!(
            s.step(Intent::ChoosePiece(PieceType::Pawn), 5),
            Err(SessionError::TimeWentBackwards { .. })
        ));
    }

    #[test]
    fn replay_matches_live_and_detects_truncation() {
        let mut s = new_session();
        let mut t = 0;
        for turn in 0..6 {
            t += 1000;
            let mode = if turn % 2 == 0 { ControlMode::Brain } else { ControlMode::Hand };
            s.step(Intent::ChooseMode(mode), t).unwrap();
            match s.state().phase {
                Phase::AwaitPieceType => {
                    let piece = s.state().position.movable_piece_types()[0];
                    s.step(Intent::ChoosePiece(piece), t + 100).unwrap();
                }
                Phase::AwaitHumanMove { piece } => {
                    let mv = s.state().position.legal_moves_of_type(Some(piece))[0];
                    s.step(Intent::HumanMove(mv.uci()), t + 100).unwrap();
                }
                p => panic!("{p:?}"),
            }
            s.step(Intent::OpponentReply, t + 500).unwrap();
        }
        s.step(Intent::Resign, t + 900).unwrap();
        let live = s.state().clone();
        let events = s.into_events();
        let replayed = replay_session(&events).unwrap();
        assert_eq!(replayed, live);
        assert_eq!(switch_labels(&replayed.modes()), vec![true; 5]);

        let err = replay_session(&events[..events.len() - 1]).unwrap_err();
        assert_eq!(err.index, events.len() - 1);
        // cut right after a Hand-mode choice: the teammate's answer is missing
        let cut = events
            .iter()
            .position(|e| matches!(e.body, EventBody::ModeChosen { mode: ControlMode::Hand }))
            .unwrap();
        let err = replay_session(&events[..=cut]).unwrap_err();
        assert_eq!(err.index, cut + 1);
        assert_eq!(replay_session(&[]).unwrap_err().reason, "missing SessionStart");
    }
}
