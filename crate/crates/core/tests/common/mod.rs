#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};

use handbrain::chess::{Color, Move, PieceType, Position};
use handbrain::engine::{Engine, EngineConfig, EngineError, EngineRole, Evaluation, Score};
use handbrain::features::{feature_names, FeatureRow};
use handbrain::session::{
    replay_prefix, ControlMode, EmotionSample, EndReason, GameResult, GazeSample, Intent, Phase, Session,
    SessionSetup, SURPRISE,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Position after `plies` uniformly random legal moves (fewer if the game ends).
pub fn random_position(rng: &mut ChaCha8Rng, plies: usize) -> Position {
    let mut pos = Position::startpos();
    for _ in 0..plies {
        let moves = pos.legal_moves();
        let Some(mv) = moves.choose(rng) else { break };
        pos = pos.apply_move(mv).expect("legal move applies");
    }
    pos
}

/// A cheap deterministic engine that plays the `k`-th legal move and fails
/// every `fail_every`-th request (0 never fails).
pub struct StubEngine {
    cfg: EngineConfig,
    calls: AtomicU64,
    fail_every: u64,
}

impl StubEngine {
    pub fn new(role: EngineRole, fail_every: u64) -> Self {
        StubEngine {
            cfg: EngineConfig::builtin(role, 1),
            calls: AtomicU64::new(0),
            fail_every,
        }
    }

    fn tick(&self) -> Result<u64, EngineError> {
        let n = self.calls.fetch_add(1, Ordering::Relaxed) + 1;
        if self.fail_every > 0 && n % self.fail_every == 0 {
            return Err(EngineError::Timeout("stub".into()));
        }
        Ok(n)
    }
}

impl Engine for StubEngine {
    fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    fn evaluate(&mut self, pos: &Position) -> Result<Evaluation, EngineError> {
        self.tick()?;
        Ok(Evaluation {
            score: Score::Centipawns(pos.legal_moves().len() as i32),
            depth: 1,
        })
    }

    fn constrained_best_move(&mut self, pos: &Position, constraint: Option<PieceType>) -> Result<Move, EngineError> {
        let n = self.tick()?;
        let moves = pos.legal_moves_of_type(constraint);
        if moves.is_empty() {
            return Err(match constraint {
                Some(p) => EngineError::NoMoveOfType(p),
                None => EngineError::NoLegalMoves,
            });
        }
        Ok(moves[n as usize % moves.len()])
    }
}

/// A feature row with every value missing.
pub fn blank_row(session: &str, turn: u32, elapsed: f64, switch: bool) -> FeatureRow {
    FeatureRow {
        session: session.into(),
        turn,
        segment: None,
        elapsed,
        values: vec![None; feature_names().len()],
        label_switch: switch,
        label_mode: ControlMode::Hand,
        outcome_eval_delta: None,
    }
}

pub fn column(name: &str) -> usize {
    feature_names().iter().position(|n| n == name).expect("known feature")
}

/// Whether an accepted `intent` may move the automaton from `before` to `after`.
pub fn transition_allowed(intent: &Intent, before: Phase, after: Phase) -> bool {
    use Phase::*;
    let finished = matches!(after, Finished { .. });
    match intent {
        Intent::Gaze(_) | Intent::Emotion(_) | Intent::Prediction { .. } => after == before,
        Intent::Resign | Intent::End { .. } => finished,
        Intent::ChooseMode(ControlMode::Hand) => before == AwaitModeChoice && matches!(after, AwaitHumanMove { .. }),
        Intent::ChooseMode(ControlMode::Brain) => before == AwaitModeChoice && after == AwaitPieceType,
        Intent::ChoosePiece(_) => before == AwaitPieceType && (after == OpponentThinking || finished),
        Intent::HumanMove(_) => matches!(before, AwaitHumanMove { .. }) && (after == OpponentThinking || finished),
        Intent::OpponentReply => before == OpponentThinking && (after == AwaitModeChoice || finished),
    }
}

pub fn random_piece(rng: &mut ChaCha8Rng) -> PieceType {
    *PieceType::ALL.choose(rng).expect("six piece types")
}

/// A random, mostly plausible intent for the session's current phase.
pub fn random_intent(rng: &mut ChaCha8Rng, session: &Session) -> Intent {
    let state = session.state();
    let t = state.last_t;
    match rng.random_range(0..14) {
        0 | 1 => Intent::ChooseMode(if rng.random_bool(0.5) { ControlMode::Hand } else { ControlMode::Brain }),
        2 | 3 => Intent::ChoosePiece(random_piece(rng)),
        4..=6 => {
            let pos = &state.position;
            let text = match rng.random_range(0..4) {
                // a legal move of the required type, when there is one
                0 | 1 => pos
                    .legal_moves_of_type(state.phase.constraint())
                    .choose(rng)
                    .map_or("e2e4".to_string(), |m| m.uci()),
                2 => pos.legal_moves().choose(rng).map_or("a1a1".to_string(), |m| m.uci()),
                _ => ["", "e2e5", "zz", "e7e8q", "e1g1", "0000"].choose(rng).unwrap().to_string(),
            };
            Intent::HumanMove(text)
        }
        7 | 8 => Intent::OpponentReply,
        9 => {
            let n = rng.random_range(0..5);
            let mut samples: Vec<GazeSample> = (0..n)
                .map(|i| GazeSample {
                    t: t + i * 33,
                    x: rng.random_range(-100.0..1100.0),
                    y: rng.random_range(-100.0..1100.0),
                    valid: rng.random_bool(0.9),
                })
                .collect();
            if n > 1 && rng.random_bool(0.2) {
                samples.reverse();
            }
            Intent::Gaze(samples)
        }
        10 => {
            let mut p = [0.0; 7];
            p[6] = 1.0;
            if rng.random_bool(0.2) {
                p[SURPRISE] = 0.7;
            }
            Intent::Emotion(vec![EmotionSample { t, p }])
        }
        11 => Intent::Prediction {
            turn: state.turn_index(),
            elapsed_s: 1.0,
            p_switch: rng.random_range(-0.5..1.5),
        },
        12 => {
            if rng.random_bool(0.1) {
                Intent::Resign
            } else {
                Intent::ChooseMode(ControlMode::Brain)
            }
        }
        _ => {
            let reason = *[EndReason::TurnLimit, EndReason::Aborted, EndReason::Checkmate, EndReason::Stalemate]
                .choose(rng)
                .unwrap();
            if rng.random_bool(0.1) {
                Intent::End {
                    result: GameResult::Unfinished,
                    reason,
                }
            } else {
                Intent::OpponentReply
            }
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FuzzTally {
    pub steps: u64,
    pub accepted: u64,
    pub rejected: u64,
}

/// Drives one session with `len` random intents. Returns the first broken
/// invariant as an error.
pub fn fuzz_session(seed: u64, len: usize, tally: &mut FuzzTally) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut setup = SessionSetup::new(format!("fuzz-{seed}"));
    if rng.random_bool(0.3) {
        setup.team_color = Color::Black;
    }
    let mut session = Session::start(
        setup,
        Box::new(StubEngine::new(EngineRole::Teammate, 29)),
        Box::new(StubEngine::new(EngineRole::Opponent, 31)),
        0,
    )
    .map_err(|e| e.to_string())?;
    for _ in 0..len {
        let intent = random_intent(&mut rng, &session);
        let last = session.state().last_t;
        let t = if rng.random_bool(0.05) && last > 0 {
            last - 1
        } else {
            last + rng.random_range(0..2000)
        };
        let before = session.state().clone();
        let n_events = session.events().len();
        tally.steps += 1;
        match session.step(intent.clone(), t) {
            Ok(emitted) => {
                tally.accepted += 1;
                let after = session.state();
                if !transition_allowed(&intent, before.phase, after.phase) {
                    return Err(format!("{intent:?}: {:?} -> {:?}", before.phase, after.phase));
                }
                if session.events()[n_events..] != emitted[..] || emitted.is_empty() {
                    return Err(format!("{intent:?}: emitted events differ from the appended log"));
                }
                if matches!(after.phase, Phase::Finished { .. }) != after.ended {
                    return Err(format!("{intent:?}: finished without SessionEnd"));
                }
            }
            Err(_) => {
                tally.rejected += 1;
                if *session.state() != before || session.events().len() != n_events {
                    return Err(format!("{intent:?} was rejected but changed the session"));
                }
            }
        }
    }
    let replayed = replay_prefix(session.events()).map_err(|e| e.to_string())?;
    if replayed != *session.state() {
        return Err("replaying the log does not reproduce the live state".into());
    }
    Ok(())
}
