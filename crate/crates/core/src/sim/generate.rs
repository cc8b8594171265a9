use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::policy::{PolicyInputs, TruthPolicy};
use super::synth::{emotion_stream, gaze_bursts, square_center};
use super::SimError;
use crate::chess::{Color, Position};
use crate::engine::{connect, sample_move, EngineConfig, EngineRole};
use crate::features::{gaze_entropy, Streams};
use crate::fragility::fragility_score;
use crate::session::{
    replay_session, BoardRect, ControlMode, EndReason, GameResult, Intent, Phase, Session, SessionEvent, SessionSetup,
};

pub const ORIGIN: &str = "simulator";

/// Thinking time before the mode choice: log-normal around 4 s.
pub const THINK_MEDIAN_S: f64 = 4.0;
pub const THINK_SIGMA: f64 = 0.6;
pub const THINK_MIN_MS: u64 = 500;
pub const THINK_MAX_MS: u64 = 60_000;

/// Search depth behind the simulated participant's own move ideas.
const HUMAN_DEPTH: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Team turns before the session is closed with a turn limit.
    pub turns: u32,
    pub teammate: EngineConfig,
    pub opponent: EngineConfig,
    /// Evaluator behind the policy's evaluation input; feature extraction
    /// should use the same one.
    pub evaluator: EngineConfig,
    pub board: BoardRect,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            turns: 30,
            teammate: EngineConfig::builtin(EngineRole::Teammate, 2),
            opponent: EngineConfig::builtin(EngineRole::Opponent, 2),
            evaluator: EngineConfig::builtin(EngineRole::Evaluator, 1),
            board: BoardRect::default(),
        }
    }
}

/// The policy's view of one turn, as it was at generation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnTruth {
    pub turn: u32,
    /// Before label noise.
    pub p_switch: f64,
    pub switched: bool,
}

fn position_of(fen: &str) -> Result<Position, SimError> {
    fen.parse().map_err(|e| SimError::Invalid(format!("FEN {fen}: {e}")))
}

/// Plays one seeded session. The team plays White; the simulated
/// participant decides each turn's mode with `policy`.
pub fn generate_session(
    policy: &TruthPolicy,
    cfg: &SimConfig,
    session_id: &str,
    seed: u64,
) -> Result<Vec<SessionEvent>, SimError> {
    policy.validate().map_err(SimError::Invalid)?;
    if cfg.turns < 2 {
        return Err(SimError::Invalid(format!("need at least 2 turns, got {}", cfg.turns)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let teammate = connect(&cfg.teammate.clone().with_seed(seed ^ 0x7465_616d))?;
    let opponent = connect(&cfg.opponent.clone().with_seed(seed ^ 0x6f70_706f))?;
    let mut evaluator = connect(&cfg.evaluator)?;

    let mut setup = SessionSetup::new(session_id);
    setup.team_color = Color::White;
    setup.board = cfg.board;
    setup.origin = Some(ORIGIN.into());
    setup.meta = Some(json!({ "seed": seed, "policy": policy, "evaluator": cfg.evaluator }));
    let mut session = Session::start(setup, teammate, opponent, 0)?;
    let team_sign = Color::White.sign();

    let think = LogNormal::new(THINK_MEDIAN_S.ln(), THINK_SIGMA).expect("valid log-normal");
    let scatter_noise = Normal::new(0.0, 0.15).expect("valid normal");
    let mut prev_mode: Option<ControlMode> = None;
    let mut prev_eval: Option<i32> = None;
    let mut team_turns = 0;

    while !session.state().ended {
        let start = session.state().turn_start_t;
        let pos = position_of(&session.state().position.to_fen())?;
        let eval_cp = evaluator.evaluate(&pos)?.cp() * team_sign;
        let fragility = fragility_score(&pos);
        let think_ms = ((think.sample(&mut rng) * 1000.0).round() as u64).clamp(THINK_MIN_MS, THINK_MAX_MS);
        let end = start + think_ms;

        // more fragile positions draw a wider, more scattered scan
        let scatter = (0.2 + 2.0 * fragility + scatter_noise.sample(&mut rng)).clamp(0.05, 1.0);
        let favored = sample_move(&pos, None, HUMAN_DEPTH, rng.random())?;
        let mut others = pos.legal_moves();
        others.shuffle(&mut rng);
        let extra = 1 + (3.0 * scatter).round() as usize;
        let mut centers = vec![
            square_center(&cfg.board, favored.from, Color::White),
            square_center(&cfg.board, favored.to, Color::White),
        ];
        for mv in others.iter().take(extra) {
            centers.push(square_center(&cfg.board, mv.from, Color::White));
            centers.push(square_center(&cfg.board, mv.to, Color::White));
        }
        let gaze = gaze_bursts(&mut rng, &cfg.board, &centers, scatter, start, end);
        let spike = prev_eval.map_or(0.0, |p| ((eval_cp - p).abs() as f64 / 500.0).min(0.6));
        let emotion = emotion_stream(&mut rng, spike, start, end);

        let inputs = PolicyInputs {
            fragility,
            entropy: gaze_entropy(&gaze, &cfg.board).unwrap_or(0.0),
            elapsed_s: think_ms as f64 / 1000.0,
            previous_brain: prev_mode == Some(ControlMode::Brain),
            eval_cp,
        };
        let mode = match prev_mode {
            None => {
                if rng.random_bool(0.5) {
                    ControlMode::Brain
                } else {
                    ControlMode::Hand
                }
            }
            Some(prev) => {
                let p = policy.probability(&inputs);
                let mut switch = rng.random::<f64>() < p;
                if rng.random::<f64>() < policy.noise {
                    switch = !switch;
                }
                if switch {
                    prev.other()
                } else {
                    prev
                }
            }
        };

        // batches every second and at the decision
        let mut cuts: Vec<u64> = (1..=think_ms / 1000).map(|s| start + s * 1000).collect();
        if cuts.last() != Some(&end) {
            cuts.push(end);
        }
        let mut from = start;
        for &cut in &cuts {
            let g: Vec<_> = gaze.iter().filter(|s| s.t > from && s.t <= cut).copied().collect();
            if !g.is_empty() {
                session.step(Intent::Gaze(g), cut)?;
            }
            let e: Vec<_> = emotion.iter().filter(|s| s.t > from && s.t <= cut).copied().collect();
            if !e.is_empty() {
                session.step(Intent::Emotion(e), cut)?;
            }
            from = cut;
        }

        session.step(Intent::ChooseMode(mode), end)?;
        let mut t = end;
        match session.state().phase {
            Phase::AwaitHumanMove { piece } => {
                let mv = sample_move(&pos, Some(piece), HUMAN_DEPTH, rng.random())?;
                t += rng.random_range(800..2500);
                session.step(Intent::HumanMove(mv.uci()), t)?;
            }
            Phase::AwaitPieceType => {
                let piece = if rng.random_bool(0.75) {
                    favored.piece
                } else {
                    *pos.movable_piece_types().choose(&mut rng).expect("a legal move exists")
                };
                t += rng.random_range(500..1500);
                session.step(Intent::ChoosePiece(piece), t)?;
            }
            other => return Err(SimError::Invalid(format!("unexpected phase {} after mode choice", other.name()))),
        }
        prev_mode = Some(mode);
        prev_eval = Some(eval_cp);
        team_turns += 1;
        if session.state().ended {
            break;
        }
        if team_turns == cfg.turns {
            session.step(
                Intent::End {
                    result: GameResult::Unfinished,
                    reason: EndReason::TurnLimit,
                },
                t,
            )?;
            break;
        }
        t += rng.random_range(300..1200);
        session.step(Intent::OpponentReply, t)?;
    }
    Ok(session.into_events())
}

/// Seed of session `index` in a batch started from `seed`.
pub fn session_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9)
}

/// `count` sessions named `{prefix}-{index:03}`, generated in parallel.
pub fn generate_many(
    policy: &TruthPolicy,
    cfg: &SimConfig,
    prefix: &str,
    seed: u64,
    count: u64,
) -> Result<Vec<Vec<SessionEvent>>, SimError> {
    let indices: Vec<u64> = (0..count).collect();
    crate::par::par_map(&indices, |&i| {
        generate_session(policy, cfg, &format!("{prefix}-{i:03}"), session_seed(seed, i))
    })
    .into_iter()
    .collect()
}

/// Recomputes the policy's switch probability for every turn after the
/// first from the logged state.
pub fn truth_labels(events: &[SessionEvent], policy: &TruthPolicy) -> Result<Vec<TurnTruth>, SimError> {
    let state = replay_session(events)?;
    if state.origin.as_deref() != Some(ORIGIN) {
        return Err(SimError::Foreign(format!(
            "session {} was not produced by the simulator",
            state.session_id
        )));
    }
    let evaluator_cfg = match state.meta.as_ref().and_then(|m| m.get("evaluator")) {
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| SimError::Invalid(format!("evaluator in session metadata: {e}")))?,
        None => SimConfig::default().evaluator,
    };
    let mut evaluator = connect(&evaluator_cfg)?;
    let streams = Streams::from_events(events);
    let team_sign = state.team_color.sign();
    let mut out = Vec::new();
    for pair in state.turns.windows(2) {
        let (prev, turn) = (&pair[0], &pair[1]);
        let pos = position_of(&turn.fen_before)?;
        let inputs = PolicyInputs {
            fragility: fragility_score(&pos),
            entropy: gaze_entropy(&streams.gaze(turn.start_t, turn.mode_t), &state.board).unwrap_or(0.0),
            elapsed_s: (turn.mode_t - turn.start_t) as f64 / 1000.0,
            previous_brain: prev.mode == ControlMode::Brain,
            eval_cp: evaluator.evaluate(&pos)?.cp() * team_sign,
        };
        out.push(TurnTruth {
            turn: turn.index,
            p_switch: policy.probability(&inputs),
            switched: turn.mode != prev.mode,
        });
    }
    Ok(out)
}
