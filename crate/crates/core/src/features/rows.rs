use serde::{Deserialize, Serialize};

use super::emotion::mean_surprise;
use super::gaze::{dwell_ratio, fixation_count, gaze_entropy, vertical_dispersion};
use super::FeatureError;
use crate::chess::{Color, Position};
use crate::engine::{Engine, EngineError};
use crate::fragility::fragility_score;
use crate::session::{
    replay_session, BoardRect, ControlMode, EmotionSample, EventBody, GazeSample, SessionEvent, SessionState,
    TurnRecord,
};

/// Statistics over the preceding k turns.
pub const LOCAL_FEATURES: [&str; 7] = [
    "loc_dispersion_delta",
    "loc_fixations_mean",
    "loc_surprise_mean",
    "loc_eval_delta_mean",
    "loc_eval_delta_last",
    "loc_fragility_mean",
    "loc_fragility_max",
];

/// Statistics over the current thinking window, up to the sample instant.
pub const CURRENT_FEATURES: [&str; 7] = [
    "cur_entropy",
    "cur_dispersion",
    "cur_dwell",
    "cur_surprise",
    "cur_elapsed",
    "cur_eval_cp",
    "cur_fragility",
];

/// Evaluation, fragility and time columns, dropped by the ablation.
pub const TASK_FEATURES: [&str; 7] = [
    "loc_eval_delta_mean",
    "loc_eval_delta_last",
    "loc_fragility_mean",
    "loc_fragility_max",
    "cur_elapsed",
    "cur_eval_cp",
    "cur_fragility",
];

/// Decisive-position filter threshold: ten pawns.
pub const DECISIVE_EVAL_CP: i32 = 1000;

pub fn feature_names() -> Vec<String> {
    LOCAL_FEATURES
        .iter()
        .chain(CURRENT_FEATURES.iter())
        .map(|s| s.to_string())
        .collect()
}

pub fn is_task_feature(name: &str) -> bool {
    TASK_FEATURES.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub session: String,
    pub turn: u32,
    /// Split segment id within the session, once assigned.
    pub segment: Option<u32>,
    /// Seconds since the turn started.
    pub elapsed: f64,
    /// Aligned with [`feature_names`]; `None` is a missing value.
    pub values: Vec<Option<f64>>,
    pub label_switch: bool,
    pub label_mode: ControlMode,
    /// Team-perspective evaluation change over the turn; analysis only.
    pub outcome_eval_delta: Option<f64>,
}

/// Engine and fragility readings of one turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnContext {
    /// White's perspective, before the team's move.
    pub eval_before: i32,
    /// White's perspective, right after the team's move.
    pub eval_after: i32,
    pub fragility: f64,
}

impl TurnContext {
    pub fn eval_delta(&self) -> f64 {
        (self.eval_after - self.eval_before) as f64
    }
}

fn fen_position(fen: &str) -> Position {
    fen.parse().expect("logged FENs come from replay")
}

pub fn turn_context(before: &Position, after: &Position, evaluator: &mut dyn Engine) -> Result<TurnContext, EngineError> {
    Ok(TurnContext {
        eval_before: evaluator.evaluate(before)?.cp(),
        eval_after: evaluator.evaluate(after)?.cp(),
        fragility: fragility_score(before),
    })
}

pub fn annotate_turns(state: &SessionState, evaluator: &mut dyn Engine) -> Result<Vec<TurnContext>, EngineError> {
    state
        .turns
        .iter()
        .map(|t| turn_context(&fen_position(&t.fen_before), &fen_position(&t.fen_after), evaluator))
        .collect()
}

/// Behavioural samples of a log, each tagged with the time of the batch that
/// delivered it. A sample is usable at instant `tau` only if its batch
/// arrived by then.
#[derive(Debug, Clone, Default)]
pub struct Streams {
    gaze: Vec<(u64, GazeSample)>,
    emotion: Vec<(u64, EmotionSample)>,
}

impl Streams {
    pub fn from_events(events: &[SessionEvent]) -> Streams {
        let mut s = Streams::default();
        for ev in events {
            match &ev.body {
                EventBody::GazeBatch { samples } => s.gaze.extend(samples.iter().map(|g| (ev.t, *g))),
                EventBody::EmotionBatch { samples } => s.emotion.extend(samples.iter().map(|e| (ev.t, *e))),
                _ => {}
            }
        }
        s
    }

    pub fn gaze(&self, from: u64, tau: u64) -> Vec<GazeSample> {
        self.gaze
            .iter()
            .filter(|(bt, g)| *bt <= tau && g.t >= from && g.t <= tau)
            .map(|(_, g)| *g)
            .collect()
    }

    pub fn emotion(&self, tau: u64) -> Vec<EmotionSample> {
        self.emotion
            .iter()
            .filter(|(bt, e)| *bt <= tau && e.t <= tau)
            .map(|(_, e)| *e)
            .collect()
    }
}

/// Whole-window statistics of a finished turn, feeding later local features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnSummary {
    pub dispersion: Option<f64>,
    pub entropy: Option<f64>,
    pub dwell: Option<f64>,
    pub fixations: usize,
    pub surprise: Option<f64>,
    pub ctx: TurnContext,
}

pub fn summarize_turn(streams: &Streams, board: &BoardRect, turn: &TurnRecord, ctx: TurnContext) -> TurnSummary {
    let window = streams.gaze(turn.start_t, turn.mode_t);
    let secs = turn.thinking_time_s();
    TurnSummary {
        dispersion: vertical_dispersion(&window),
        entropy: gaze_entropy(&window, board),
        dwell: dwell_ratio(&window, board, secs, secs).ok().flatten(),
        fixations: fixation_count(&window),
        surprise: mean_surprise(&streams.emotion(turn.mode_t), turn.start_t, turn.mode_t),
        ctx,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn local_values(prev: &[TurnSummary]) -> [Option<f64>; 7] {
    let disp: Vec<f64> = prev.iter().filter_map(|t| t.dispersion).collect();
    let disp_delta = match disp.len() {
        0 => None,
        1 => Some(0.0),
        n => Some((disp[n - 1] - disp[0]) / (n - 1) as f64),
    };
    [
        disp_delta,
        mean(prev.iter().map(|t| t.fixations as f64)),
        mean(prev.iter().filter_map(|t| t.surprise)),
        mean(prev.iter().map(|t| t.ctx.eval_delta())),
        prev.last().map(|t| t.ctx.eval_delta()),
        mean(prev.iter().map(|t| t.ctx.fragility)),
        prev.iter().map(|t| t.ctx.fragility).reduce(f64::max),
    ]
}

/// Feature vector of a turn that started at `start_t`, as known at `tau`.
/// `prev` holds the summaries of all earlier turns of the session.
pub fn features_at(
    streams: &Streams,
    board: &BoardRect,
    prev: &[TurnSummary],
    k: usize,
    start_t: u64,
    tau: u64,
    ctx: &TurnContext,
) -> Vec<Option<f64>> {
    let local = local_values(&prev[prev.len().saturating_sub(k)..]);
    let window = streams.gaze(start_t, tau);
    let elapsed = (tau - start_t) as f64 / 1000.0;
    let dwell = if elapsed > 0.0 {
        dwell_ratio(&window, board, elapsed, elapsed).ok().flatten()
    } else {
        None
    };
    let current = [
        gaze_entropy(&window, board),
        vertical_dispersion(&window),
        dwell,
        mean_surprise(&streams.emotion(tau), start_t, tau),
        Some(elapsed),
        Some(ctx.eval_before as f64),
        Some(ctx.fragility),
    ];
    local.into_iter().chain(current).collect()
}

/// Instants (ms since turn start) at which a turn is sampled: every full
/// second of thinking time, or once at the decision for sub-second turns.
pub fn sample_offsets_ms(thinking_ms: u64) -> Vec<u64> {
    if thinking_ms >= 1000 {
        (1..=thinking_ms / 1000).map(|s| s * 1000).collect()
    } else {
        vec![thinking_ms]
    }
}

/// Why a turn contributes no rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exclusion {
    FirstTurn,
    DecisiveEval,
    MaterialImbalance,
}

pub fn exclusion(turn: &TurnRecord, ctx: &TurnContext) -> Option<Exclusion> {
    if turn.index == 1 {
        Some(Exclusion::FirstTurn)
    } else if ctx.eval_before.abs() >= DECISIVE_EVAL_CP {
        Some(Exclusion::DecisiveEval)
    } else if fen_position(&turn.fen_before).has_decisive_material_imbalance() {
        Some(Exclusion::MaterialImbalance)
    } else {
        None
    }
}

/// One-second feature samples of every eligible turn of a session log.
pub fn build_feature_rows(
    events: &[SessionEvent],
    k: usize,
    contexts: &[TurnContext],
) -> Result<Vec<FeatureRow>, FeatureError> {
    if !(k == 3 || k == 5) {
        return Err(FeatureError::Invalid(format!("window size k must be 3 or 5, got {k}")));
    }
    let state = replay_session(events)?;
    rows_from_state(&state, events, k, contexts)
}

pub(crate) fn rows_from_state(
    state: &SessionState,
    events: &[SessionEvent],
    k: usize,
    contexts: &[TurnContext],
) -> Result<Vec<FeatureRow>, FeatureError> {
    if contexts.len() != state.turns.len() {
        return Err(FeatureError::Invalid(format!(
            "{} turn contexts for {} turns",
            contexts.len(),
            state.turns.len()
        )));
    }
    let streams = Streams::from_events(events);
    let team_sign = if state.team_color == Color::White { 1.0 } else { -1.0 };
    let mut summaries: Vec<TurnSummary> = Vec::with_capacity(state.turns.len());
    let mut rows = Vec::new();
    for (i, (turn, ctx)) in state.turns.iter().zip(contexts).enumerate() {
        if exclusion(turn, ctx).is_none() {
            let label_switch = turn.mode != state.turns[i - 1].mode;
            for offset in sample_offsets_ms(turn.mode_t - turn.start_t) {
                let tau = turn.start_t + offset;
                rows.push(FeatureRow {
                    session: state.session_id.clone(),
                    turn: turn.index,
                    segment: None,
                    elapsed: offset as f64 / 1000.0,
                    values: features_at(&streams, &state.board, &summaries, k, turn.start_t, tau, ctx),
                    label_switch,
                    label_mode: turn.mode,
                    outcome_eval_delta: Some(ctx.eval_delta() * team_sign),
                });
            }
        }
        summaries.push(summarize_turn(&streams, &state.board, turn, *ctx));
    }
    Ok(rows)
}

/// Replays a log, evaluates its turns and builds its rows.
pub fn extract_session(
    events: &[SessionEvent],
    k: usize,
    evaluator: &mut dyn Engine,
) -> Result<Vec<FeatureRow>, FeatureError> {
    let state = replay_session(events)?;
    let contexts = annotate_turns(&state, evaluator)?;
    if !(k == 3 || k == 5) {
        return Err(FeatureError::Invalid(format!("window size k must be 3 or 5, got {k}")));
    }
    rows_from_state(&state, events, k, &contexts)
}
