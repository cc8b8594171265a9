//! Behavioural and task features sampled once per second of thinking time.
//! Also holds the turn filters and the segment-wise train/test split.

mod dataset;
mod emotion;
mod gaze;
mod rows;
mod split;

use thiserror::Error;

use crate::engine::{connect, EngineConfig, EngineError};
use crate::par::par_map;
use crate::session::{ReplayError, SessionEvent};

pub use dataset::Dataset;
pub use emotion::mean_surprise;
pub use gaze::{
    detect_fixations, dwell_ratio, fixation_count, gaze_entropy, percentile, vertical_dispersion, Fixation,
    FIXATION_MIN_MS, FIXATION_RADIUS_PX,
};
pub use rows::{
    annotate_turns, build_feature_rows, exclusion, extract_session, feature_names, features_at, is_task_feature,
    sample_offsets_ms, summarize_turn, turn_context, Exclusion, FeatureRow, Streams, TurnContext, TurnSummary,
    CURRENT_FEATURES, DECISIVE_EVAL_CP, LOCAL_FEATURES, TASK_FEATURES,
};
pub use split::{
    split_dataset, validation_holdout, DatasetSplit, Partition, SegmentEntry, SplitManifest, MAX_SEGMENT,
    MIN_SEGMENT, TRAIN_TARGET,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("io: {0}")]
    Io(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Rows of many session logs, extracted in parallel, in log order. Each
/// worker owns its evaluator.
pub fn extract_logs(
    logs: &[Vec<SessionEvent>],
    k: usize,
    evaluator: &EngineConfig,
) -> Result<Vec<FeatureRow>, FeatureError> {
    let per_log = par_map(logs, |events| {
        let mut engine = connect(evaluator)?;
        extract_session(events, k, engine.as_mut())
    });
    let mut rows = Vec::new();
    for r in per_log {
        rows.extend(r?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::ControlMode;

    fn row(session: &str, turn: u32) -> FeatureRow {
        FeatureRow {
            session: session.into(),
            turn,
            segment: None,
            elapsed: 1.0,
            values: vec![Some(1.5), None],
            label_switch: turn % 2 == 0,
            label_mode: ControlMode::Hand,
            outcome_eval_delta: Some(-12.0),
        }
    }

    #[test]
    fn offsets_follow_the_sampling_rule() {
        assert_eq!(sample_offsets_ms(4200), vec![1000, 2000, 3000, 4000]);
        assert_eq!(sample_offsets_ms(700), vec![700]);
        assert_eq!(sample_offsets_ms(1000), vec![1000]);
    }

    #[test]
    fn split_partitions_turns_deterministically() {
        let rows: Vec<_> = (2..12).flat_map(|t| [row("g", t), row("g", t)]).collect();
        let a = split_dataset(&rows, 4).unwrap();
        let b = split_dataset(&rows, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.train.len() + a.test.len(), rows.len());
        for t in 2..12 {
            let in_train = a.train.iter().any(|r| r.turn == t);
            let in_test = a.test.iter().any(|r| r.turn == t);
            assert!(in_train ^ in_test, "turn {t}");
        }
        assert!(split_dataset(&[], 1).is_err());
    }

    #[test]
    fn csv_round_trip_keeps_missing_values() {
        let ds = Dataset {
            feature_names: vec!["a".into(), "b".into()],
            rows: vec![row("s1", 2), row("s1", 3)],
        };
        let text = ds.to_csv_string();
        assert!(text.starts_with("session,turn,segment,elapsed,a,b,label_switch,label_mode,outcome_eval_delta\n"));
        assert!(text.contains("s1,2,,1,1.5,,1,hand,-12\n"));
        assert_eq!(Dataset::from_csv_str(&text).unwrap(), ds);
    }
}
