//! Gradient-boosted decision trees trained with a time-weighted focal loss.
//!
//! Boosting is second order: each round fits a tree to the weighted gradient
//! and hessian of the loss at the current margins. Missing feature values
//! (NaN) are routed to whichever side of a split gains more.

mod loss;
mod metrics;
mod model;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{validation_holdout, Dataset};

pub use loss::{focal_terms, sigmoid, softplus, time_weight, FocalTerms, LossParams, TimeScale, HESSIAN_FLOOR};
pub use metrics::{Confusion, FeatureImportance, Metrics};
pub use model::{
    dataset_matrix, root_statistics, train, train_matrix, BoostedModel, LossTrace, TrainData, TrainParams,
    MODEL_FORMAT, MODEL_VERSION,
};
pub use tree::{Node, Tree};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("data: {0}")]
    Data(String),
    #[error("feature layout: {0}")]
    Layout(String),
    #[error("model format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

pub fn evaluate_metrics(model: &BoostedModel, ds: &Dataset, threshold: f64) -> Result<Metrics, LearnError> {
    if ds.rows.is_empty() {
        return Err(LearnError::Data("no evaluation rows".into()));
    }
    let probs = model.predict_dataset(ds)?;
    let predicted: Vec<bool> = probs.iter().map(|&p| p >= threshold).collect();
    let labels: Vec<bool> = ds.rows.iter().map(|r| r.label_switch).collect();
    let confusion = Confusion::from_predictions(&labels, &predicted);
    Ok(Metrics {
        rows: ds.rows.len(),
        threshold,
        accuracy: confusion.accuracy(),
        f1: confusion.f1(),
        confusion,
        importance: model
            .gain_importance()
            .into_iter()
            .map(|(feature, gain)| FeatureImportance { feature, gain })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub params: TrainParams,
    pub validation_f1: f64,
    pub validation_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub best: TrainParams,
    pub trials: Vec<Trial>,
}

/// Candidate settings explored by [`tune`], all derived from `base`.
pub fn tuning_grid(base: &TrainParams) -> Vec<TrainParams> {
    let mut grid = Vec::new();
    for max_depth in [2, 4] {
        for learning_rate in [0.05, 0.1, 0.3] {
            for gamma in [0.0, 2.0] {
                grid.push(TrainParams {
                    max_depth,
                    learning_rate,
                    loss: LossParams { gamma, ..base.loss },
                    ..*base
                });
            }
        }
    }
    grid
}

/// Picks hyperparameters by validation F1, holding out the last training
/// segment of each game. Ties go to the earlier grid entry.
pub fn tune(train_rows: &Dataset, base: &TrainParams, seed: u64) -> Result<TuneReport, LearnError> {
    let (fit, val) = validation_holdout(&train_rows.rows);
    let fit = Dataset {
        feature_names: train_rows.feature_names.clone(),
        rows: fit,
    };
    let val = Dataset {
        feature_names: train_rows.feature_names.clone(),
        rows: val,
    };
    if val.rows.is_empty() {
        return Err(LearnError::Data("no validation rows: every game has a single segment".into()));
    }
    let mut trials = Vec::new();
    let mut best: Option<(f64, TrainParams)> = None;
    for params in tuning_grid(base) {
        let model = train(&fit, &params, seed)?;
        let m = evaluate_metrics(&model, &val, 0.5)?;
        if best.is_none_or(|(f1, _)| m.f1 > f1) {
            best = Some((m.f1, params));
        }
        trials.push(Trial {
            params,
            validation_f1: m.f1,
            validation_accuracy: m.accuracy,
        });
    }
    Ok(TuneReport {
        best: best.expect("grid is nonempty").1,
        trials,
    })
}
