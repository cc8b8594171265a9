use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::loss::{focal_terms, sigmoid, time_weight, LossParams, TimeScale};
use super::tree::{grow_tree, Columns, Tree, TreeParams};
use super::LearnError;
use crate::features::Dataset;

pub const MODEL_FORMAT: &str = "handbrain-gbdt";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainParams {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Minimum number of samples in each child of a split.
    pub min_leaf: usize,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Row fraction drawn (without replacement) for each tree.
    pub subsample: f64,
    pub loss: LossParams,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            trees: 200,
            max_depth: 4,
            learning_rate: 0.1,
            min_leaf: 5,
            lambda: 1.0,
            subsample: 1.0,
            loss: LossParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub format: String,
    pub version: u32,
    pub feature_names: Vec<String>,
    pub params: TrainParams,
    pub time_scale: TimeScale,
    /// Log-odds of the training base rate.
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

/// Training matrix: rows of feature values (NaN = missing), labels and the
/// elapsed time that drives the sample weights.
pub struct TrainData<'a> {
    pub feature_names: &'a [String],
    pub x: &'a [Vec<f64>],
    pub y: &'a [bool],
    pub elapsed: &'a [f64],
}

/// Weighted mean training loss after each boosting round (entry 0 is the
/// base score alone).
pub type LossTrace = Vec<f64>;

pub fn dataset_matrix(ds: &Dataset) -> (Vec<Vec<f64>>, Vec<bool>, Vec<f64>) {
    let x = ds
        .rows
        .iter()
        .map(|r| r.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
        .collect();
    let y = ds.rows.iter().map(|r| r.label_switch).collect();
    let e = ds.rows.iter().map(|r| r.elapsed).collect();
    (x, y, e)
}

fn weighted_loss(margins: &[f64], y: &[bool], w: &[f64], lp: &LossParams) -> f64 {
    let total: f64 = w.iter().sum();
    margins
        .iter()
        .zip(y)
        .zip(w)
        .map(|((m, y), w)| w * focal_terms(*m, *y, lp).loss)
        .sum::<f64>()
        / total
}

pub fn train_matrix(data: &TrainData, params: &TrainParams, seed: u64) -> Result<(BoostedModel, LossTrace), LearnError> {
    let n = data.y.len();
    if n == 0 {
        return Err(LearnError::Data("no training rows".into()));
    }
    let positives = data.y.iter().filter(|&&y| y).count();
    if positives == 0 || positives == n {
        return Err(LearnError::Data("training labels contain a single class".into()));
    }
    if data.x.len() != n || data.elapsed.len() != n || data.x.iter().any(|r| r.len() != data.feature_names.len()) {
        return Err(LearnError::Data("training matrix shape mismatch".into()));
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) {
        return Err(LearnError::Data(format!("subsample must be in (0,1], got {}", params.subsample)));
    }

    let scale = TimeScale::fit(data.elapsed);
    let weights: Vec<f64> = data
        .elapsed
        .iter()
        .map(|&e| time_weight(scale.normalize(e), params.loss.beta))
        .collect();
    let rate = positives as f64 / n as f64;
    let base_score = (rate / (1.0 - rate)).ln();

    let cols = (0..data.feature_names.len())
        .map(|f| data.x.iter().map(|r| r[f]).collect())
        .collect();
    let columns = Columns::new(cols, n);
    let tp = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        lambda: params.lambda,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut in_bag = vec![true; n];
    let mut trees = Vec::with_capacity(params.trees);
    let mut trace = vec![weighted_loss(&margins, data.y, &weights, &params.loss)];
    for _ in 0..params.trees {
        for i in 0..n {
            let t = focal_terms(margins[i], data.y[i], &params.loss);
            grad[i] = weights[i] * t.gradient;
            hess[i] = weights[i] * t.newton_hessian();
        }
        if params.subsample < 1.0 {
            for b in in_bag.iter_mut() {
                *b = rng.random::<f64>() < params.subsample;
            }
        }
        let tree = grow_tree(&columns, &grad, &hess, &in_bag, &tp);
        for (i, m) in margins.iter_mut().enumerate() {
            *m += params.learning_rate * tree.predict_column(&columns, i);
        }
        trace.push(weighted_loss(&margins, data.y, &weights, &params.loss));
        trees.push(tree);
    }

    let model = BoostedModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        feature_names: data.feature_names.to_vec(),
        params: *params,
        time_scale: scale,
        base_score,
        learning_rate: params.learning_rate,
        trees,
    };
    Ok((model, trace))
}

pub fn train(ds: &Dataset, params: &TrainParams, seed: u64) -> Result<BoostedModel, LearnError> {
    let (x, y, e) = dataset_matrix(ds);
    let data = TrainData {
        feature_names: &ds.feature_names,
        x: &x,
        y: &y,
        elapsed: &e,
    };
    Ok(train_matrix(&data, params, seed)?.0)
}

impl BoostedModel {
    /// A model with no trees: predicts `sigmoid(base_score)` everywhere.
    pub fn constant(feature_names: Vec<String>, base_score: f64) -> BoostedModel {
        BoostedModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            feature_names,
            params: TrainParams::default(),
            time_scale: TimeScale { min: 0.0, max: 0.0 },
            base_score,
            learning_rate: TrainParams::default().learning_rate,
            trees: Vec::new(),
        }
    }

    pub fn margin(&self, row: &[f64]) -> Result<f64, LearnError> {
        if row.len() != self.feature_names.len() {
            return Err(LearnError::Layout(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.feature_names.len()
            )));
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        Ok(self.base_score + self.learning_rate * sum)
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64, LearnError> {
        Ok(sigmoid(self.margin(row)?))
    }

    pub fn predict_options(&self, row: &[Option<f64>]) -> Result<f64, LearnError> {
        let x: Vec<f64> = row.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        self.predict_proba(&x)
    }

    /// Probabilities for a dataset whose columns may be ordered differently;
    /// every model feature must be present.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<f64>, LearnError> {
        let aligned = ds
            .select(&self.feature_names)
            .map_err(|e| LearnError::Layout(e.to_string()))?;
        aligned.rows.iter().map(|r| self.predict_options(&r.values)).collect()
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, LearnError> {
        rows.iter().map(|r| self.predict_proba(r)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<BoostedModel, LearnError> {
        let model: BoostedModel = serde_json::from_str(text).map_err(|e| LearnError::Format(e.to_string()))?;
        if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
            return Err(LearnError::Format(format!(
                "unsupported model format {} v{}",
                model.format, model.version
            )));
        }
        let n = model.feature_names.len();
        for tree in &model.trees {
            for node in &tree.nodes {
                if let super::tree::Node::Split { feature, left, right, .. } = node {
                    if *feature >= n || *left >= tree.nodes.len() || *right >= tree.nodes.len() {
                        return Err(LearnError::Format("tree refers to a missing feature or node".into()));
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        std::fs::write(path, self.to_json()).map_err(|e| LearnError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<BoostedModel, LearnError> {
        let text = std::fs::read_to_string(path).map_err(|e| LearnError::Io(format!("{}: {e}", path.display())))?;
        BoostedModel::from_json(&text)
    }

    /// SHA-256 of the serialized model.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Total split gain per feature.
    pub fn gain_importance(&self) -> Vec<(String, f64)> {
        let mut gain = vec![0.0; self.feature_names.len()];
        for tree in &self.trees {
            for node in &tree.nodes {
                if let super::tree::Node::Split { feature, gain: g, .. } = node {
                    gain[*feature] += g;
                }
            }
        }
        let mut out: Vec<(String, f64)> = self.feature_names.iter().cloned().zip(gain).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

/// Sum of weighted gradients and hessians at the root of the first tree.
pub fn root_statistics(y: &[bool], elapsed_norm: &[f64], base_score: f64, lp: &LossParams) -> (f64, f64) {
    y.iter().zip(elapsed_norm).fold((0.0, 0.0), |(g, h), (&y, &e)| {
        let t = focal_terms(base_score, y, lp);
        let w = time_weight(e, lp.beta);
        (g + w * t.gradient, h + w * t.newton_hessian())
    })
}
