use serde::{Deserialize, Serialize};

/// Focal-loss shape and per-sample time weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossParams {
    /// Focusing exponent; 0 gives cross-entropy.
    pub gamma: f64,
    /// Uniform scale of the loss.
    pub alpha: f64,
    /// Time-weight exponent: `w = exp(beta * elapsed_norm)`.
    pub beta: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        LossParams {
            gamma: 2.0,
            alpha: 0.25,
            beta: 1.0,
        }
    }
}

impl LossParams {
    pub const LOGISTIC: LossParams = LossParams {
        gamma: 0.0,
        alpha: 1.0,
        beta: 0.0,
    };
}

pub const HESSIAN_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalTerms {
    pub loss: f64,
    pub gradient: f64,
    /// Exact second derivative; negative for confidently wrong samples when
    /// gamma > 0.
    pub hessian: f64,
}

impl FocalTerms {
    /// Hessian as used for Newton steps.
    pub fn newton_hessian(&self) -> f64 {
        self.hessian.max(HESSIAN_FLOOR)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Loss `-alpha (1-p_t)^gamma ln p_t` and its first two derivatives with
/// respect to the margin, where `p_t` is the predicted probability of the
/// true class.
pub fn focal_terms(margin: f64, y: bool, lp: &LossParams) -> FocalTerms {
    let s = if y { 1.0 } else { -1.0 };
    let p_t = sigmoid(s * margin);
    let q = sigmoid(-s * margin);
    let ln_p = -softplus(-s * margin);
    let (g, a) = (lp.gamma, lp.alpha);
    let q_g = q.powf(g);
    FocalTerms {
        loss: -a * q_g * ln_p,
        gradient: s * a * q_g * (g * p_t * ln_p - q),
        hessian: a * p_t * q_g * (g * ln_p * (q - g * p_t) + q * (2.0 * g + 1.0)),
    }
}

pub fn time_weight(elapsed_norm: f64, beta: f64) -> f64 {
    (beta * elapsed_norm).exp()
}

/// Min-max scaling bounds of elapsed time over a training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeScale {
    pub min: f64,
    pub max: f64,
}

impl TimeScale {
    pub fn fit(elapsed: &[f64]) -> TimeScale {
        let min = elapsed.iter().copied().fold(f64::INFINITY, f64::min);
        let max = elapsed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        TimeScale { min, max }
    }

    pub fn normalize(&self, e: f64) -> f64 {
        if self.max > self.min {
            ((e - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}
