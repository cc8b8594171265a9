use serde::{Deserialize, Serialize};

use crate::learner::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    #[default]
    Logistic,
    /// 1 when the linear score is positive, else 0.
    Step,
}

/// Ground-truth switching behaviour: the probability that a turn's mode
/// differs from the previous turn's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruthPolicy {
    pub intercept: f64,
    pub fragility: f64,
    /// Per bit of realized gaze entropy over the thinking window.
    pub entropy: f64,
    /// Per second of thinking time.
    pub elapsed: f64,
    /// Added when the previous turn was played in brain mode.
    pub previous_brain: f64,
    /// Per pawn of team-perspective evaluation, clipped to ±10 pawns.
    pub eval: f64,
    pub link: Link,
    /// Probability that the sampled decision is flipped.
    pub noise: f64,
}

impl Default for TruthPolicy {
    fn default() -> Self {
        TruthPolicy {
            intercept: -2.5,
            fragility: 25.0,
            entropy: 0.2,
            elapsed: 0.05,
            previous_brain: 0.3,
            eval: -0.3,
            link: Link::Logistic,
            noise: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyInputs {
    pub fragility: f64,
    pub entropy: f64,
    pub elapsed_s: f64,
    pub previous_brain: bool,
    /// Centipawns, team perspective.
    pub eval_cp: i32,
}

impl TruthPolicy {
    /// Noise-free step policy: switch exactly when fragility exceeds `threshold`.
    pub fn fragility_threshold(threshold: f64) -> TruthPolicy {
        TruthPolicy {
            intercept: -threshold,
            fragility: 1.0,
            entropy: 0.0,
            elapsed: 0.0,
            previous_brain: 0.0,
            eval: 0.0,
            link: Link::Step,
            noise: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let coefs = [
            self.intercept,
            self.fragility,
            self.entropy,
            self.elapsed,
            self.previous_brain,
            self.eval,
        ];
        if coefs.iter().any(|c| !c.is_finite()) {
            return Err("policy coefficients must be finite".into());
        }
        if !(0.0..0.5).contains(&self.noise) {
            return Err(format!("noise must be in [0, 0.5), got {}", self.noise));
        }
        Ok(())
    }

    pub fn score(&self, x: &PolicyInputs) -> f64 {
        let pawns = (x.eval_cp as f64 / 100.0).clamp(-10.0, 10.0);
        self.intercept
            + self.fragility * x.fragility
            + self.entropy * x.entropy
            + self.elapsed * x.elapsed_s
            + if x.previous_brain { self.previous_brain } else { 0.0 }
            + self.eval * pawns
    }

    /// Switch probability before label noise.
    pub fn probability(&self, x: &PolicyInputs) -> f64 {
        let z = self.score(x);
        match self.link {
            Link::Logistic => sigmoid(z),
            Link::Step => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}
