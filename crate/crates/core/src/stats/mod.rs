//! Mann-Whitney U tests comparing switch and no-switch turns.

mod mann_whitney;
mod report;

use thiserror::Error;

pub use mann_whitney::{exact_distribution, mann_whitney_u, mann_whitney_with, Method, UTestResult, EXACT_LIMIT};
pub use report::{analysis_report, per_turn, Outcome, Report, VariableReport, SIGNIFICANCE, VARIABLES};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("both groups need at least one value")]
    EmptyGroup,
    #[error("values must be finite")]
    NonFinite,
    #[error("the exact distribution assumes no ties")]
    TiesInExact,
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;
    use crate::features::{feature_names, Dataset, FeatureRow};
    use crate::session::ControlMode;

    fn corpus(seed: u64, switch_mean: f64, other_mean: f64) -> Dataset {
        let names = feature_names();
        let disp = names.iter().position(|n| n == "cur_dispersion").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 50.0).unwrap();
        let unit = Normal::new(0.0, 1.0).unwrap();
        let rows = (0..200)
            .map(|t| {
                let switch = t % 2 == 0;
                let mut values: Vec<Option<f64>> = (0..names.len()).map(|_| Some(unit.sample(&mut rng))).collect();
                let mean = if switch { switch_mean } else { other_mean };
                values[disp] = Some(mean + noise.sample(&mut rng));
                FeatureRow {
                    session: format!("s{}", t / 20),
                    turn: t % 20 + 2,
                    segment: None,
                    elapsed: 1.0,
                    values,
                    label_switch: switch,
                    label_mode: ControlMode::Hand,
                    outcome_eval_delta: Some(unit.sample(&mut rng)),
                }
            })
            .collect();
        Dataset::new(rows)
    }

    #[test]
    fn constructed_effect_is_detected() {
        let r = analysis_report(&corpus(1, 700.0, 620.0));
        assert_eq!(r.turns, 200);
        assert!(r.is_significant("cur_dispersion"));
        assert!(r.to_markdown().contains("| vertical gaze dispersion |"));
        assert_eq!(r, analysis_report(&corpus(1, 700.0, 620.0)));
    }

    #[test]
    fn per_turn_keeps_the_last_sample() {
        let mut ds = corpus(2, 0.0, 0.0);
        let mut late = ds.rows[0].clone();
        late.elapsed = 3.0;
        late.values[0] = Some(99.0);
        ds.rows.push(late);
        let turns = per_turn(&ds.rows);
        assert_eq!(turns.len(), 200);
        assert!(turns.iter().any(|r| r.values[0] == Some(99.0)));
    }

    #[test]
    fn empty_switch_group_is_insufficient() {
        let mut ds = corpus(3, 0.0, 0.0);
        ds.rows.iter_mut().for_each(|r| r.label_switch = false);
        let r = analysis_report(&ds);
        assert!(r
            .variables
            .iter()
            .all(|v| matches!(v.outcome, Outcome::InsufficientData { n_switch: 0, .. })));
        assert!(r.to_markdown().contains("insufficient data"));
    }
}
