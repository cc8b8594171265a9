use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(labels: &[bool], predicted: &[bool]) -> Confusion {
        let mut c = Confusion {
            tp: 0,
            fp: 0,
            tn: 0,
            fn_: 0,
        };
        for (&y, &p) in labels.iter().zip(predicted) {
            match (y, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / self.total() as f64
        }
    }

    /// `2tp / (2tp + fp + fn)`, 0 when undefined.
    pub fn f1(&self) -> f64 {
        let d = 2 * self.tp + self.fp + self.fn_;
        if d == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / d as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rows: usize,
    pub threshold: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub confusion: Confusion,
    /// Total split gain per feature, largest first.
    pub importance: Vec<FeatureImportance>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_by_hand() {
        let c = Confusion {
            tp: 2,
            fp: 1,
            tn: 0,
            fn_: 1,
        };
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-15);
        let none = Confusion::from_predictions(&[true, false, true], &[false, false, false]);
        assert_eq!(none.f1(), 0.0);
        assert!((none.accuracy() - 1.0 / 3.0).abs() < 1e-15);
        let perfect = Confusion::from_predictions(&[true, false], &[true, false]);
        assert_eq!((perfect.accuracy(), perfect.f1()), (1.0, 1.0));
    }
}
