use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::mann_whitney::{mann_whitney_u, UTestResult};
use crate::features::{Dataset, FeatureRow};

pub const SIGNIFICANCE: f64 = 0.05;

/// Report variables and the dataset column each is read from.
pub const VARIABLES: [(&str, &str); 6] = [
    ("vertical gaze dispersion", "cur_dispersion"),
    ("gaze entropy", "cur_entropy"),
    ("dwell ratio", "cur_dwell"),
    ("fragility", "cur_fragility"),
    ("mean surprise", "cur_surprise"),
    ("evaluation change (cp)", "outcome_eval_delta"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Tested {
        /// Group a is the switch turns, group b the others.
        test: UTestResult,
        significant: bool,
    },
    InsufficientData {
        n_switch: usize,
        n_no_switch: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableReport {
    pub variable: String,
    pub column: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub turns: usize,
    pub switch_turns: usize,
    pub no_switch_turns: usize,
    pub alpha: f64,
    pub variables: Vec<VariableReport>,
}

/// One row per (session, turn): the last sample, taken at decision time.
pub fn per_turn(rows: &[FeatureRow]) -> Vec<&FeatureRow> {
    let mut last: BTreeMap<(&str, u32), &FeatureRow> = BTreeMap::new();
    for r in rows {
        let slot = last.entry((r.session.as_str(), r.turn)).or_insert(r);
        if r.elapsed >= slot.elapsed {
            *slot = r;
        }
    }
    last.into_values().collect()
}

fn column_value(ds: &Dataset, row: &FeatureRow, column: &str) -> Option<f64> {
    if column == "outcome_eval_delta" {
        return row.outcome_eval_delta;
    }
    let i = ds.feature_names.iter().position(|n| n == column)?;
    row.values[i]
}

pub fn analysis_report(ds: &Dataset) -> Report {
    let turns = per_turn(&ds.rows);
    let switch_turns = turns.iter().filter(|r| r.label_switch).count();
    let variables = VARIABLES
        .iter()
        .map(|&(variable, column)| {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for r in &turns {
                if let Some(v) = column_value(ds, r, column).filter(|v| v.is_finite()) {
                    if r.label_switch { a.push(v) } else { b.push(v) }
                }
            }
            let outcome = if a.len() < 2 || b.len() < 2 {
                Outcome::InsufficientData {
                    n_switch: a.len(),
                    n_no_switch: b.len(),
                }
            } else {
                let test = mann_whitney_u(&a, &b).expect("groups are nonempty and finite");
                Outcome::Tested {
                    significant: test.p < SIGNIFICANCE,
                    test,
                }
            };
            VariableReport {
                variable: variable.into(),
                column: column.into(),
                outcome,
            }
        })
        .collect();
    Report {
        turns: turns.len(),
        switch_turns,
        no_switch_turns: turns.len() - switch_turns,
        alpha: SIGNIFICANCE,
        variables,
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Switch vs no-switch turns\n");
        let _ = writeln!(
            s,
            "{} turns: {} switch, {} no switch. Two-sided Mann-Whitney U, alpha = {}.\n",
            self.turns, self.switch_turns, self.no_switch_turns, self.alpha
        );
        let _ = writeln!(s, "| Variable | Mean (switch) | Mean (no switch) | U | n·m − U | p | Method | Significant |");
        let _ = writeln!(s, "|---|---|---|---|---|---|---|---|");
        for v in &self.variables {
            match &v.outcome {
                Outcome::Tested { test, significant } => {
                    let method = match test.method {
                        super::Method::Exact => "exact",
                        super::Method::NormalApprox => "normal",
                    };
                    let _ = writeln!(
                        s,
                        "| {} | {:.3} | {:.3} | {} | {} | {:.4} | {} | {} |",
                        v.variable,
                        test.mean_a,
                        test.mean_b,
                        test.u,
                        test.u_complement,
                        test.p,
                        method,
                        if *significant { "yes" } else { "no" }
                    );
                }
                Outcome::InsufficientData { n_switch, n_no_switch } => {
                    let _ = writeln!(
                        s,
                        "| {} | insufficient data ({n_switch} switch, {n_no_switch} no switch) | | | | | | |",
                        v.variable
                    );
                }
            }
        }
        s
    }

    pub fn is_significant(&self, column: &str) -> bool {
        self.variables
            .iter()
            .any(|v| v.column == column && matches!(v.outcome, Outcome::Tested { significant: true, .. }))
    }
}
