//! Dataset CSV: a header of canonical names, one row per sample, missing
//! values as empty fields.

use std::path::Path;

use super::rows::{feature_names, FeatureRow};
use super::FeatureError;
use crate::session::ControlMode;

const LEADING: [&str; 4] = ["session", "turn", "segment", "elapsed"];
const TRAILING: [&str; 3] = ["label_switch", "label_mode", "outcome_eval_delta"];

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl Dataset {
    pub fn new(rows: Vec<FeatureRow>) -> Dataset {
        Dataset {
            feature_names: feature_names(),
            rows,
        }
    }

    /// Keeps only the named feature columns, in the given order.
    pub fn select(&self, keep: &[String]) -> Result<Dataset, FeatureError> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|name| {
                self.feature_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| FeatureError::Invalid(format!("no feature column '{name}'")))
            })
            .collect::<Result<_, _>>()?;
        let rows = self
            .rows
            .iter()
            .map(|r| FeatureRow {
                values: idx.iter().map(|&i| r.values[i]).collect(),
                ..r.clone()
            })
            .collect();
        Ok(Dataset {
            feature_names: keep.to_vec(),
            rows,
        })
    }

    pub fn without(&self, drop: impl Fn(&str) -> bool) -> Dataset {
        let keep: Vec<String> = self.feature_names.iter().filter(|n| !drop(n)).cloned().collect();
        self.select(&keep).expect("kept names exist")
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        write_records(&mut w, self).expect("writing to memory");
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), FeatureError> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| FeatureError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read_csv(path: &Path) -> Result<Dataset, FeatureError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| FeatureError::Io(format!("{}: {e}", path.display())))?;
        Dataset::from_csv_str(&text).map_err(|e| match e {
            FeatureError::Csv(msg) => FeatureError::Csv(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_csv_str(text: &str) -> Result<Dataset, FeatureError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| FeatureError::Csv(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let n = header.len();
        if n < LEADING.len() + TRAILING.len()
            || header[..LEADING.len()] != LEADING
            || header[n - TRAILING.len()..] != TRAILING
        {
            return Err(FeatureError::Csv(format!(
                "header must start with {LEADING:?} and end with {TRAILING:?}"
            )));
        }
        let feature_names = header[LEADING.len()..n - TRAILING.len()].to_vec();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| FeatureError::Csv(format!("line {line}: {e}")))?;
            let bad = |col: &str, v: &str| FeatureError::Csv(format!("line {line}: bad {col} value '{v}'"));
            let opt = |col: &str, v: &str| -> Result<Option<f64>, FeatureError> {
                if v.is_empty() {
                    Ok(None)
                } else {
                    v.parse::<f64>().map(Some).map_err(|_| bad(col, v))
                }
            };
            let values = (LEADING.len()..n - TRAILING.len())
                .map(|c| opt(&header[c], &rec[c]))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(FeatureRow {
                session: rec[0].to_string(),
                turn: rec[1].parse().map_err(|_| bad("turn", &rec[1]))?,
                segment: if rec[2].is_empty() {
                    None
                } else {
                    Some(rec[2].parse().map_err(|_| bad("segment", &rec[2]))?)
                },
                elapsed: rec[3].parse().map_err(|_| bad("elapsed", &rec[3]))?,
                values,
                label_switch: match &rec[n - 3] {
                    "1" => true,
                    "0" => false,
                    v => return Err(bad("label_switch", v)),
                },
                label_mode: rec[n - 2].parse().map_err(|_| bad("label_mode", &rec[n - 2]))?,
                outcome_eval_delta: opt("outcome_eval_delta", &rec[n - 1])?,
            });
        }
        Ok(Dataset { feature_names, rows })
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn write_records<W: std::io::Write>(w: &mut csv::Writer<W>, ds: &Dataset) -> csv::Result<()> {
    let header: Vec<&str> = LEADING
        .iter()
        .copied()
        .chain(ds.feature_names.iter().map(String::as_str))
        .chain(TRAILING.iter().copied())
        .collect();
    w.write_record(&header)?;
    for r in &ds.rows {
        let mut rec = vec![
            r.session.clone(),
            r.turn.to_string(),
            r.segment.map_or_else(String::new, |s| s.to_string()),
            r.elapsed.to_string(),
        ];
        rec.extend(r.values.iter().map(|v| fmt_opt(*v)));
        rec.push(if r.label_switch { "1" } else { "0" }.into());
        rec.push(match r.label_mode {
            ControlMode::Hand => "hand".into(),
            ControlMode::Brain => "brain".into(),
        });
        rec.push(fmt_opt(r.outcome_eval_delta));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
