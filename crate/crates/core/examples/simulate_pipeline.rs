//! Simulate sessions with a known switching policy, extract features, train
//! the boosted model and score it on the held-out split.
//!
//! cargo run --release --example simulate_pipeline -- [sessions] [seed]

use std::time::Instant;

use handbrain::features::{extract_logs, feature_names, split_dataset, Dataset};
use handbrain::learner::{evaluate_metrics, train, TrainParams};
use handbrain::sim::{generate_many, SimConfig, TruthPolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sessions: u64 = args.next().map_or(Ok(20), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;

    let cfg = SimConfig::default();
    let policy = TruthPolicy::fragility_threshold(0.03);
    let clock = Instant::now();
    let logs = generate_many(&policy, &cfg, "sim", seed, sessions)?;
    let rows = extract_logs(&logs, 3, &cfg.evaluator)?;
    let simulated = clock.elapsed();
    let split = split_dataset(&rows, seed)?;
    let model = train(&Dataset::new(split.train.clone()), &TrainParams::default(), seed)?;
    let metrics = evaluate_metrics(&model, &Dataset::new(split.test.clone()), 0.5)?;

    let col = feature_names().iter().position(|n| n == "cur_fragility").expect("fragility column");
    let mut frag: Vec<f64> = rows.iter().map(|r| r.values[col].unwrap_or(f64::NAN)).collect();
    frag.sort_by(f64::total_cmp);
    println!("rows {}  train {}  test {}", rows.len(), split.train.len(), split.test.len());
    println!("fragility quartiles {:.4} {:.4} {:.4}", frag[frag.len() / 4], frag[frag.len() / 2], frag[3 * frag.len() / 4]);
    println!("switch rate {:.3}", rows.iter().filter(|r| r.label_switch).count() as f64 / rows.len() as f64);
    println!("accuracy {:.3}  F1 {:.3}", metrics.accuracy, metrics.f1);
    for imp in metrics.importance.iter().take(5) {
        println!("  {:<22} {:.3}", imp.feature, imp.gain);
    }
    println!("simulate+extract {:?}, total {:?}", simulated, clock.elapsed());
    Ok(())
}
