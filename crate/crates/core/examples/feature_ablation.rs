//! Does the classifier gain from knowing the board? Trains with and without
//! the task columns (evaluation, fragility, time) on simulated players whose
//! switching depends on fragility and evaluation, over several seeds.
//!
//! cargo run --release --example feature_ablation -- [sessions] [seeds] [policy.json]

use handbrain::features::{extract_logs, is_task_feature, split_dataset, Dataset};
use handbrain::learner::{evaluate_metrics, train, TrainParams};
use handbrain::sim::{generate_many, Link, SimConfig, TruthPolicy};

fn policy() -> TruthPolicy {
    TruthPolicy {
        intercept: -1.5,
        fragility: 40.0,
        entropy: 0.0,
        elapsed: 0.0,
        previous_brain: 0.0,
        eval: -1.0,
        link: Link::Logistic,
        noise: 0.05,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sessions: u64 = args.next().map_or(Ok(20), |s| s.parse())?;
    let seeds: u64 = args.next().map_or(Ok(5), |s| s.parse())?;
    let policy = match args.next() {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => policy(),
    };
    let cfg = SimConfig::default();
    let params = TrainParams::default();

    let (mut with, mut without) = (Vec::new(), Vec::new());
    for seed in 1..=seeds {
        let logs = generate_many(&policy, &cfg, "abl", seed, sessions)?;
        let rows = extract_logs(&logs, 3, &cfg.evaluator)?;
        let split = split_dataset(&rows, seed)?;
        let (train_ds, test_ds) = (Dataset::new(split.train), Dataset::new(split.test));
        let full = train(&train_ds, &params, seed)?;
        let f_full = evaluate_metrics(&full, &test_ds, 0.5)?.f1;
        let reduced_train = train_ds.without(is_task_feature);
        let reduced = train(&reduced_train, &params, seed)?;
        let f_reduced = evaluate_metrics(&reduced, &test_ds.select(&reduced.feature_names)?, 0.5)?.f1;
        let rate = rows.iter().filter(|r| r.label_switch).count() as f64 / rows.len() as f64;
        println!("seed {seed}: {} rows, switch rate {rate:.2}, F1 with {f_full:.3}, without {f_reduced:.3}", rows.len());
        with.push(f_full);
        without.push(f_reduced);
    }
    println!("median F1 with task features {:.3}, without {:.3}", median(with), median(without));
    Ok(())
}
