//! Boosted trees under focal loss on a rare, noisy target: the same data fit
//! with plain cross-entropy (gamma 0) and with gamma 2, scored by F1.
//!
//! cargo run --release --example focal_boosting -- [rows] [seed]

use handbrain::learner::{train_matrix, LossParams, TrainData, TrainParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Sample {
    x: Vec<Vec<f64>>,
    y: Vec<bool>,
    elapsed: Vec<f64>,
}

/// Positives are about 13% of rows and depend on two of four columns.
fn sample(rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let mut s = Sample { x: Vec::new(), y: Vec::new(), elapsed: Vec::new() };
    for _ in 0..n {
        let row: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z = 2.5 * row[0] - 2.0 * row[1] * row[1] - 1.4;
        let p = 1.0 / (1.0 + (-3.0 * z).exp());
        s.y.push(rng.random::<f64>() < p);
        s.elapsed.push(rng.random_range(1.0..20.0f64).floor());
        s.x.push(row);
    }
    s
}

fn f1(y: &[bool], p: &[f64]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (&y, &p) in y.iter().zip(p) {
        match (y, p >= 0.5) {
            (true, true) => tp += 1.0,
            (false, true) => fp += 1.0,
            (true, false) => fn_ += 1.0,
            _ => {}
        }
    }
    if tp == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let rows: usize = args.next().map_or(Ok(4000), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(3), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fit, test) = (sample(&mut rng, rows), sample(&mut rng, rows / 2));
    let names: Vec<String> = (0..4).map(|i| format!("x{i}")).collect();
    println!("positives: {:.3}", fit.y.iter().filter(|&&y| y).count() as f64 / rows as f64);

    for gamma in [0.0, 2.0] {
        let params = TrainParams {
            trees: 150,
            loss: LossParams { gamma, alpha: 1.0, beta: 0.0 },
            ..TrainParams::default()
        };
        let data = TrainData { feature_names: &names, x: &fit.x, y: &fit.y, elapsed: &fit.elapsed };
        let (model, trace) = train_matrix(&data, &params, seed)?;
        let p = model.predict_batch(&test.x)?;
        println!(
            "gamma {gamma}: loss {:.4} -> {:.4}, test F1 {:.3}",
            trace[0],
            trace[trace.len() - 1],
            f1(&test.y, &p)
        );
    }
    Ok(())
}
