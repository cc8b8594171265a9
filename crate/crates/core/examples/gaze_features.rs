//! Gaze statistics of a calm scan versus a scattered one over the same
//! three-second window.
//!
//! cargo run --example gaze_features -- [seed]

use handbrain::chess::{Color, Square};
use handbrain::features::{detect_fixations, dwell_ratio, gaze_entropy, vertical_dispersion};
use handbrain::session::BoardRect;
use handbrain::sim::{gaze_bursts, square_center};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(7), |s| s.parse())?;
    let board = BoardRect::default();
    let center = |name: &str| -> Result<(f64, f64), Box<dyn std::error::Error>> {
        Ok(square_center(&board, name.parse::<Square>()?, Color::White))
    };
    let focused = vec![center("e2")?, center("e4")?];
    let wide = ["a1", "h8", "c6", "f3", "b4", "g5", "d8", "e1"]
        .iter()
        .map(|s| center(s))
        .collect::<Result<Vec<_>, _>>()?;

    println!("{:<10} {:>8} {:>10} {:>6} {:>10}", "scan", "entropy", "dispersion", "dwell", "fixations");
    for (name, centers, scatter) in [("focused", focused, 0.1), ("scattered", wide, 0.9)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gaze = gaze_bursts(&mut rng, &board, &centers, scatter, 0, 3000);
        println!(
            "{name:<10} {:>8.3} {:>10.1} {:>6.3} {:>10}",
            gaze_entropy(&gaze, &board).unwrap_or(0.0),
            vertical_dispersion(&gaze).unwrap_or(0.0),
            dwell_ratio(&gaze, &board, 3.0, 3.0)?.unwrap_or(0.0),
            detect_fixations(&gaze).len()
        );
    }
    Ok(())
}
