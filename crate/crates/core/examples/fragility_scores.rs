//! Fragility of a few positions, with the betweenness of every piece.
//!
//! cargo run --example fragility_scores -- [fen...]

use handbrain::chess::{familiarization_positions, Position};
use handbrain::fragility::fragility_report;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut positions: Vec<(String, Position)> = std::env::args()
        .skip(1)
        .map(|fen| fen.parse().map(|p| (fen.clone(), p)))
        .collect::<Result<_, _>>()?;
    if positions.is_empty() {
        positions = familiarization_positions().into_iter().map(|(n, p)| (n.to_string(), p)).collect();
        positions.push(("Hanging queen".into(), "4k3/8/8/8/3q4/8/8/3RK3 w - - 0 1".parse()?));
    }
    for (name, pos) in &positions {
        let r = fragility_report(pos);
        println!("{name}: {:.4}", r.score);
        let mut pieces: Vec<_> = r.pieces.iter().filter(|p| p.betweenness > 0.0 || p.attacked).collect();
        pieces.sort_by(|a, b| b.betweenness.total_cmp(&a.betweenness));
        for p in pieces.iter().take(6) {
            println!("  {} {} {:.4}{}", p.piece, p.square, p.betweenness, if p.attacked { " attacked" } else { "" });
        }
    }
    Ok(())
}
