//! Move-generator check: perft counts for a position, split by first move.
//!
//! cargo run --release --example perft_and_fen -- [depth] [fen]

use handbrain::chess::{perft, Position};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let depth: u32 = args.next().map_or(Ok(4), |s| s.parse())?;
    let pos: Position = match args.next() {
        Some(fen) => fen.parse()?,
        None => Position::startpos(),
    };
    println!("{}", pos.to_fen());
    let mut total = 0;
    for mv in pos.legal_moves() {
        let n = perft(&pos.apply_move(&mv)?, depth.saturating_sub(1));
        println!("{:<6} {:<7} {n}", mv.uci(), pos.san(&mv));
        total += n;
    }
    println!("perft({depth}) = {total}");
    Ok(())
}
