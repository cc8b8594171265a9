//! What the AI teammate does in each mode: in hand mode it names a piece
//! type, in brain mode it finds the best move with the piece it was given.
//! Pass a UCI engine path to use it instead of the built-in search.
//!
//! cargo run --release --example teammate_engine -- [fen] [uci-engine]

use handbrain::chess::{PieceType, Position};
use handbrain::engine::{connect, EngineConfig, EngineRole, SearchLimit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let pos: Position = match args.next() {
        Some(fen) => fen.parse()?,
        None => "r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3".parse()?,
    };
    let cfg = match args.next() {
        Some(path) => EngineConfig::uci(EngineRole::Teammate, path, SearchLimit::Depth(8)),
        None => EngineConfig::builtin(EngineRole::Teammate, 3),
    };
    let mut engine = connect(&cfg)?;

    println!("{}", pos.to_fen());
    println!("hand mode: teammate names {}", engine.pick_piece_type(&pos)?);
    for piece in PieceType::ALL {
        match engine.constrained_best_move(&pos, Some(piece)) {
            Ok(mv) => println!("brain mode, {:<6} -> {}", piece.name(), pos.san(&mv)),
            Err(e) => println!("brain mode, {:<6} -> {e}", piece.name()),
        }
    }
    Ok(())
}
