//! Chess rules kernel: FEN, legal move generation (optionally restricted to a
//! piece type), move application, SAN/PGN and perft.
//!
//! The board is a plain 64-entry mailbox. Legality is checked by playing each
//! pseudo-legal move and testing the mover's king, which keeps the generator
//! short; correctness is pinned by perft against published node counts.

mod fen;
mod position;
mod san;
mod types;

use thiserror::Error;

pub use fen::parse_fen;
pub use position::{perft, Outcome, Position, START_FEN};
pub use san::{parse_pgn, PgnGame};
pub use types::{CastlingRights, Color, Move, Piece, PieceType, Square};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChessError {
    #[error("invalid FEN ({field}): {reason}")]
    Fen { field: &'static str, reason: String },
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("malformed move text: {0}")]
    BadMoveText(String),
    #[error("malformed square: {0}")]
    BadSquare(String),
    #[error("unknown piece type: {0}")]
    UnknownPieceType(String),
    #[error("PGN: {0}")]
    Pgn(String),
}

/// Free-function form of [`Position::legal_moves_of_type`].
pub fn legal_moves_of_type(pos: &Position, constraint: Option<PieceType>) -> Vec<Move> {
    pos.legal_moves_of_type(constraint)
}

/// Free-function form of [`Position::apply_move`].
pub fn apply_move(pos: &Position, mv: &Move) -> Result<Position, ChessError> {
    pos.apply_move(mv)
}

/// Opening lines used for the familiarization games.
///
/// These are substitutes: quiet, symmetrical or well-trodden openings whose
/// evaluation sits near zero. The original study positions were never published.
pub const FAMILIARIZATION_LINES: [(&str, &[&str]); 4] = [
    ("Italian Game", &["e2e4", "e7e5", "g1f3", "b8c6", "f1c4", "f8c5"]),
    ("Queen's Gambit Declined", &["d2d4", "d7d5", "c2c4", "e7e6", "b1c3", "g8f6"]),
    ("Caro-Kann, main line", &["e2e4", "c7c6", "d2d4", "d7d5", "b1c3", "d5e4", "c3e4"]),
    ("Symmetrical English", &["c2c4", "c7c5", "g1f3", "g8f6", "b1c3", "b8c6"]),
];

/// The four substitute familiarization positions, with their names.
pub fn familiarization_positions() -> Vec<(&'static str, Position)> {
    FAMILIARIZATION_LINES
        .iter()
        .map(|(name, line)| {
            let pos = line.iter().fold(Position::startpos(), |p, m| {
                let mv = p.parse_uci_move(m).expect("familiarization line is legal");
                p.apply_move(&mv).expect("familiarization line is legal")
            });
            (*name, pos)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uci_set(moves: &[Move]) -> Vec<String> {
        let mut v: Vec<String> = moves.iter().map(Move::uci).collect();
        v.sort();
        v
    }

    #[test]
    fn startpos_constrained_generation() {
        let pos = Position::startpos();
        assert_eq!(
            uci_set(&pos.legal_moves_of_type(Some(PieceType::Knight))),
            ["b1a3", "b1c3", "g1f3", "g1h3"]
        );
        assert!(pos.legal_moves_of_type(Some(PieceType::Bishop)).is_empty());
        assert_eq!(pos.legal_moves().len(), 20);
    }

    #[test]
    fn perft_startpos() {
        let pos = Position::startpos();
        assert_eq!(perft(&pos, 0), 1);
        assert_eq!(perft(&pos, 1), 20);
        assert_eq!(perft(&pos, 2), 400);
        assert_eq!(perft(&pos, 3), 8902);
    }

    // Published node counts for the standard perft suite positions.
    #[test]
    fn perft_tricky_positions() {
        let cases: [(&str, &[u64]); 4] = [
            (
                "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
                &[48, 2039, 97862],
            ),
            ("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", &[14, 191, 2812, 43238]),
            (
                "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
                &[6, 264, 9467],
            ),
            (
                "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
                &[44, 1486, 62379],
            ),
        ];
        for (fen, counts) in cases {
            let pos: Position = fen.parse().unwrap();
            for (d, &n) in counts.iter().enumerate() {
                assert_eq!(perft(&pos, d as u32 + 1), n, "{fen} depth {}", d + 1);
            }
        }
    }

    #[test]
    fn e2e4_sets_en_passant() {
        let pos = Position::startpos();
        let next = pos.apply_move(&pos.parse_uci_move("e2e4").unwrap()).unwrap();
        assert_eq!(
            next.to_fen(),
            "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1"
        );
    }

    #[test]
    fn illegal_move_rejected() {
        let pos = Position::startpos();
        let bogus = Move {
            from: "e2".parse().unwrap(),
            to: "e5".parse().unwrap(),
            promotion: None,
            piece: PieceType::Pawn,
            captured: None,
        };
        assert_eq!(pos.apply_move(&bogus), Err(ChessError::IllegalMove("e2e5".into())));
        assert!(pos.parse_uci_move("e2e5").is_err());
    }

    #[test]
    fn capture_removes_one_piece() {
        let pos: Position = "rnbqkbnr/ppp1pppp/8/3p4/4P3/8/PPPP1PPP/RNBQKBNR w KQkq d6 0 2"
            .parse()
            .unwrap();
        let mv = pos.parse_uci_move("e4d5").unwrap();
        assert_eq!(mv.captured, Some(PieceType::Pawn));
        assert_eq!(pos.apply_move(&mv).unwrap().piece_count(), pos.piece_count() - 1);
    }

    #[test]
    fn en_passant_capture_removes_pawn() {
        let pos: Position = "4k3/8/8/3pP3/8/8/8/4K3 w - d6 0 2".parse().unwrap();
        let mv = pos.parse_uci_move("e5d6").unwrap();
        assert_eq!(mv.captured, Some(PieceType::Pawn));
        let next = pos.apply_move(&mv).unwrap();
        assert_eq!(next.to_fen(), "4k3/8/3P4/8/8/8/8/4K3 b - - 0 2");
    }

    #[test]
    fn promotion_defaults_to_queen_but_all_four_generated() {
        let pos: Position = "8/4P3/8/8/8/8/k7/4K3 w - - 0 1".parse().unwrap();
        let promos: Vec<_> = pos
            .legal_moves_of_type(Some(PieceType::Pawn))
            .into_iter()
            .map(|m| m.promotion)
            .collect();
        assert_eq!(promos.len(), 4);
        assert_eq!(pos.parse_uci_move("e7e8").unwrap().promotion, Some(PieceType::Queen));
        assert_eq!(pos.parse_uci_move("e7e8n").unwrap().promotion, Some(PieceType::Knight));
    }

    #[test]
    fn castling_through_check_is_illegal() {
        let pos: Position = "4kr2/8/8/8/8/8/8/R3K2R w KQ - 0 1".parse().unwrap();
        let kings = uci_set(&pos.legal_moves_of_type(Some(PieceType::King)));
        assert!(!kings.contains(&"e1g1".to_string()));
        assert!(kings.contains(&"e1c1".to_string()));
    }

    #[test]
    fn outcomes() {
        let mate: Position = "rnb1kbnr/pppp1ppp/8/4p3/6Pq/5P2/PPPPP2P/RNBQKBNR w KQkq - 1 3"
            .parse()
            .unwrap();
        assert_eq!(mate.outcome(), Some(Outcome::Checkmate { winner: Color::Black }));
        let stale: Position = "7k/5Q2/6K1/8/8/8/8/8 b - - 0 1".parse().unwrap();
        assert_eq!(stale.outcome(), Some(Outcome::Stalemate));
        assert_eq!(Position::startpos().outcome(), None);
    }

    #[test]
    fn mirror_is_involution_and_preserves_perft() {
        let pos: Position = "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1"
            .parse()
            .unwrap();
        assert_eq!(pos.mirrored().mirrored(), pos);
        assert_eq!(perft(&pos.mirrored(), 2), 2039);
    }

    #[test]
    fn familiarization_positions_are_legal_middlegame_starts() {
        let ps = familiarization_positions();
        assert_eq!(ps.len(), 4);
        for (_, p) in ps {
            assert!(p.outcome().is_none());
            assert!(p.piece_count() >= 30);
        }
    }
}
