mod common;

use std::collections::HashSet;

use handbrain::chess::{perft, Color, PieceType, Position, Square};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn playout(seed: u64, plies: usize) -> Position {
    common::random_position(&mut ChaCha8Rng::seed_from_u64(seed), plies)
}

fn check_invariants(pos: &Position) -> Result<(), TestCaseError> {
    for color in [Color::White, Color::Black] {
        let kings = pos
            .pieces()
            .filter(|(_, p)| p.color == color && p.kind == PieceType::King)
            .count();
        prop_assert_eq!(kings, 1, "{} kings for {}", kings, color);
    }
    for (sq, p) in pos.pieces() {
        prop_assert!(p.kind != PieceType::Pawn || (1..7).contains(&sq.rank()), "pawn on {}", sq);
    }
    prop_assert!(!pos.in_check(pos.side_to_move().opposite()), "side not to move is in check: {}", pos.to_fen());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn playouts_keep_position_invariants(seed in any::<u64>(), plies in 0usize..160) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pos = Position::startpos();
        for _ in 0..plies {
            check_invariants(&pos)?;
            let moves = pos.legal_moves();
            let Some(mv) = rand::seq::IndexedRandom::choose(&moves[..], &mut rng).copied() else { break };
            let next = pos.apply_move(&mv).unwrap();
            prop_assert!(!next.in_check(pos.side_to_move()), "{} leaves the mover in check", mv);
            if mv.is_capture() {
                let them = pos.side_to_move().opposite();
                let count = |p: &Position| p.pieces().filter(|(_, q)| q.color == them).count();
                prop_assert_eq!(count(&next), count(&pos) - 1);
            }
            pos = next;
        }
        check_invariants(&pos)?;
    }

    #[test]
    fn fen_round_trip(seed in any::<u64>(), plies in 0usize..120) {
        let pos = playout(seed, plies);
        let fen = pos.to_fen();
        let back: Position = fen.parse().unwrap();
        prop_assert_eq!(back.to_fen(), fen);
        prop_assert_eq!(back, pos);
    }

    #[test]
    fn constrained_lists_partition_the_legal_moves(seed in any::<u64>(), plies in 0usize..120) {
        let pos = playout(seed, plies);
        let all = pos.legal_moves();
        let mut union = Vec::new();
        for t in PieceType::ALL {
            let of_type = pos.legal_moves_of_type(Some(t));
            let filtered: Vec<_> = all.iter().filter(|m| m.piece == t).copied().collect();
            prop_assert_eq!(&of_type, &filtered);
            prop_assert_eq!(pos.movable_piece_types().contains(&t), !of_type.is_empty());
            union.extend(of_type);
        }
        prop_assert_eq!(union.len(), all.len());
        let unique: HashSet<_> = union.iter().collect();
        prop_assert_eq!(unique.len(), all.len());
        prop_assert_eq!(pos.legal_moves_of_type(None), all);
    }

    #[test]
    fn mirror_preserves_move_counts(seed in any::<u64>(), plies in 0usize..80) {
        let pos = playout(seed, plies);
        let m = pos.mirrored();
        prop_assert_eq!(m.mirrored(), pos.clone());
        prop_assert_eq!(perft(&m, 2), perft(&pos, 2));
    }

    #[test]
    fn uci_text_parses_back(seed in any::<u64>(), plies in 0usize..120) {
        let pos = playout(seed, plies);
        for mv in pos.legal_moves() {
            prop_assert_eq!(pos.parse_uci_move(&mv.uci()).unwrap(), mv);
        }
    }
}

#[test]
fn fen_round_trip_on_ten_thousand_playouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    for i in 0..10_000 {
        let plies = (i % 150) as usize;
        let pos = common::random_position(&mut rng, plies);
        let fen = pos.to_fen();
        assert_eq!(fen.parse::<Position>().unwrap().to_fen(), fen);
    }
}

#[test]
fn depth_zero_is_one() {
    for seed in 0..20 {
        assert_eq!(perft(&playout(seed, 30), 0), 1);
    }
}

#[test]
fn knight_moves_at_start() {
    let got: HashSet<String> = Position::startpos()
        .legal_moves_of_type(Some(PieceType::Knight))
        .iter()
        .map(|m| m.uci())
        .collect();
    let want: HashSet<String> = ["b1a3", "b1c3", "g1f3", "g1h3"].iter().map(|s| s.to_string()).collect();
    assert_eq!(got, want);
    assert!(Position::startpos().legal_moves_of_type(Some(PieceType::Bishop)).is_empty());
    assert_eq!(Square::new(4, 3).to_string(), "e4");
}
