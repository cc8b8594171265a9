//! Deterministic builtin engine: material + mobility evaluation, fixed-depth
//! alpha-beta with a short capture search, and a sampling teammate policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{constrained_moves, Engine, EngineConfig, EngineError, EngineRole, Evaluation, Score, SearchLimit, MATE_SCORE};
use crate::chess::{Color, Move, PieceType, Position, Square};

const MOBILITY_CP: i32 = 4;
const QUIESCENCE_PLIES: u32 = 4;
const DEPTH_FOR_MOVETIME: u32 = 2;
const MAX_DEPTH: u32 = 6;

/// Softmax temperature of the fallback policy, applied to scores in pawns.
const FALLBACK_TEMPERATURE: f64 = 1.0;
const FALLBACK_TOP_K: usize = 3;

/// Material plus mobility from White's point of view, in centipawns.
pub fn static_eval(pos: &Position) -> i32 {
    let mut score = 0;
    for (sq, piece) in pos.pieces() {
        let sign = piece.color.sign();
        score += sign * piece.kind.value();
        if matches!(
            piece.kind,
            PieceType::Knight | PieceType::Bishop | PieceType::Rook | PieceType::Queen
        ) {
            score += sign * MOBILITY_CP * mobility(pos, sq, piece.color);
        }
    }
    score
}

fn mobility(pos: &Position, sq: Square, color: Color) -> i32 {
    pos.attacked_squares(sq)
        .into_iter()
        .filter(|t| pos.piece_at(*t).is_none_or(|p| p.color != color))
        .count() as i32
}

fn side_eval(pos: &Position) -> i32 {
    static_eval(pos) * pos.side_to_move().sign()
}

fn order_moves(moves: &mut [Move]) {
    moves.sort_by_key(|m| {
        let gain = m.captured.map_or(0, |c| 10 * c.value() - m.piece.value() / 10)
            + m.promotion.map_or(0, |p| p.value());
        -gain
    });
}

fn quiescence(pos: &Position, mut alpha: i32, beta: i32, ply: i32, left: u32) -> i32 {
    let moves = pos.legal_moves();
    if moves.is_empty() {
        return if pos.in_check(pos.side_to_move()) {
            -(MATE_SCORE - ply)
        } else {
            0
        };
    }
    let stand_pat = side_eval(pos);
    if left == 0 || stand_pat >= beta {
        return stand_pat;
    }
    let mut best = stand_pat;
    alpha = alpha.max(stand_pat);
    let mut captures: Vec<Move> = moves
        .into_iter()
        .filter(|m| m.captured.is_some() || m.promotion == Some(PieceType::Queen))
        .collect();
    order_moves(&mut captures);
    for mv in &captures {
        let v = -quiescence(&pos.play_unchecked(mv), -beta, -alpha, ply + 1, left - 1);
        if v > best {
            best = v;
            if v > alpha {
                alpha = v;
            }
            if v >= beta {
                break;
            }
        }
    }
    best
}

fn negamax(pos: &Position, depth: u32, mut alpha: i32, beta: i32, ply: i32) -> i32 {
    if depth == 0 {
        return quiescence(pos, alpha, beta, ply, QUIESCENCE_PLIES);
    }
    let mut moves = pos.legal_moves();
    if moves.is_empty() {
        return if pos.in_check(pos.side_to_move()) {
            -(MATE_SCORE - ply)
        } else {
            0
        };
    }
    order_moves(&mut moves);
    let mut best = -MATE_SCORE - 1;
    for mv in &moves {
        let v = -negamax(&pos.play_unchecked(mv), depth - 1, -beta, -alpha, ply + 1);
        if v > best {
            best = v;
            if v > alpha {
                alpha = v;
            }
            if v >= beta {
                break;
            }
        }
    }
    best
}

/// Exact minimax value of each root move (mover's point of view).
fn score_root_moves(pos: &Position, moves: &[Move], depth: u32) -> Vec<i32> {
    let full = MATE_SCORE + 1;
    moves
        .iter()
        .map(|mv| -negamax(&pos.play_unchecked(mv), depth.saturating_sub(1), -full, full, 1))
        .collect()
}

fn search_best(pos: &Position, mut moves: Vec<Move>, depth: u32) -> (Move, i32) {
    order_moves(&mut moves);
    let inf = MATE_SCORE + 1;
    let mut best = moves[0];
    let mut best_value = -inf;
    for mv in &moves {
        let v = -negamax(&pos.play_unchecked(mv), depth.saturating_sub(1), -inf, -best_value, 1);
        if v > best_value {
            best_value = v;
            best = *mv;
        }
    }
    (best, best_value)
}

fn fen_hash(pos: &Position) -> u64 {
    // FNV-1a, stable across runs and platforms
    pos.to_fen().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Imperfect, reproducible teammate move: a two-ply material+mobility search,
/// then softmax sampling (temperature 1 over pawn units) among the top three.
pub fn fallback_move(
    pos: &Position,
    constraint: Option<PieceType>,
    seed: u64,
) -> Result<Move, EngineError> {
    sample_move(pos, constraint, 2, seed)
}

/// The fallback policy at any search depth.
pub fn sample_move(
    pos: &Position,
    constraint: Option<PieceType>,
    depth: u32,
    seed: u64,
) -> Result<Move, EngineError> {
    let mut moves = constrained_moves(pos, constraint)?;
    order_moves(&mut moves);
    let scores = score_root_moves(pos, &moves, depth.clamp(1, MAX_DEPTH));
    let mut ranked: Vec<(Move, i32)> = moves.into_iter().zip(scores).collect();
    ranked.sort_by_key(|(_, s)| -*s);
    ranked.truncate(FALLBACK_TOP_K);

    let top = ranked[0].1 as f64;
    let weights: Vec<f64> = ranked
        .iter()
        .map(|(_, s)| ((*s as f64 - top) / 100.0 / FALLBACK_TEMPERATURE).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fen_hash(pos));
    let mut draw = rng.random::<f64>() * total;
    for ((mv, _), w) in ranked.iter().zip(&weights) {
        if draw < *w {
            return Ok(*mv);
        }
        draw -= w;
    }
    Ok(ranked.last().unwrap().0)
}

pub struct BuiltinEngine {
    cfg: EngineConfig,
}

impl BuiltinEngine {
    pub fn new(cfg: EngineConfig) -> Self {
        BuiltinEngine { cfg }
    }

    /// Search depth in plies. Move-time limits map to a fixed depth so the
    /// builtin stays a pure function of its inputs.
    pub fn depth(&self) -> u32 {
        match self.cfg.limit {
            SearchLimit::Depth(d) => d.clamp(1, MAX_DEPTH),
            SearchLimit::MovetimeMs(_) => DEPTH_FOR_MOVETIME,
        }
    }

    pub(crate) fn search(&self, pos: &Position, constraint: Option<PieceType>) -> Result<(Move, i32), EngineError> {
        let moves = constrained_moves(pos, constraint)?;
        Ok(search_best(pos, moves, self.depth()))
    }

    /// Best of `moves` (non-empty) with its value for the side to move.
    pub(crate) fn search_restricted(&self, pos: &Position, moves: Vec<Move>) -> (Move, i32) {
        search_best(pos, moves, self.depth())
    }
}

impl Engine for BuiltinEngine {
    fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    fn evaluate(&mut self, pos: &Position) -> Result<Evaluation, EngineError> {
        let depth = self.depth();
        let inf = MATE_SCORE + 1;
        let value = negamax(pos, depth, -inf, inf, 0);
        Ok(Evaluation {
            score: Score::from_side_value(value, pos.side_to_move()),
            depth,
        })
    }

    fn constrained_best_move(
        &mut self,
        pos: &Position,
        constraint: Option<PieceType>,
    ) -> Result<Move, EngineError> {
        Ok(self.search(pos, constraint)?.0)
    }

    fn play_move(
        &mut self,
        pos: &Position,
        constraint: Option<PieceType>,
        ply: u64,
    ) -> Result<Move, EngineError> {
        if self.cfg.role == EngineRole::Teammate {
            let seed = self.cfg.seed ^ ply.wrapping_mul(0x9e37_79b9_7f4a_7c15);
            fallback_move(pos, constraint, seed)
        } else {
            self.constrained_best_move(pos, constraint)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineRole;

    fn evaluator(depth: u32) -> BuiltinEngine {
        BuiltinEngine::new(EngineConfig::builtin(EngineRole::Evaluator, depth))
    }

    #[test]
    fn queen_up_is_winning() {
        let pos: Position = "4k3/8/8/8/8/8/8/3QK3 w - - 0 1".parse().unwrap();
        assert!(evaluator(2).evaluate(&pos).unwrap().cp() >= 1000);
    }

    #[test]
    fn mirrored_position_negates_score() {
        for fen in [
            "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
            "rnbqkbnr/pppp1ppp/8/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R b KQkq - 1 2",
            "4k3/8/8/8/8/8/8/3QK3 w - - 0 1",
        ] {
            let pos: Position = fen.parse().unwrap();
            let mut e = evaluator(2);
            let a = e.evaluate(&pos).unwrap();
            let b = e.evaluate(&pos.mirrored()).unwrap();
            assert_eq!(a.score.negated(), b.score, "{fen}");
        }
    }

    // Frozen from a single builtin run: depth-2 search of the start position.
    #[test]
    fn startpos_depth2_regression() {
        let e = evaluator(2).evaluate(&Position::startpos()).unwrap();
        assert!(e.cp().abs() < 100);
        assert_eq!(e.cp(), STARTPOS_DEPTH2_CP);
    }
    const STARTPOS_DEPTH2_CP: i32 = 0;

    #[test]
    fn finds_mate_in_one() {
        let pos: Position = "6k1/5ppp/8/8/8/8/8/R5K1 w - - 0 1".parse().unwrap();
        let mut e = BuiltinEngine::new(EngineConfig::builtin(EngineRole::Opponent, 2));
        let mv = e.constrained_best_move(&pos, None).unwrap();
        assert_eq!(mv.uci(), "a1a8");
        let eval = evaluator(2).evaluate(&pos).unwrap();
        assert_eq!(eval.score, Score::Mate { winner: Color::White, plies: 1 });
    }

    #[test]
    fn fallback_is_deterministic_and_constrained() {
        let pos = Position::startpos();
        let a = fallback_move(&pos, Some(PieceType::Knight), 5).unwrap();
        let b = fallback_move(&pos, Some(PieceType::Knight), 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.piece, PieceType::Knight);
        assert!(matches!(
            fallback_move(&pos, Some(PieceType::Bishop), 5),
            Err(EngineError::NoMoveOfType(PieceType::Bishop))
        ));
    }
}
