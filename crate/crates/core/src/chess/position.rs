use super::types::{CastlingRights, Color, Move, Piece, PieceType, Square};
use super::ChessError;

pub(crate) const KNIGHT_STEPS: [(i8, i8); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];
pub(crate) const KING_STEPS: [(i8, i8); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];
pub(crate) const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
pub(crate) const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

/// Full game state. A pure value: repetition history lives with the session.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position {
    pub(crate) board: [Option<Piece>; 64],
    pub(crate) side: Color,
    pub(crate) castling: CastlingRights,
    pub(crate) ep: Option<Square>,
    pub(crate) halfmove: u32,
    pub(crate) fullmove: u32,
}

/// Game-ending state of a position on its own (no repetition knowledge).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Checkmate { winner: Color },
    Stalemate,
    FiftyMoveRule,
}

impl Position {
    pub fn startpos() -> Position {
        START_FEN.parse().expect("start position FEN is valid")
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    pub fn side_to_move(&self) -> Color {
        self.side
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    pub fn en_passant(&self) -> Option<Square> {
        self.ep
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove
    }

    /// Occupied squares in ascending index order.
    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(move |sq| self.board[sq.index()].map(|p| (sq, p)))
    }

    pub fn piece_count(&self) -> usize {
        self.board.iter().filter(|p| p.is_some()).count()
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.pieces()
            .find(|(_, p)| p.color == color && p.kind == PieceType::King)
            .map(|(sq, _)| sq)
    }

    /// Non-king material of `color` in centipawns.
    pub fn material(&self, color: Color) -> i32 {
        self.pieces()
            .filter(|(_, p)| p.color == color)
            .map(|(_, p)| p.kind.value())
            .sum()
    }

    pub fn in_check(&self, color: Color) -> bool {
        self.king_square(color)
            .is_some_and(|k| self.is_attacked(k, color.opposite()))
    }

    /// Whether any piece of `by` attacks `sq` (pseudo-legally, pins ignored).
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        let pawn_dr: i8 = if by == Color::White { -1 } else { 1 };
        for df in [-1, 1] {
            if let Some(s) = sq.try_offset(df, pawn_dr) {
                if self.board[s.index()] == Some(Piece::new(by, PieceType::Pawn)) {
                    return true;
                }
            }
        }
        for (df, dr) in KNIGHT_STEPS {
            if let Some(s) = sq.try_offset(df, dr) {
                if self.board[s.index()] == Some(Piece::new(by, PieceType::Knight)) {
                    return true;
                }
            }
        }
        for (df, dr) in KING_STEPS {
            if let Some(s) = sq.try_offset(df, dr) {
                if self.board[s.index()] == Some(Piece::new(by, PieceType::King)) {
                    return true;
                }
            }
        }
        let slider = |dirs: &[(i8, i8)], kinds: [PieceType; 2]| {
            dirs.iter().any(|&(df, dr)| {
                let mut cur = sq;
                while let Some(next) = cur.try_offset(df, dr) {
                    if let Some(p) = self.board[next.index()] {
                        return p.color == by && kinds.contains(&p.kind);
                    }
                    cur = next;
                }
                false
            })
        };
        slider(&ROOK_DIRS, [PieceType::Rook, PieceType::Queen])
            || slider(&BISHOP_DIRS, [PieceType::Bishop, PieceType::Queen])
    }

    /// Squares the piece on `from` attacks (or guards), up to and including
    /// the first blocker along each ray. Pawns contribute diagonals only.
    pub fn attacked_squares(&self, from: Square) -> Vec<Square> {
        let Some(piece) = self.board[from.index()] else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut steps = |steps: &[(i8, i8)]| {
            out.extend(steps.iter().filter_map(|&(df, dr)| from.try_offset(df, dr)));
        };
        match piece.kind {
            PieceType::Pawn => {
                let dr = if piece.color == Color::White { 1 } else { -1 };
                steps(&[(-1, dr), (1, dr)]);
            }
            PieceType::Knight => steps(&KNIGHT_STEPS),
            PieceType::King => steps(&KING_STEPS),
            PieceType::Bishop => self.rays(from, &BISHOP_DIRS, &mut out),
            PieceType::Rook => self.rays(from, &ROOK_DIRS, &mut out),
            PieceType::Queen => {
                self.rays(from, &BISHOP_DIRS, &mut out);
                self.rays(from, &ROOK_DIRS, &mut out);
            }
        }
        out
    }

    fn rays(&self, from: Square, dirs: &[(i8, i8)], out: &mut Vec<Square>) {
        for &(df, dr) in dirs {
            let mut cur = from;
            while let Some(next) = cur.try_offset(df, dr) {
                out.push(next);
                if self.board[next.index()].is_some() {
                    break;
                }
                cur = next;
            }
        }
    }

    fn make_move(&self, from: Square, to: Square, promotion: Option<PieceType>) -> Move {
        let piece = self.board[from.index()].expect("move origin occupied").kind;
        let captured = match self.board[to.index()] {
            Some(p) => Some(p.kind),
            None if piece == PieceType::Pawn && Some(to) == self.ep && from.file() != to.file() => {
                Some(PieceType::Pawn)
            }
            None => None,
        };
        Move {
            from,
            to,
            promotion,
            piece,
            captured,
        }
    }

    /// Moves obeying piece movement rules, possibly leaving the own king in check.
    fn pseudo_legal(&self, constraint: Option<PieceType>) -> Vec<Move> {
        let us = self.side;
        let mut moves = Vec::with_capacity(48);
        for (from, piece) in self.pieces() {
            if piece.color != us || constraint.is_some_and(|c| c != piece.kind) {
                continue;
            }
            match piece.kind {
                PieceType::Pawn => self.pawn_moves(from, &mut moves),
                PieceType::King => {
                    self.step_moves(from, &KING_STEPS, &mut moves);
                    self.castle_moves(from, &mut moves);
                }
                PieceType::Knight => self.step_moves(from, &KNIGHT_STEPS, &mut moves),
                PieceType::Bishop => self.slide_moves(from, &BISHOP_DIRS, &mut moves),
                PieceType::Rook => self.slide_moves(from, &ROOK_DIRS, &mut moves),
                PieceType::Queen => {
                    self.slide_moves(from, &BISHOP_DIRS, &mut moves);
                    self.slide_moves(from, &ROOK_DIRS, &mut moves);
                }
            }
        }
        moves
    }

    fn step_moves(&self, from: Square, steps: &[(i8, i8)], out: &mut Vec<Move>) {
        for &(df, dr) in steps {
            if let Some(to) = from.try_offset(df, dr) {
                if self.board[to.index()].is_none_or(|p| p.color != self.side) {
                    out.push(self.make_move(from, to, None));
                }
            }
        }
    }

    fn slide_moves(&self, from: Square, dirs: &[(i8, i8)], out: &mut Vec<Move>) {
        for &(df, dr) in dirs {
            let mut cur = from;
            while let Some(to) = cur.try_offset(df, dr) {
                match self.board[to.index()] {
                    None => out.push(self.make_move(from, to, None)),
                    Some(p) => {
                        if p.color != self.side {
                            out.push(self.make_move(from, to, None));
                        }
                        break;
                    }
                }
                cur = to;
            }
        }
    }

    fn pawn_moves(&self, from: Square, out: &mut Vec<Move>) {
        let (dr, start_rank, last_rank) = match self.side {
            Color::White => (1, 1, 7),
            Color::Black => (-1, 6, 0),
        };
        let push = |to: Square, out: &mut Vec<Move>| {
            if to.rank() == last_rank {
                for promo in PieceType::PROMOTIONS {
                    out.push(self.make_move(from, to, Some(promo)));
                }
            } else {
                out.push(self.make_move(from, to, None));
            }
        };
        if let Some(one) = from.try_offset(0, dr) {
            if self.board[one.index()].is_none() {
                push(one, out);
                if from.rank() == start_rank {
                    let two = one.try_offset(0, dr).expect("double push stays on board");
                    if self.board[two.index()].is_none() {
                        out.push(self.make_move(from, two, None));
                    }
                }
            }
        }
        for df in [-1, 1] {
            if let Some(to) = from.try_offset(df, dr) {
                let enemy = self.board[to.index()].is_some_and(|p| p.color != self.side);
                if enemy || Some(to) == self.ep {
                    push(to, out);
                }
            }
        }
    }

    fn castle_moves(&self, from: Square, out: &mut Vec<Move>) {
        let us = self.side;
        let home = Square::new(4, if us == Color::White { 0 } else { 7 });
        if from != home || self.is_attacked(home, us.opposite()) {
            return;
        }
        let rank = home.rank();
        let empty = |files: &[u8]| files.iter().all(|&f| self.board[Square::new(f, rank).index()].is_none());
        let safe = |files: &[u8]| files.iter().all(|&f| !self.is_attacked(Square::new(f, rank), us.opposite()));
        let rook = Some(Piece::new(us, PieceType::Rook));
        if self.castling.kingside(us)
            && self.board[Square::new(7, rank).index()] == rook
            && empty(&[5, 6])
            && safe(&[5, 6])
        {
            out.push(self.make_move(home, Square::new(6, rank), None));
        }
        if self.castling.queenside(us)
            && self.board[Square::new(0, rank).index()] == rook
            && empty(&[1, 2, 3])
            && safe(&[2, 3])
        {
            out.push(self.make_move(home, Square::new(2, rank), None));
        }
    }

    /// Applies a move without checking legality.
    pub(crate) fn play_unchecked(&self, mv: &Move) -> Position {
        let mut next = self.clone();
        let us = self.side;
        let moving = Piece::new(us, mv.piece);
        next.board[mv.from.index()] = None;
        if mv.piece == PieceType::Pawn && Some(mv.to) == self.ep && mv.from.file() != mv.to.file() {
            let victim = Square::new(mv.to.file(), mv.from.rank());
            next.board[victim.index()] = None;
        }
        next.board[mv.to.index()] = Some(match mv.promotion {
            Some(kind) => Piece::new(us, kind),
            None => moving,
        });
        if mv.is_castle() {
            let rank = mv.from.rank();
            let (rook_from, rook_to) = if mv.to.file() == 6 { (7, 5) } else { (0, 3) };
            next.board[Square::new(rook_from, rank).index()] = None;
            next.board[Square::new(rook_to, rank).index()] = Some(Piece::new(us, PieceType::Rook));
        }
        next.castling.touch(mv.from);
        next.castling.touch(mv.to);
        next.ep = if mv.piece == PieceType::Pawn && mv.from.rank().abs_diff(mv.to.rank()) == 2 {
            Some(Square::new(mv.from.file(), (mv.from.rank() + mv.to.rank()) / 2))
        } else {
            None
        };
        next.halfmove = if mv.piece == PieceType::Pawn || mv.captured.is_some() {
            0
        } else {
            self.halfmove + 1
        };
        if us == Color::Black {
            next.fullmove += 1;
        }
        next.side = us.opposite();
        next
    }

    /// All legal moves, optionally restricted to one moving piece type.
    pub fn legal_moves_of_type(&self, constraint: Option<PieceType>) -> Vec<Move> {
        let us = self.side;
        self.pseudo_legal(constraint)
            .into_iter()
            .filter(|mv| !self.play_unchecked(mv).in_check(us))
            .collect()
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        self.legal_moves_of_type(None)
    }

    /// Piece types with at least one legal move, in `PieceType::ALL` order.
    pub fn movable_piece_types(&self) -> Vec<PieceType> {
        let moves = self.legal_moves();
        PieceType::ALL
            .into_iter()
            .filter(|t| moves.iter().any(|m| m.piece == *t))
            .collect()
    }

    /// Plays `mv` if it is legal here; derived fields of `mv` are recomputed.
    pub fn apply_move(&self, mv: &Move) -> Result<Position, ChessError> {
        let legal = self
            .legal_moves()
            .into_iter()
            .find(|m| m.same_squares(mv))
            .ok_or_else(|| ChessError::IllegalMove(mv.uci()))?;
        Ok(self.play_unchecked(&legal))
    }

    /// Resolves a UCI move string (`e2e4`, `e7e8q`) against the legal moves.
    /// A pawn reaching the last rank without a suffix promotes to a queen.
    pub fn parse_uci_move(&self, text: &str) -> Result<Move, ChessError> {
        let bad = || ChessError::BadMoveText(text.to_string());
        if !(4..=5).contains(&text.len()) || !text.is_ascii() {
            return Err(bad());
        }
        let from: Square = text[0..2].parse().map_err(|_| bad())?;
        let to: Square = text[2..4].parse().map_err(|_| bad())?;
        let promotion = match text[4..].chars().next() {
            None => None,
            Some(c) => Some(PieceType::from_letter(c).ok_or_else(bad)?),
        };
        let legal = self.legal_moves();
        let candidates: Vec<&Move> = legal
            .iter()
            .filter(|m| m.from == from && m.to == to)
            .collect();
        let pick = match promotion {
            Some(p) => candidates.into_iter().find(|m| m.promotion == Some(p)),
            None => candidates
                .iter()
                .find(|m| m.promotion.is_none())
                .or_else(|| candidates.iter().find(|m| m.promotion == Some(PieceType::Queen)))
                .copied(),
        };
        pick.copied().ok_or_else(|| ChessError::IllegalMove(text.to_string()))
    }

    pub fn outcome(&self) -> Option<Outcome> {
        if self.legal_moves().is_empty() {
            return Some(if self.in_check(self.side) {
                Outcome::Checkmate {
                    winner: self.side.opposite(),
                }
            } else {
                Outcome::Stalemate
            });
        }
        if self.halfmove >= 100 {
            return Some(Outcome::FiftyMoveRule);
        }
        None
    }

    /// Key for repetition detection: placement, side, castling, en passant.
    pub fn repetition_key(&self) -> String {
        let fen = self.to_fen();
        fen.split(' ').take(4).collect::<Vec<_>>().join(" ")
    }

    /// Ranks reflected and colors swapped; the side to move swaps too.
    pub fn mirrored(&self) -> Position {
        let mut board = [None; 64];
        for (sq, p) in self.pieces() {
            board[sq.flip_rank().index()] = Some(Piece::new(p.color.opposite(), p.kind));
        }
        Position {
            board,
            side: self.side.opposite(),
            castling: self.castling.swapped(),
            ep: self.ep.map(Square::flip_rank),
            halfmove: self.halfmove,
            fullmove: self.fullmove,
        }
    }

    /// Whether one side is down to a bare king while the other keeps at least
    /// a queen's worth of material.
    pub fn has_decisive_material_imbalance(&self) -> bool {
        let queen = PieceType::Queen.value();
        [Color::White, Color::Black].into_iter().any(|c| {
            self.material(c) == 0
                && self.pieces().filter(|(_, p)| p.color == c).count() == 1
                && self.material(c.opposite()) >= queen
        })
    }
}

impl Default for Position {
    fn default() -> Self {
        Position::startpos()
    }
}

/// Leaf count of the legal move tree to `depth` plies.
pub fn perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = pos.legal_moves();
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|m| perft(&pos.play_unchecked(m), depth - 1))
        .sum()
}
