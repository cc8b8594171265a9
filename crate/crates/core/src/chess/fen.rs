//! FEN parsing and canonical emission.

use std::fmt;
use std::str::FromStr;

use super::position::Position;
use super::types::{CastlingRights, Color, Piece, PieceType, Square};
use super::ChessError;

fn err(field: &'static str, reason: impl Into<String>) -> ChessError {
    ChessError::Fen {
        field,
        reason: reason.into(),
    }
}

pub fn parse_fen(text: &str) -> Result<Position, ChessError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(err(
            "fields",
            format!("expected 8 ranks / 6 fields, found {} fields", fields.len()),
        ));
    }

    let ranks: Vec<&str> = fields[0].split('/').collect();
    if ranks.len() != 8 {
        return Err(err(
            "placement",
            format!("expected 8 ranks / 6 fields, found {} ranks", ranks.len()),
        ));
    }
    let mut board = [None; 64];
    for (i, rank_text) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in rank_text.chars() {
            if let Some(d) = c.to_digit(10) {
                if !(1..=8).contains(&d) {
                    return Err(err("placement", format!("bad empty-run digit '{c}'")));
                }
                file += d as u8;
            } else {
                let piece = Piece::from_fen_char(c)
                    .ok_or_else(|| err("placement", format!("unknown piece letter '{c}'")))?;
                if file >= 8 {
                    return Err(err("placement", format!("rank {} overflows", rank + 1)));
                }
                board[Square::new(file, rank).index()] = Some(piece);
                file += 1;
            }
            if file > 8 {
                return Err(err("placement", format!("rank {} overflows", rank + 1)));
            }
        }
        if file != 8 {
            return Err(err("placement", format!("rank {} has {file} squares", rank + 1)));
        }
    }

    let side = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(err("side", format!("expected 'w' or 'b', found '{other}'"))),
    };

    let mut castling = CastlingRights::default();
    if fields[2] != "-" {
        for c in fields[2].chars() {
            let flag = match c {
                'K' => &mut castling.white_king,
                'Q' => &mut castling.white_queen,
                'k' => &mut castling.black_king,
                'q' => &mut castling.black_queen,
                _ => return Err(err("castling", format!("unknown castling flag '{c}'"))),
            };
            if *flag {
                return Err(err("castling", format!("duplicate castling flag '{c}'")));
            }
            *flag = true;
        }
    }

    let ep = match fields[3] {
        "-" => None,
        s => Some(
            s.parse::<Square>()
                .map_err(|_| err("en_passant", format!("bad square '{s}'")))?,
        ),
    };

    let halfmove: u32 = fields[4]
        .parse()
        .map_err(|_| err("halfmove", format!("not a non-negative integer: '{}'", fields[4])))?;
    let fullmove: u32 = fields[5]
        .parse()
        .map_err(|_| err("fullmove", format!("not a positive integer: '{}'", fields[5])))?;
    if fullmove == 0 {
        return Err(err("fullmove", "must be at least 1"));
    }

    let pos = Position {
        board,
        side,
        castling,
        ep,
        halfmove,
        fullmove,
    };
    validate(&pos)?;
    Ok(pos)
}

fn validate(pos: &Position) -> Result<(), ChessError> {
    for color in [Color::White, Color::Black] {
        let kings = pos
            .pieces()
            .filter(|(_, p)| *p == Piece::new(color, PieceType::King))
            .count();
        if kings != 1 {
            return Err(err("placement", format!("{color} has {kings} kings, expected 1")));
        }
    }
    if let Some((sq, _)) = pos
        .pieces()
        .find(|(sq, p)| p.kind == PieceType::Pawn && (sq.rank() == 0 || sq.rank() == 7))
    {
        return Err(err("placement", format!("pawn on back rank at {sq}")));
    }
    if pos.in_check(pos.side.opposite()) {
        return Err(err("placement", "side not to move is in check"));
    }

    let c = pos.castling;
    let needs = |flag: bool, king: Square, rook: Square, color: Color| {
        !flag
            || (pos.piece_at(king) == Some(Piece::new(color, PieceType::King))
                && pos.piece_at(rook) == Some(Piece::new(color, PieceType::Rook)))
    };
    let e1 = Square::new(4, 0);
    let e8 = Square::new(4, 7);
    if !(needs(c.white_king, e1, Square::new(7, 0), Color::White)
        && needs(c.white_queen, e1, Square::new(0, 0), Color::White)
        && needs(c.black_king, e8, Square::new(7, 7), Color::Black)
        && needs(c.black_queen, e8, Square::new(0, 7), Color::Black))
    {
        return Err(err("castling", "castling right without king and rook on home squares"));
    }

    if let Some(ep) = pos.ep {
        let (ep_rank, pawn_rank, mover) = match pos.side {
            Color::White => (5, 4, Color::Black),
            Color::Black => (2, 3, Color::White),
        };
        let pawn_sq = Square::new(ep.file(), pawn_rank);
        if ep.rank() != ep_rank
            || pos.piece_at(ep).is_some()
            || pos.piece_at(pawn_sq) != Some(Piece::new(mover, PieceType::Pawn))
        {
            return Err(err("en_passant", format!("{ep} is not a valid en-passant target")));
        }
    }
    Ok(())
}

impl Position {
    pub fn to_fen(&self) -> String {
        let mut out = String::with_capacity(90);
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match self.board[Square::new(file, rank).index()] {
                    Some(p) => {
                        if empty > 0 {
                            out.push(char::from_digit(empty, 10).unwrap());
                            empty = 0;
                        }
                        out.push(p.fen_char());
                    }
                    None => empty += 1,
                }
            }
            if empty > 0 {
                out.push(char::from_digit(empty, 10).unwrap());
            }
            if rank > 0 {
                out.push('/');
            }
        }
        out.push(' ');
        out.push(if self.side == Color::White { 'w' } else { 'b' });
        out.push(' ');
        if self.castling.is_empty() {
            out.push('-');
        } else {
            for (flag, c) in [
                (self.castling.white_king, 'K'),
                (self.castling.white_queen, 'Q'),
                (self.castling.black_king, 'k'),
                (self.castling.black_queen, 'q'),
            ] {
                if flag {
                    out.push(c);
                }
            }
        }
        out.push(' ');
        match self.ep {
            Some(sq) => out.push_str(&sq.to_string()),
            None => out.push('-'),
        }
        out.push_str(&format!(" {} {}", self.halfmove, self.fullmove));
        out
    }
}

impl FromStr for Position {
    type Err = ChessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_fen(s)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fen())
    }
}
