//! Standard algebraic notation and PGN import/export.

use super::position::Position;
use super::types::{Move, PieceType};
use super::ChessError;

impl Position {
    /// SAN for a legal move, including the check / mate suffix.
    pub fn san(&self, mv: &Move) -> String {
        let mut out = if mv.is_castle() {
            if mv.to.file() == 6 { "O-O" } else { "O-O-O" }.to_string()
        } else if mv.piece == PieceType::Pawn {
            let mut s = String::new();
            if mv.is_capture() {
                s.push((b'a' + mv.from.file()) as char);
                s.push('x');
            }
            s.push_str(&mv.to.to_string());
            if let Some(p) = mv.promotion {
                s.push('=');
                s.push(p.letter().to_ascii_uppercase());
            }
            s
        } else {
            let mut s = String::new();
            s.push(mv.piece.letter().to_ascii_uppercase());
            let rivals: Vec<Move> = self
                .legal_moves_of_type(Some(mv.piece))
                .into_iter()
                .filter(|m| m.to == mv.to && m.from != mv.from)
                .collect();
            if !rivals.is_empty() {
                let same_file = rivals.iter().any(|m| m.from.file() == mv.from.file());
                let same_rank = rivals.iter().any(|m| m.from.rank() == mv.from.rank());
                if !same_file {
                    s.push((b'a' + mv.from.file()) as char);
                } else if !same_rank {
                    s.push((b'1' + mv.from.rank()) as char);
                } else {
                    s.push_str(&mv.from.to_string());
                }
            }
            if mv.is_capture() {
                s.push('x');
            }
            s.push_str(&mv.to.to_string());
            s
        };
        let next = self.play_unchecked(mv);
        if next.in_check(next.side_to_move()) {
            out.push(if next.legal_moves().is_empty() { '#' } else { '+' });
        }
        out
    }

    /// Resolves a SAN token against the legal moves. Check markers,
    /// annotations and a missing `=` before the promotion piece are tolerated.
    pub fn parse_san(&self, text: &str) -> Result<Move, ChessError> {
        let wanted = normalize_san(text);
        self.legal_moves()
            .into_iter()
            .find(|m| normalize_san(&self.san(m)) == wanted)
            .ok_or_else(|| ChessError::IllegalMove(text.to_string()))
    }
}

fn normalize_san(text: &str) -> String {
    let t = text
        .trim()
        .trim_end_matches(['+', '#', '!', '?'])
        .replace('0', "O")
        .replace("e.p.", "");
    // "e8Q" -> "e8=Q"
    let bytes = t.as_bytes();
    if bytes.len() >= 3
        && !t.contains('=')
        && bytes[0].is_ascii_lowercase()
        && matches!(bytes[bytes.len() - 1], b'Q' | b'R' | b'B' | b'N')
        && bytes[bytes.len() - 2].is_ascii_digit()
    {
        let (head, tail) = t.split_at(t.len() - 1);
        return format!("{head}={tail}");
    }
    t
}

/// One finished or in-progress game in PGN form.
#[derive(Debug, Clone, PartialEq)]
pub struct PgnGame {
    /// Tag pairs in output order.
    pub tags: Vec<(String, String)>,
    pub start: Position,
    pub moves: Vec<Move>,
    pub result: String,
}

impl PgnGame {
    pub fn tag(&self, name: &str) -> Option<&str> {
        self.tags
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    /// Positions before each move, followed by the final position.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = vec![self.start.clone()];
        for mv in &self.moves {
            let next = out.last().unwrap().play_unchecked(mv);
            out.push(next);
        }
        out
    }

    pub fn to_pgn(&self) -> String {
        let mut out = String::new();
        let mut tags = self.tags.clone();
        if !tags.iter().any(|(k, _)| k == "Result") {
            tags.push(("Result".into(), self.result.clone()));
        }
        if self.start != Position::startpos() && !tags.iter().any(|(k, _)| k == "FEN") {
            tags.push(("SetUp".into(), "1".into()));
            tags.push(("FEN".into(), self.start.to_fen()));
        }
        for (k, v) in &tags {
            out.push_str(&format!("[{k} \"{}\"]\n", v.replace('\\', "\\\\").replace('"', "\\\"")));
        }
        out.push('\n');

        let mut tokens = Vec::new();
        let mut pos = self.start.clone();
        for (i, mv) in self.moves.iter().enumerate() {
            let white = pos.side_to_move() == super::Color::White;
            if white {
                tokens.push(format!("{}.", pos.fullmove_number()));
            } else if i == 0 {
                tokens.push(format!("{}...", pos.fullmove_number()));
            }
            tokens.push(pos.san(mv));
            pos = pos.play_unchecked(mv);
        }
        tokens.push(self.result.clone());

        let mut line_len = 0;
        for tok in tokens {
            if line_len > 0 && line_len + 1 + tok.len() > 79 {
                out.push('\n');
                line_len = 0;
            } else if line_len > 0 {
                out.push(' ');
                line_len += 1;
            }
            out.push_str(&tok);
            line_len += tok.len();
        }
        out.push('\n');
        out
    }
}

const RESULTS: [&str; 4] = ["1-0", "0-1", "1/2-1/2", "*"];

/// Parses every game in a PGN document.
pub fn parse_pgn(text: &str) -> Result<Vec<PgnGame>, ChessError> {
    let mut games = Vec::new();
    let mut tags: Vec<(String, String)> = Vec::new();
    let mut movetext = String::new();

    let flush = |tags: &mut Vec<(String, String)>, movetext: &mut String, games: &mut Vec<PgnGame>| {
        if tags.is_empty() && movetext.trim().is_empty() {
            return Ok(());
        }
        let game = parse_game(std::mem::take(tags), movetext)?;
        movetext.clear();
        games.push(game);
        Ok::<(), ChessError>(())
    };

    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') && trimmed.ends_with(']') {
            if !movetext.trim().is_empty() {
                flush(&mut tags, &mut movetext, &mut games)?;
            }
            tags.push(parse_tag(trimmed)?);
        } else if !trimmed.starts_with('%') {
            movetext.push_str(line);
            movetext.push('\n');
        }
    }
    flush(&mut tags, &mut movetext, &mut games)?;
    Ok(games)
}

fn parse_tag(line: &str) -> Result<(String, String), ChessError> {
    let inner = &line[1..line.len() - 1];
    let (name, rest) = inner
        .split_once(char::is_whitespace)
        .ok_or_else(|| ChessError::Pgn(format!("malformed tag: {line}")))?;
    let value = rest.trim();
    if value.len() < 2 || !value.starts_with('"') || !value.ends_with('"') {
        return Err(ChessError::Pgn(format!("malformed tag value: {line}")));
    }
    let value = value[1..value.len() - 1]
        .replace("\\\"", "\"")
        .replace("\\\\", "\\");
    Ok((name.to_string(), value))
}

fn parse_game(tags: Vec<(String, String)>, movetext: &str) -> Result<PgnGame, ChessError> {
    let start = match tags.iter().find(|(k, _)| k == "FEN") {
        Some((_, fen)) => fen.parse()?,
        None => Position::startpos(),
    };

    // strip comments, variations and NAGs
    let mut cleaned = String::with_capacity(movetext.len());
    let mut depth = 0usize;
    let mut chars = movetext.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                for d in chars.by_ref() {
                    if d == '}' {
                        break;
                    }
                }
                cleaned.push(' ');
            }
            ';' => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
                cleaned.push(' ');
            }
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ if depth > 0 => {}
            _ => cleaned.push(c),
        }
    }

    let mut pos = start.clone();
    let mut moves = Vec::new();
    let mut result = tags
        .iter()
        .find(|(k, _)| k == "Result")
        .map(|(_, v)| v.clone())
        .unwrap_or_else(|| "*".to_string());
    for raw in cleaned.split_whitespace() {
        if raw.starts_with('$') {
            continue;
        }
        if RESULTS.contains(&raw) {
            result = raw.to_string();
            continue;
        }
        // "12." / "12..." / "12.e4"
        let tok = raw.trim_start_matches(|c: char| c.is_ascii_digit());
        let tok = if tok.len() < raw.len() { tok.trim_start_matches('.') } else { raw };
        if tok.is_empty() {
            continue;
        }
        let mv = pos
            .parse_san(tok)
            .map_err(|_| ChessError::Pgn(format!("illegal or unknown move '{tok}' in {}", pos.to_fen())))?;
        pos = pos.play_unchecked(&mv);
        moves.push(mv);
    }
    Ok(PgnGame {
        tags,
        start,
        moves,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn play(pos: &Position, uci: &[&str]) -> Position {
        uci.iter().fold(pos.clone(), |p, m| {
            let mv = p.parse_uci_move(m).unwrap();
            p.apply_move(&mv).unwrap()
        })
    }

    #[test]
    fn san_basics() {
        let pos = Position::startpos();
        assert_eq!(pos.san(&pos.parse_uci_move("e2e4").unwrap()), "e4");
        assert_eq!(pos.san(&pos.parse_uci_move("g1f3").unwrap()), "Nf3");
        let mated = play(&pos, &["f2f3", "e7e5", "g2g4"]);
        assert_eq!(mated.san(&mated.parse_uci_move("d8h4").unwrap()), "Qh4#");
    }

    #[test]
    fn san_disambiguates() {
        let pos: Position = "4k3/8/8/8/8/8/4K3/R6R w - - 0 1".parse().unwrap();
        let mv = pos.parse_uci_move("a1d1").unwrap();
        assert_eq!(pos.san(&mv), "Rad1");
        let pos: Position = "4k3/8/8/N7/8/8/8/N3K3 w - - 0 1".parse().unwrap();
        assert_eq!(pos.san(&pos.parse_uci_move("a1b3").unwrap()), "N1b3");
    }

    #[test]
    fn pgn_round_trip() {
        let start = Position::startpos();
        let line = ["e2e4", "e7e5", "g1f3", "b8c6", "f1b5", "a7a6", "e1g1"];
        let mut pos = start.clone();
        let mut moves = Vec::new();
        for m in line {
            let mv = pos.parse_uci_move(m).unwrap();
            pos = pos.apply_move(&mv).unwrap();
            moves.push(mv);
        }
        let game = PgnGame {
            tags: vec![("Event".into(), "test".into())],
            start,
            moves,
            result: "*".into(),
        };
        let text = game.to_pgn();
        assert!(text.contains("4. O-O *"), "{text}");
        let parsed = parse_pgn(&text).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].moves, game.moves);
        assert_eq!(parsed[0].positions().last().unwrap(), &pos);
    }

    #[test]
    fn pgn_skips_comments_and_variations() {
        let text = "[Event \"x\"]\n[Result \"1-0\"]\n\n1. e4 {best by test} e5 (1... c5 2. Nf3) 2. Nf3 $1 Nc6 1-0\n";
        let games = parse_pgn(text).unwrap();
        assert_eq!(games[0].moves.len(), 4);
        assert_eq!(games[0].result, "1-0");
    }
}
