//! Serves the builtin engine over UCI, so the client code path can be
//! exercised end to end without an external binary.

use std::io::{self, BufRead, Write};

use super::builtin::BuiltinEngine;
use super::{EngineConfig, Score, SearchLimit};
use crate::chess::{Move, Position};

pub fn serve_uci<R: BufRead, W: Write>(input: R, mut output: W, cfg: EngineConfig) -> io::Result<()> {
    let mut cfg = cfg;
    let mut pos = Position::startpos();
    for line in input.lines() {
        let line = line?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("uci") => {
                writeln!(output, "id name handbrain-builtin")?;
                writeln!(output, "id author handbrain")?;
                writeln!(output, "option name UCI_LimitStrength type check default false")?;
                writeln!(output, "option name UCI_Elo type spin default 1500 min 800 max 2800")?;
                writeln!(output, "uciok")?;
            }
            Some("isready") => writeln!(output, "readyok")?,
            Some("ucinewgame") | Some("setoption") | Some("stop") => {}
            Some("position") => {
                if let Some(p) = parse_position(&line) {
                    pos = p;
                }
            }
            Some("go") => {
                let args: Vec<&str> = tokens.collect();
                let (limit, restrict) = parse_go(&args, &pos);
                if let Some(limit) = limit {
                    cfg.limit = limit;
                }
                let engine = BuiltinEngine::new(cfg.clone());
                let moves = match restrict {
                    Some(r) if !r.is_empty() => r,
                    _ => pos.legal_moves(),
                };
                if moves.is_empty() {
                    writeln!(output, "bestmove (none)")?;
                } else {
                    let side = pos.side_to_move();
                    let (best, value) = engine.search_restricted(&pos, moves);
                    let score = match Score::from_side_value(value, side) {
                        Score::Centipawns(cp) => format!("cp {}", cp * side.sign()),
                        Score::Mate { winner, plies } => {
                            let moves = (plies as i32 + 1) / 2;
                            format!("mate {}", if winner == side { moves } else { -moves })
                        }
                    };
                    writeln!(output, "info depth {} score {score} pv {}", engine.depth(), best.uci())?;
                    writeln!(output, "bestmove {}", best.uci())?;
                }
            }
            Some("quit") => break,
            _ => {}
        }
        output.flush()?;
    }
    Ok(())
}

fn parse_position(line: &str) -> Option<Position> {
    let rest = line.strip_prefix("position")?.trim();
    let (setup, moves) = match rest.split_once(" moves ") {
        Some((s, m)) => (s.trim(), Some(m)),
        None => (rest.strip_suffix(" moves").unwrap_or(rest), None),
    };
    let mut pos = if setup == "startpos" {
        Position::startpos()
    } else {
        setup.strip_prefix("fen")?.trim().parse().ok()?
    };
    for m in moves.unwrap_or("").split_whitespace() {
        let mv = pos.parse_uci_move(m).ok()?;
        pos = pos.apply_move(&mv).ok()?;
    }
    Some(pos)
}

fn parse_go(args: &[&str], pos: &Position) -> (Option<SearchLimit>, Option<Vec<Move>>) {
    let mut limit = None;
    let mut restrict: Option<Vec<Move>> = None;
    let mut i = 0;
    while i < args.len() {
        match args[i] {
            "depth" => {
                limit = args.get(i + 1).and_then(|v| v.parse().ok()).map(SearchLimit::Depth);
                i += 2;
            }
            "movetime" => {
                limit = args.get(i + 1).and_then(|v| v.parse().ok()).map(SearchLimit::MovetimeMs);
                i += 2;
            }
            "searchmoves" => {
                let list = restrict.get_or_insert_with(Vec::new);
                i += 1;
                while let Some(mv) = args.get(i).and_then(|t| pos.parse_uci_move(t).ok()) {
                    list.push(mv);
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    (limit, restrict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineRole;

    fn run(script: &str) -> String {
        let mut out = Vec::new();
        serve_uci(script.as_bytes(), &mut out, EngineConfig::builtin(EngineRole::Opponent, 2)).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn handshake_and_search() {
        let out = run("uci\nisready\nposition startpos moves e2e4\ngo depth 1\nquit\n");
        assert!(out.contains("uciok"));
        assert!(out.contains("readyok"));
        let best = out.lines().find(|l| l.starts_with("bestmove")).unwrap();
        let mv = best.split_whitespace().nth(1).unwrap();
        let pos = parse_position("position startpos moves e2e4").unwrap();
        assert!(pos.parse_uci_move(mv).is_ok());
    }

    #[test]
    fn searchmoves_restricts_root() {
        let out = run("position startpos\ngo depth 2 searchmoves b1a3\nquit\n");
        assert!(out.contains("bestmove b1a3"), "{out}");
    }

    #[test]
    fn no_moves_reports_none() {
        let out = run("position fen 7k/5Q2/6K1/8/8/8/8/8 b - - 0 1\ngo depth 1\n");
        assert!(out.contains("bestmove (none)"));
    }
}
