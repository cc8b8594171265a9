//! UCI client over a child process's stdin/stdout.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::{constrained_moves, Engine, EngineConfig, EngineError, Evaluation, Score, SearchLimit};
use crate::chess::{Color, Move, PieceType, Position};

const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(5);
const DEPTH_SEARCH_TIMEOUT: Duration = Duration::from_secs(60);
const MOVETIME_GRACE: Duration = Duration::from_secs(5);

pub struct UciEngine {
    cfg: EngineConfig,
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    name: Option<String>,
}

struct SearchOutput {
    score: Option<(Score, u32)>,
    bestmove: String,
}

impl UciEngine {
    /// Starts the engine and completes the `uci` / `isready` handshake.
    pub fn spawn(cfg: EngineConfig) -> Result<Self, EngineError> {
        let mut child = Command::new(&cfg.engine)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| EngineError::Transport(format!("cannot start '{}': {e}", cfg.engine)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut engine = UciEngine {
            cfg,
            child,
            stdin,
            lines: rx,
            name: None,
        };
        engine.handshake()?;
        Ok(engine)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    fn send(&mut self, line: &str) -> Result<(), EngineError> {
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| EngineError::Transport(format!("write failed: {e}")))
    }

    fn recv(&mut self, deadline: Instant, waiting_for: &str) -> Result<String, EngineError> {
        let left = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(left) {
            Ok(line) => Ok(line),
            Err(RecvTimeoutError::Timeout) => Err(EngineError::Timeout(format!("waiting for {waiting_for}"))),
            Err(RecvTimeoutError::Disconnected) => {
                Err(EngineError::Transport(format!("engine exited while waiting for {waiting_for}")))
            }
        }
    }

    fn wait_for(&mut self, token: &str, timeout: Duration) -> Result<(), EngineError> {
        let deadline = Instant::now() + timeout;
        loop {
            let line = self.recv(deadline, token)?;
            if let Some(name) = line.strip_prefix("id name ") {
                self.name = Some(name.trim().to_string());
            }
            if line.trim() == token {
                return Ok(());
            }
        }
    }

    fn handshake(&mut self) -> Result<(), EngineError> {
        self.send("uci")?;
        self.wait_for("uciok", HANDSHAKE_TIMEOUT)?;
        if let Some(elo) = self.cfg.elo {
            self.send("setoption name UCI_LimitStrength value true")?;
            self.send(&format!("setoption name UCI_Elo value {elo}"))?;
        }
        self.send("ucinewgame")?;
        self.ready()
    }

    fn ready(&mut self) -> Result<(), EngineError> {
        self.send("isready")?;
        self.wait_for("readyok", HANDSHAKE_TIMEOUT)
    }

    fn search_timeout(&self) -> Duration {
        if let Some(ms) = self.cfg.timeout_ms {
            return Duration::from_millis(ms);
        }
        match self.cfg.limit {
            SearchLimit::Depth(_) => DEPTH_SEARCH_TIMEOUT,
            SearchLimit::MovetimeMs(ms) => Duration::from_millis(ms) + MOVETIME_GRACE,
        }
    }

    fn go(&mut self, pos: &Position, searchmoves: Option<&[Move]>) -> Result<SearchOutput, EngineError> {
        self.ready()?;
        self.send(&format!("position fen {}", pos.to_fen()))?;
        let mut cmd = match self.cfg.limit {
            SearchLimit::Depth(d) => format!("go depth {d}"),
            SearchLimit::MovetimeMs(ms) => format!("go movetime {ms}"),
        };
        if let Some(moves) = searchmoves {
            cmd.push_str(" searchmoves");
            for m in moves {
                cmd.push(' ');
                cmd.push_str(&m.uci());
            }
        }
        self.send(&cmd)?;

        let deadline = Instant::now() + self.search_timeout();
        let side = pos.side_to_move();
        let mut score = None;
        loop {
            let line = match self.recv(deadline, "bestmove") {
                Ok(line) => line,
                Err(EngineError::Timeout(msg)) => {
                    let _ = self.send("stop");
                    return Err(EngineError::Timeout(msg));
                }
                Err(e) => return Err(e),
            };
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("info") => {
                    if let Some(s) = parse_info_score(&line, side) {
                        score = Some(s);
                    }
                }
                Some("bestmove") => {
                    let bestmove = tokens
                        .next()
                        .ok_or_else(|| EngineError::Protocol("empty bestmove".into()))?;
                    return Ok(SearchOutput {
                        score,
                        bestmove: bestmove.to_string(),
                    });
                }
                _ => {}
            }
        }
    }
}

/// Extracts `(score, depth)` from an `info` line, converting the side-to-move
/// score to White's point of view. Bound-only scores are skipped.
pub(crate) fn parse_info_score(line: &str, side: Color) -> Option<(Score, u32)> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let mut depth = 0;
    let mut score = None;
    let mut i = 1;
    while i < tokens.len() {
        match tokens[i] {
            "depth" => {
                depth = tokens.get(i + 1)?.parse().ok()?;
                i += 2;
            }
            "score" => {
                let kind = *tokens.get(i + 1)?;
                let value: i32 = tokens.get(i + 2)?.parse().ok()?;
                if matches!(tokens.get(i + 3), Some(&"lowerbound") | Some(&"upperbound")) {
                    return None;
                }
                score = Some(match kind {
                    "cp" => Score::Centipawns(value * side.sign()),
                    "mate" => {
                        let (winner, plies) = if value > 0 {
                            (side, (2 * value - 1) as u32)
                        } else {
                            (side.opposite(), (-2 * value) as u32)
                        };
                        Score::Mate { winner, plies }
                    }
                    _ => return None,
                });
                i += 3;
            }
            "pv" => break,
            _ => i += 1,
        }
    }
    score.map(|s| (s, depth))
}

impl Engine for UciEngine {
    fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    fn evaluate(&mut self, pos: &Position) -> Result<Evaluation, EngineError> {
        if pos.legal_moves().is_empty() {
            let score = if pos.in_check(pos.side_to_move()) {
                Score::Mate {
                    winner: pos.side_to_move().opposite(),
                    plies: 0,
                }
            } else {
                Score::Centipawns(0)
            };
            return Ok(Evaluation { score, depth: 0 });
        }
        let out = self.go(pos, None)?;
        let (score, depth) = out
            .score
            .ok_or_else(|| EngineError::Protocol("search finished without a score".into()))?;
        Ok(Evaluation { score, depth })
    }

    fn constrained_best_move(
        &mut self,
        pos: &Position,
        constraint: Option<PieceType>,
    ) -> Result<Move, EngineError> {
        let allowed = constrained_moves(pos, constraint)?;
        let restrict = constraint.is_some().then_some(allowed.as_slice());
        let out = self.go(pos, restrict)?;
        if out.bestmove == "(none)" || out.bestmove == "0000" {
            return Err(EngineError::NoLegalMoves);
        }
        let mv = pos
            .parse_uci_move(&out.bestmove)
            .map_err(|_| EngineError::Protocol(format!("engine returned illegal move {}", out.bestmove)))?;
        if !allowed.iter().any(|m| m.same_squares(&mv)) {
            return Err(EngineError::Protocol(format!(
                "engine move {} ignores the {constraint:?} restriction",
                out.bestmove
            )));
        }
        Ok(mv)
    }
}

impl Drop for UciEngine {
    fn drop(&mut self) {
        let _ = self.send("quit");
        let deadline = Instant::now() + Duration::from_millis(500);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
