//! One hand-and-brain game driven in code: a scripted player alternates
//! modes, the built-in engines play teammate and opponent, and the log is
//! written as JSONL and replayed.
//!
//! cargo run --example play_session -- [turns] [out.jsonl]

use handbrain::engine::{connect, EngineConfig, EngineRole};
use handbrain::session::{
    read_log, replay_session, write_log, ControlMode, GameResult, EndReason, Intent, Phase, Session, SessionSetup,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let turns: u32 = args.next().map_or(Ok(8), |s| s.parse())?;
    let out = args.next().map_or_else(|| std::env::temp_dir().join("play_session.jsonl"), Into::into);

    let mut session = Session::start(
        SessionSetup::new("demo"),
        connect(&EngineConfig::builtin(EngineRole::Teammate, 2))?,
        connect(&EngineConfig::builtin(EngineRole::Opponent, 2))?,
        0,
    )?;
    let mut t = 0;
    for turn in 1..=turns {
        if session.state().ended {
            break;
        }
        t += 2500;
        let mode = if turn % 3 == 0 { ControlMode::Brain } else { ControlMode::Hand };
        session.step(Intent::ChooseMode(mode), t)?;
        t += 1000;
        match session.state().phase {
            // the teammate named a piece; play its first legal move
            Phase::AwaitHumanMove { piece } => {
                let mv = session.state().position.legal_moves_of_type(Some(piece))[0];
                session.step(Intent::HumanMove(mv.uci()), t)?;
            }
            Phase::AwaitPieceType => {
                let piece = session.state().position.movable_piece_types()[0];
                session.step(Intent::ChoosePiece(piece), t)?;
            }
            other => return Err(format!("unexpected phase {}", other.name()).into()),
        }
        if !session.state().ended {
            t += 800;
            session.step(Intent::OpponentReply, t)?;
        }
    }
    if !session.state().ended {
        session.step(Intent::End { result: GameResult::Unfinished, reason: EndReason::TurnLimit }, t)?;
    }

    write_log(&out, session.events())?;
    let state = replay_session(&read_log(&out)?)?;
    for r in &state.turns {
        println!("{:>2} {:<5} {:<5} by {:?}: {}", r.index, r.mode, r.piece.name(), r.piece_by, r.san);
    }
    println!("{} events -> {}", session.events().len(), out.display());
    println!("final {}", state.position.to_fen());
    Ok(())
}
