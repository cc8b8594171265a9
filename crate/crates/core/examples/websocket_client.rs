//! Starts the session server on a free port and plays a few turns against it
//! over WebSocket, the way the browser client does.
//!
//! cargo run --example websocket_client -- [turns]

use std::net::TcpStream;

use handbrain::engine::{EngineConfig, EngineRole};
use handbrain::session::serve::{ServeConfig, Server};
use handbrain::session::wire::Message;
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message as WsMessage, WebSocket};

fn next_message(ws: &mut WebSocket<MaybeTlsStream<TcpStream>>) -> Result<Message, Box<dyn std::error::Error>> {
    loop {
        if let WsMessage::Text(text) = ws.read()? {
            return Ok(Message::decode(text.as_str())?);
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let turns: u32 = std::env::args().nth(1).map_or(Ok(4), |s| s.parse())?;
    let logdir = std::env::temp_dir().join("handbrain-ws-logs");
    let mut cfg = ServeConfig::new(&logdir);
    cfg.teammate = EngineConfig::builtin(EngineRole::Teammate, 1);
    cfg.opponent = EngineConfig::builtin(EngineRole::Opponent, 1);
    let server = Server::bind("127.0.0.1:0", cfg)?;
    let addr = server.local_addr()?;
    std::thread::spawn(move || server.run());

    let (mut ws, _) = tungstenite::connect(format!("ws://{addr}"))?;
    let mut sent = 0;
    while sent < turns * 2 {
        let state = match next_message(&mut ws)? {
            Message::State(s) => s,
            Message::Error(e) => return Err(format!("server error: {}", e.message).into()),
            _ => continue,
        };
        println!("turn {:>2} {:<18} {}", state.turn, state.phase, state.fen);
        let reply = match state.phase.as_str() {
            "await_mode_choice" => {
                let mode = if state.turn % 2 == 0 { "brain" } else { "hand" };
                format!(r#"{{"kind":"choose_mode","mode":"{mode}"}}"#)
            }
            "await_piece_type" => format!(r#"{{"kind":"choose_piece","piece":"{}"}}"#, state.legal_piece_types[0].name()),
            "await_human_move" => format!(r#"{{"kind":"move","uci":"{}"}}"#, state.legal_moves[0]),
            _ => break,
        };
        println!("  -> {reply}");
        ws.send(WsMessage::text(reply))?;
        sent += 1;
    }
    ws.close(None)?;
    println!("logs in {}", logdir.display());
    Ok(())
}
