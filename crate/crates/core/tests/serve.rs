use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use handbrain::engine::{EngineConfig, EngineRole};
use handbrain::learner::BoostedModel;
use handbrain::session::serve::{handle_connection, ServeConfig};
use handbrain::session::wire::{Message, StateMsg};
use handbrain::session::{read_log, replay_session, EndReason, EventBody, GameResult};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message as WsMessage, WebSocket};

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

/// Serves exactly one connection on an ephemeral port.
fn serve_once(cfg: ServeConfig, id: &'static str) -> (Client, JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        handle_connection(stream, &cfg, id).unwrap();
    });
    let (client, _) = tungstenite::connect(format!("ws://{addr}")).unwrap();
    (client, server)
}

fn config(dir: &Path) -> ServeConfig {
    let mut cfg = ServeConfig::new(dir);
    cfg.teammate = EngineConfig::builtin(EngineRole::Teammate, 1);
    cfg.opponent = EngineConfig::builtin(EngineRole::Opponent, 1);
    cfg
}

fn recv(ws: &mut Client) -> Message {
    loop {
        if let WsMessage::Text(t) = ws.read().unwrap() {
            return Message::decode(t.as_str()).unwrap();
        }
    }
}

fn recv_state(ws: &mut Client) -> StateMsg {
    match recv(ws) {
        Message::State(s) => s,
        other => panic!("expected state, got {other:?}"),
    }
}

fn send(ws: &mut Client, json: &str) {
    ws.send(WsMessage::text(json)).unwrap();
}

#[test]
fn a_game_over_the_socket_is_logged_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let (mut ws, server) = serve_once(config(dir.path()), "ws-1");

    let s = recv_state(&mut ws);
    assert_eq!(s.phase, "await_mode_choice");
    assert_eq!(s.session_id, "ws-1");

    send(&mut ws, r#"{"kind":"choose_mode","mode":"brain"}"#);
    let s = recv_state(&mut ws);
    assert_eq!(s.phase, "await_piece_type");

    send(&mut ws, r#"{"kind":"choose_piece","piece":"knight"}"#);
    let s = recv_state(&mut ws);
    assert_eq!(s.phase, "await_mode_choice", "teammate moved, opponent answered");
    assert_eq!(s.turn, 2);
    assert!(s.last_move.is_some());

    // junk never changes the state
    send(&mut ws, r#"{"kind":"choose_piece","piece":"dragon"}"#);
    match recv(&mut ws) {
        Message::Error(e) => assert_eq!(e.path.as_deref(), Some("/piece")),
        other => panic!("{other:?}"),
    }
    send(&mut ws, r#"{"kind":"move","uci":"e2e4"}"#);
    assert!(matches!(recv(&mut ws), Message::Error(_)), "a move before the mode is refused");
    send(&mut ws, r#"{"kind":"prediction","turn":1,"elapsed_s":1,"p_switch":0.5}"#);
    match recv(&mut ws) {
        Message::Error(e) => assert_eq!(e.code, "protocol_violation"),
        other => panic!("{other:?}"),
    }

    send(&mut ws, r#"{"kind":"gaze_batch","samples":[{"t":5,"x":300,"y":400}]}"#);
    send(&mut ws, r#"{"kind":"choose_mode","mode":"hand"}"#);
    let s = recv_state(&mut ws);
    assert_eq!(s.phase, "await_human_move");
    let piece = s.constraint.unwrap();
    assert_eq!(s.legal_piece_types, vec![piece]);
    let mv = s.legal_moves[0].clone();
    send(&mut ws, &format!(r#"{{"kind":"move","uci":"{mv}"}}"#));
    let s = recv_state(&mut ws);
    assert_eq!(s.turn, 3);

    ws.close(None).unwrap();
    while ws.read().is_ok() {}
    server.join().unwrap();

    let events = read_log(&dir.path().join("ws-1.jsonl")).unwrap();
    let state = replay_session(&events).unwrap();
    assert_eq!(state.turns.len(), 2);
    assert_eq!(state.position.to_fen(), s.fen);
    assert!(events.iter().any(|e| matches!(e.body, EventBody::GazeBatch { .. })));
    assert!(matches!(
        events.last().unwrap().body,
        EventBody::SessionEnd {
            result: GameResult::Unfinished,
            reason: EndReason::Aborted
        }
    ));
}

#[test]
fn a_dropped_socket_aborts_the_session() {
    let dir = tempfile::tempdir().unwrap();
    let (mut ws, server) = serve_once(config(dir.path()), "ws-2");
    recv_state(&mut ws);
    drop(ws);
    server.join().unwrap();
    let events = read_log(&dir.path().join("ws-2.jsonl")).unwrap();
    assert!(replay_session(&events).unwrap().ended);
}

#[test]
fn predictions_stream_while_thinking() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.model = Some(Arc::new(BoostedModel::constant(vec!["cur_fragility".into()], 0.0)));
    let (mut ws, server) = serve_once(cfg, "ws-3");
    recv_state(&mut ws);
    send(&mut ws, r#"{"kind":"choose_mode","mode":"brain"}"#);
    recv_state(&mut ws);
    send(&mut ws, r#"{"kind":"choose_piece","piece":"pawn"}"#);
    recv_state(&mut ws);

    let deadline = Instant::now() + Duration::from_secs(10);
    let p = loop {
        assert!(Instant::now() < deadline, "no prediction");
        if let Message::Prediction(p) = recv(&mut ws) {
            break p;
        }
    };
    assert_eq!(p.turn, 2);
    assert!(p.elapsed_s >= 1.0);
    assert!((p.p_switch - 0.5).abs() < 1e-12);

    ws.close(None).unwrap();
    while ws.read().is_ok() {}
    server.join().unwrap();
    let events = read_log(&dir.path().join("ws-3.jsonl")).unwrap();
    assert!(events.iter().any(|e| matches!(e.body, EventBody::PredictionEmitted { turn: 2, .. })));
}
