//! WebSocket server: one thread and one session per connection, each
//! session logged to its own JSON Lines file.

use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use tungstenite::{Message as WsMessage, WebSocket};

use super::event::{EndReason, GameResult};
use super::live::{Intent, Session, SessionError, SessionSetup};
use super::log::{LogError, LogWriter};
use super::state::{Phase, SessionState};
use super::wire::{decode_error_message, error_message, state_message, ErrorMsg, Extra, Message, PredictionMsg};
use crate::chess::Color;
use crate::engine::{connect, Engine, EngineConfig, EngineError, EngineRole};
use crate::features::{features_at, feature_names, summarize_turn, turn_context, Streams, TurnContext, TurnSummary};
use crate::fragility::fragility_score;
use crate::learner::BoostedModel;

const TICK: Duration = Duration::from_millis(100);

#[derive(Clone)]
pub struct ServeConfig {
    pub teammate: EngineConfig,
    pub opponent: EngineConfig,
    pub logdir: PathBuf,
    pub team_color: Color,
    /// When set, switch probabilities are pushed every second of thinking.
    pub model: Option<Arc<BoostedModel>>,
    /// Evaluator for the prediction features.
    pub evaluator: EngineConfig,
    /// Local feature window.
    pub k: usize,
}

impl ServeConfig {
    pub fn new(logdir: impl Into<PathBuf>) -> Self {
        ServeConfig {
            teammate: EngineConfig::builtin(EngineRole::Teammate, 2),
            opponent: EngineConfig::builtin(EngineRole::Opponent, 2),
            logdir: logdir.into(),
            team_color: Color::White,
            model: None,
            evaluator: EngineConfig::builtin(EngineRole::Evaluator, 1),
            k: 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("websocket: {0}")]
    WebSocket(String),
    #[error("model: {0}")]
    Model(String),
}

pub struct Server {
    listener: TcpListener,
    cfg: ServeConfig,
    counter: Arc<AtomicU64>,
}

impl Server {
    pub fn bind(addr: &str, cfg: ServeConfig) -> Result<Server, ServeError> {
        std::fs::create_dir_all(&cfg.logdir)?;
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            cfg,
            counter: Arc::new(AtomicU64::new(0)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, ServeError> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections forever, each on its own thread.
    pub fn run(self) -> Result<(), ServeError> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let cfg = self.cfg.clone();
            let id = next_session_id(&self.counter);
            std::thread::spawn(move || {
                if let Err(e) = handle_connection(stream, &cfg, &id) {
                    eprintln!("session {id}: {e}");
                }
            });
        }
        Ok(())
    }
}

fn next_session_id(counter: &AtomicU64) -> String {
    let ms = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
    format!("s{ms}-{:03}", counter.fetch_add(1, Ordering::Relaxed))
}

/// Runs one session over an accepted TCP connection until the socket closes.
pub fn handle_connection(stream: TcpStream, cfg: &ServeConfig, session_id: &str) -> Result<(), ServeError> {
    let mut ws = tungstenite::accept(stream).map_err(|e| ServeError::WebSocket(e.to_string()))?;
    ws.get_mut().set_read_timeout(Some(TICK))?;
    let clock = Instant::now();
    let now = || clock.elapsed().as_millis() as u64;

    let mut setup = SessionSetup::new(session_id);
    setup.team_color = cfg.team_color;
    setup.origin = Some("serve".into());
    let mut session = Session::start(setup, connect(&cfg.teammate)?, connect(&cfg.opponent)?, 0)?;
    let mut log = LogWriter::create(&cfg.logdir.join(format!("{session_id}.jsonl")))?;
    log.append(session.events())?;
    let mut predictor = match &cfg.model {
        Some(model) => Some(Predictor::new(model.clone(), connect(&cfg.evaluator)?, cfg.k)?),
        None => None,
    };
    // the opponent may have the first move
    answer_opponent(&mut session, &mut log, &mut ws, now())?;
    send(&mut ws, &Message::State(state_message(session.state())))?;

    loop {
        match ws.read() {
            Ok(WsMessage::Text(text)) => {
                let reply = handle_text(&mut session, &mut log, text.as_str(), now());
                match reply {
                    Ok(changed) => {
                        if changed {
                            answer_opponent(&mut session, &mut log, &mut ws, now())?;
                            send(&mut ws, &Message::State(state_message(session.state())))?;
                        }
                    }
                    Err(msg) => send(&mut ws, &Message::Error(msg))?,
                }
            }
            Ok(WsMessage::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => break,
            Err(tungstenite::Error::Io(_) | tungstenite::Error::Protocol(_)) => break,
            Err(e) => return Err(ServeError::WebSocket(e.to_string())),
        }
        if let Some(p) = predictor.as_mut() {
            for msg in p.tick(&mut session, &mut log, now())? {
                send(&mut ws, &Message::Prediction(msg))?;
            }
        }
    }
    if !session.state().ended {
        let ev = session.step(
            Intent::End {
                result: GameResult::Unfinished,
                reason: EndReason::Aborted,
            },
            now(),
        )?;
        log.append(&ev)?;
    }
    Ok(())
}

fn send(ws: &mut WebSocket<TcpStream>, msg: &Message) -> Result<(), ServeError> {
    match ws.send(WsMessage::text(msg.encode())) {
        Ok(()) | Err(tungstenite::Error::ConnectionClosed) => Ok(()),
        Err(e) => Err(ServeError::WebSocket(e.to_string())),
    }
}

/// Applies one client message. `Ok(true)` when the visible state changed.
fn handle_text(session: &mut Session, log: &mut LogWriter, text: &str, t: u64) -> Result<bool, ErrorMsg> {
    let msg = Message::decode(text).map_err(|e| decode_error_message(&e))?;
    let Some(intent) = msg.to_intent() else {
        return Err(ErrorMsg {
            code: "protocol_violation".into(),
            message: format!("{} is a server message", msg.kind()),
            path: Some("/kind".into()),
            extra: Extra::new(),
        });
    };
    let stream_only = matches!(intent, Intent::Gaze(_) | Intent::Emotion(_));
    let events = session.step(intent, t).map_err(|e| error_message(&e))?;
    log.append(&events).map_err(|e| ErrorMsg {
        code: "internal".into(),
        message: e.to_string(),
        path: None,
        extra: Extra::new(),
    })?;
    Ok(!stream_only)
}

fn answer_opponent(
    session: &mut Session,
    log: &mut LogWriter,
    ws: &mut WebSocket<TcpStream>,
    t: u64,
) -> Result<(), ServeError> {
    if session.state().phase == Phase::OpponentThinking && !session.state().ended {
        match session.step(Intent::OpponentReply, t) {
            Ok(ev) => log.append(&ev)?,
            Err(e) => {
                send(ws, &Message::Error(error_message(&e)))?;
                return Err(e.into());
            }
        }
    }
    Ok(())
}

/// Builds the feature vector of the current turn each second and scores it.
struct Predictor {
    model: Arc<BoostedModel>,
    evaluator: Box<dyn Engine>,
    k: usize,
    layout: Vec<usize>,
    contexts: Vec<TurnContext>,
    current: Option<(u32, TurnContext)>,
    emitted: u64,
}

impl Predictor {
    fn new(model: Arc<BoostedModel>, evaluator: Box<dyn Engine>, k: usize) -> Result<Predictor, ServeError> {
        let names = feature_names();
        let layout = model
            .feature_names
            .iter()
            .map(|n| {
                names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| ServeError::Model(format!("model feature '{n}' is not computed live")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Predictor {
            model,
            evaluator,
            k,
            layout,
            contexts: Vec::new(),
            current: None,
            emitted: 0,
        })
    }

    fn tick(&mut self, session: &mut Session, log: &mut LogWriter, t: u64) -> Result<Vec<PredictionMsg>, ServeError> {
        let state = session.state();
        if state.phase != Phase::AwaitModeChoice || state.turns.is_empty() || state.ended {
            return Ok(Vec::new());
        }
        let turn = state.turn_index();
        if self.current.is_none_or(|(i, _)| i != turn) {
            self.current = Some((turn, self.context_now(state)?));
            self.emitted = 0;
        }
        let start = state.turn_start_t;
        let seconds = t.saturating_sub(start) / 1000;
        let mut out = Vec::new();
        while self.emitted < seconds {
            self.emitted += 1;
            let tau = start + self.emitted * 1000;
            let p_switch = self.predict(session, tau)?;
            let elapsed_s = self.emitted as f64;
            let events = session.step(
                Intent::Prediction {
                    turn,
                    elapsed_s,
                    p_switch,
                },
                t,
            )?;
            log.append(&events)?;
            out.push(PredictionMsg {
                turn,
                elapsed_s,
                p_switch,
                extra: Extra::new(),
            });
        }
        Ok(out)
    }

    fn context_now(&mut self, state: &SessionState) -> Result<TurnContext, ServeError> {
        while self.contexts.len() < state.turns.len() {
            let rec = &state.turns[self.contexts.len()];
            let before = rec.fen_before.parse().expect("logged FEN parses");
            let after = rec.fen_after.parse().expect("logged FEN parses");
            self.contexts.push(turn_context(&before, &after, self.evaluator.as_mut())?);
        }
        let eval = self.evaluator.evaluate(&state.position)?.cp();
        Ok(TurnContext {
            eval_before: eval,
            eval_after: eval,
            fragility: fragility_score(&state.position),
        })
    }

    fn predict(&self, session: &Session, tau: u64) -> Result<f64, ServeError> {
        let state = session.state();
        let (_, ctx) = self.current.expect("context set for the turn");
        let streams = Streams::from_events(session.events());
        let prev: Vec<TurnSummary> = state
            .turns
            .iter()
            .zip(&self.contexts)
            .map(|(turn, c)| summarize_turn(&streams, &state.board, turn, *c))
            .collect();
        let values = features_at(&streams, &state.board, &prev, self.k, state.turn_start_t, tau, &ctx);
        let row: Vec<f64> = self
            .layout
            .iter()
            .map(|&i| values[i].unwrap_or(f64::NAN))
            .collect();
        self.model.predict_proba(&row).map_err(|e| ServeError::Model(e.to_string()))
    }
}
