//! Seeded synthetic sessions whose mode choices follow a known policy.
//!
//! The simulated participant thinks for a log-normal time while gaze and
//! expression streams are recorded, picks a mode from [`TruthPolicy`], then
//! completes the turn through the ordinary session protocol. Because the
//! policy is known, [`truth_labels`] can recompute it from the log.

mod generate;
mod policy;
mod synth;

use thiserror::Error;

use crate::engine::EngineError;
use crate::session::{ReplayError, SessionError};

pub use generate::{
    generate_many, generate_session, session_seed, truth_labels, SimConfig, TurnTruth, ORIGIN, THINK_MAX_MS, THINK_MEDIAN_S, THINK_MIN_MS,
    THINK_SIGMA,
};
pub use policy::{Link, PolicyInputs, TruthPolicy};
pub use synth::{emotion_stream, gaze_bursts, square_center, EMOTION_PERIOD_MS, GAZE_PERIOD_MS};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Foreign(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}
