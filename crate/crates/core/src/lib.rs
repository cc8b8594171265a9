pub mod chess;
pub mod cli;
pub mod engine;
pub mod features;
pub mod fragility;
pub mod learner;
mod par;
pub mod session;
pub mod sim;
pub mod stats;
