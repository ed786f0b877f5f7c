//! Circuit architecture search by progressive-widening Monte Carlo tree
//! search, with a dense simulator, benchmark problems and angle fine-tuning.

pub mod circuit;
pub mod config;
pub mod error;
pub mod finetune;
pub mod mcts;
pub mod problems;
pub mod qsim;

pub use circuit::{Circuit, Gate, GateKind};
pub use config::SearchConfig;
pub use error::{Error, Result};
