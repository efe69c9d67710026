//! Deterministic simulator of brick-stacking animat tribes that learn to
//! act and to signal with a pair of small recurrent networks.

pub mod animat;
pub mod batch;
pub mod behavior;
pub mod config;
pub mod error;
pub mod export;
pub mod geometry;
pub mod learning;
pub mod metrics;
pub mod neural;
pub mod rng;
pub mod signaling;
pub mod social;
pub mod trial;
pub mod world;

pub use error::{Error, Result};
pub use rng::Rng;
pub use config::{load_config, preset, TrialConfig, TribeConfig};
pub use batch::{run_batch, BatchSummary};
pub use trial::{build_trial, run_trial, Trial, TrialReport};
