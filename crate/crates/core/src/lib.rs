//! Intention-aware planning with guided exploration for interactive
//! driving: a learned human behavior model, an expert safe-probability
//! table, a bonus-augmented planner and a 1-D driving simulator.

pub mod domain;
pub mod error;
pub mod guided;
pub mod harness;
pub mod human_model;
pub mod planner;
pub mod simulator;

pub use error::{Error, ErrorCategory, Result};
