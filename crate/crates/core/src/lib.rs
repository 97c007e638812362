//! Simulation and verification of online routing with predicted requests.
//!
//! The crate covers online TSP with release times and online dial-a-ride on
//! the line and the plane: exact offline oracles, an event-driven simulator,
//! prediction-aware strategies, and a harness that checks each strategy's
//! competitive bound on generated instances.

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod instance;
pub mod metric;
pub mod offline;
pub mod sim;

pub use error::{Error, Result};
