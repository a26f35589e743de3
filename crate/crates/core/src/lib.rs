//! Multi-block neural regression with reinforced gradients and weighted estimates.

pub mod baselines;
pub mod block;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod search;

pub use error::{Error, Result};
