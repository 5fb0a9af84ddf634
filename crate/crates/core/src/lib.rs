pub mod benchfns;
pub mod cli;
pub mod error;
pub mod fsio;
pub mod neuralnet;
pub mod optimizer;
pub mod pipeline;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
