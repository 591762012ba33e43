pub mod decision;
pub mod empathy;
pub mod env;
pub mod error;
pub mod harness;
pub mod neuromodulation;
pub mod rng;
pub mod snn;

pub use error::{Error, Result};
