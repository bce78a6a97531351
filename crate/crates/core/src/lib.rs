pub mod bench;
pub mod error;
pub mod filters;
pub mod gibbs;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod model;
pub mod particles;
pub mod rng;

pub use error::{Error, Result};
