pub mod config;
pub mod error;
pub mod exact;
pub mod fit;
pub mod forecast;
pub mod io;
pub mod run;
mod fft;
pub mod linalg;
pub mod model;
pub mod sampler;
pub mod simulate;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod whittle;

pub use error::{Error, Result};
