pub mod corefn;
pub mod error;
pub use error::{Error, Result};
pub mod lyapunov;
pub mod oracle;
pub mod potential;
pub mod profile;
pub mod quad;
pub mod selftest;
pub mod spectral;
pub mod stats;
