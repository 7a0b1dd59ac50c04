//! Projective-output quantum channels: construction, minimal output Rényi
//! entropies, additivity checks, weak-covariance capacities and
//! entanglement of formation.

pub mod additivity;
pub mod capacity;
pub mod channels;
pub mod entropy;
pub mod eof;
pub mod error;
pub mod linalg;
pub mod random;
pub mod report;
pub mod zoo;

pub use error::{Error, Result};
