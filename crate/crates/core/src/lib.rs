//! Ensemble clustering with similarity- and dissimilarity-guided
//! co-association matrices.

pub mod basegen;
pub mod ca;
pub mod consensus;
pub mod dataset;
pub mod dissimilarity;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod pool;
pub mod seed;
pub mod solver;

pub use error::{Error, Result};
