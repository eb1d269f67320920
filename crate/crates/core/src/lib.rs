//! Exact unicast capacity of layered linear deterministic relay networks.
//!
//! The solver ([`solver::capacity`]) grows a set of linearly independent
//! source-to-destination paths one iteration at a time, using forward moves,
//! same-layer rewirings and backward rewirings over alternating paths. The
//! [`oracle`] module provides exponential-time ground truth for small
//! networks by enumerating every cut.

pub mod builder;
pub mod field;
pub mod format;
pub mod linalg;
pub mod network;
pub mod oracle;
pub mod solver;

pub use field::Field;
pub use format::{EdgeRef, NetworkFile, ResultFile};
pub use linalg::FMatrix;
pub use network::{Cut, LayeredNetwork};
pub use solver::{capacity, SolverConfig};

use thiserror::Error;

/// Top-level error for loading and running.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Network(#[from] network::NetworkError),
    #[error(transparent)]
    Build(#[from] builder::BuildError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
}
