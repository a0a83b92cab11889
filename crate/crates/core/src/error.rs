use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bidder {bidder}: target must be positive, got {value}")]
    NonPositiveTarget { bidder: usize, value: f64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("item {item} contains random values and cannot be evaluated as a fixed-value auction")]
    NotDiscrete { item: usize },

    #[error("non-finite state at t = {time} (bidder {bidder})")]
    NonFinite {
        time: f64,
        bidder: usize,
        partial: Box<Trajectory>,
    },

    #[error("matrix is not numerically diagonalizable (eigenvector condition number {condition:.3e}); supply exact Jordan data instead")]
    IllConditioned { condition: f64 },

    #[error("embedding check failed: {0}")]
    Embedding(String),

    #[error("orbit does not fit the operating box: {0}")]
    OrbitFit(String),

    #[error("point is not an equilibrium (stationarity residual {residual:.3e})")]
    NotEquilibrium { residual: f64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
