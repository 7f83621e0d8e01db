use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
    #[error("invalid problem: {0}")]
    InvalidInput(String),
    #[error("data matrix has numeric rank {rank} < {n}; use the rank-deficient solver")]
    RankDeficient { rank: usize, n: usize },
    #[error("no positive definite solution: consistency residual {f_norm:e} ≥ δ = {delta:e}")]
    NoSolution { f_norm: f64, delta: f64 },
    #[error("empty {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
