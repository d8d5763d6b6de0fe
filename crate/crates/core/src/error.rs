use std::io;

use crate::stepping::LinearSolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid {nx}x{ny} is too small: need at least {min} cells per axis")]
    GridTooSmall { nx: usize, ny: usize, min: usize },

    #[error("field has {got} values, grid expects {expected}")]
    FieldSize { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error(
        "linear solve did not reach tolerance {:e} after {} iterations (residual {:e})",
        .0.tolerance, .0.iterations, .0.residual
    )]
    LinearSolve(LinearSolveReport),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
