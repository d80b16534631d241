use std::path::PathBuf;

use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("node iteration did not converge: {0}")]
    Convergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient history: step {n} needs at least {needed} accepted values")]
    InsufficientHistory { n: usize, needed: usize },

    #[error("interpolation nodes are not distinct")]
    DuplicateNodes,

    #[error("requested accuracy {tol:e} unreachable for alpha = {alpha}, z = {z}")]
    AccuracyUnreachable { alpha: f64, z: f64, tol: f64 },

    #[error("solution diverged at t = {t}")]
    Diverged { t: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed report: {msg}")]
    Format { path: PathBuf, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
