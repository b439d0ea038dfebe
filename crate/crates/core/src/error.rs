use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected} grid points, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("mode {k} is not in N_K for K = {grid}")]
    ModeOutOfRange { k: i64, grid: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("momentum condition violated by tuple {tuple} (momentum {momentum} mod {grid} != 0)")]
    Momentum {
        tuple: String,
        momentum: i64,
        grid: usize,
    },

    #[error("polynomial value is not real: |Im| = {imag:e} against scale {scale:e}")]
    Reality { imag: f64, scale: f64 },

    #[error("state became non-finite or exceeded the blow-up threshold at step {step}")]
    BlowUp { step: usize },

    #[error("adaptive integrator failed to converge: {0}")]
    NonConvergence(String),

    #[error("series did not converge after {terms} terms (grade {grade}, relative increment {increment:e})")]
    SeriesDivergence {
        terms: usize,
        grade: usize,
        increment: f64,
    },

    #[error("resonant time step: |phi(i h Omega)| = {modulus:e} for tuple {tuple}")]
    ResonantStep { tuple: String, modulus: f64 },

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("CFL condition violated: (r+2) h omega_(K/2) = {lhs} > 2 pi - delta = {rhs}")]
    Cfl { lhs: f64, rhs: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Parameter(_) | Error::Cfl { .. } => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}
