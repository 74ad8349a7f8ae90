use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field shape {got:?} does not match grid shape {expected:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("stale item: step {got} is not newer than step {newest}")]
    Stale { newest: u64, got: u64 },

    #[error("empty field")]
    EmptyField,

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("query support exceeds grid on axis {axis}: margin {margin} < half-width {half_width}")]
    Margin {
        axis: usize,
        margin: usize,
        half_width: usize,
    },

    #[error("not ready: {have} of {need} slices buffered")]
    NotReady { have: usize, need: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("simulation diverged at step {step}: max |u| = {max_abs:e}")]
    SimulationDiverged { step: u64, max_abs: f64 },

    #[error("unstable time step: {0}")]
    Unstable(String),

    #[error("library/problem mismatch: {0}")]
    LibraryMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
