use crate::rhs::Field;

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("capacity exceeded: n_qubits = {0} > 24")]
    Capacity(u32),

    #[error("mode overflow: 2M+1 = {modes} exceeds N = {points}")]
    ModeOverflow { modes: usize, points: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("missing field {0:?}")]
    MissingField(Field),

    #[error("nonlinear (diagonal) term not supported by the Crank-Nicolson cost function")]
    UnsupportedNonlinearity,

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("non-finite values at t = {time}: {detail}")]
    Instability { time: f64, detail: String },

    #[error("degenerate state: non-finite norm in sampled product")]
    DegenerateState,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cost function returned a non-finite value after {evals} evaluations")]
    NonFiniteCost { evals: u64 },

    #[error("resolution hierarchy misaligned: {0}")]
    Alignment(String),
}

pub type Result<T> = std::result::Result<T, Error>;
