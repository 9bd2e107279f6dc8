use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input violated a documented precondition (Hermiticity, unitarity, dimensions).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Requested object would exceed the configured size limit.
    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("eigensolver did not converge: {0}")]
    Numeric(String),

    /// The Hamiltonian mixes magnetization sectors.
    #[error("operator does not conserve total S_z: max |[H, S_z]| = {0:e}")]
    SymmetryViolation(f64),

    /// The two lowest eigenvalues are too close for a unique ground state.
    #[error("degenerate ground state: E0 = {e0}, E1 = {e1}")]
    DegenerateGroundState { e0: f64, e1: f64 },

    /// Post-selection on a measurement branch that has (numerically) zero weight.
    #[error("measurement branch has zero probability ({0:e})")]
    ZeroProbability(f64),

    /// No time point in a scan produced a defined figure of merit.
    #[error("protocol failed: {0}")]
    ProtocolFailure(String),
}

impl Error {
    /// Short machine-readable tag, used as the `status` column in result tables.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument_error",
            Error::Contract(_) => "contract_violation",
            Error::Capacity { .. } => "capacity_error",
            Error::Numeric(_) => "numeric_error",
            Error::SymmetryViolation(_) => "symmetry_violation",
            Error::DegenerateGroundState { .. } => "degenerate_ground_state",
            Error::ZeroProbability(_) => "zero_probability",
            Error::ProtocolFailure(_) => "protocol_failure",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
