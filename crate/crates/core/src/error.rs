use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Bell index {0} out of range (expected 1..=4)")]
    BellIndex(usize),

    #[error("{what} = {value:?} lies outside [{lo:?}, {hi:?}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("Bloch vector norm {0} exceeds 1")]
    Unphysical(f64),

    #[error("input state must be pure, got norm {0}")]
    NotPure(f64),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not orthogonal (deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("rotation must have determinant +1, got {0}")]
    ImproperRotation(f64),

    #[error("density matrix has trace {0}")]
    Trace(f64),

    #[error("two-qubit state is not positive (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("length mismatch: {0} POVM elements but {1} preparations")]
    LengthMismatch(usize, usize),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("Jacobi iteration did not converge in {0} sweeps")]
    EigenNotConverged(usize),

    #[error("quadrature did not converge up to order {order} (last change {change:e})")]
    QuadratureNotConverged { order: usize, change: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("strategy rule {rule} cannot be used with resource {family}")]
    StrategyMismatch { rule: String, family: String },

    #[error("at least two measures are required, got {0}")]
    TooFewMeasures(usize),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("sample count must be at least 1")]
    NoSamples,
}

pub(crate) fn check_range(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite(what));
    }
    if value < lo || value > hi {
        return Err(Error::OutOfRange {
            what,
            value,
            lo,
            hi,
        });
    }
    Ok(value)
}
