use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("matrix is not a contraction (spectral norm {0})")]
    NotContraction(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("map is not completely positive (Choi eigenvalue {0:.3e})")]
    NotCP(f64),
    #[error("map is not trace preserving (slack {0:.3e})")]
    NotTP(f64),
    #[error("leading Kraus operator is degenerate (w1 - w2 = {0:.3e})")]
    DegenerateLeading(f64),
    #[error("operator has zero norm")]
    ZeroOperator,
    #[error("target is not unitary (deviation {0:.3e})")]
    TargetNotUnitary(f64),
    #[error("phase of the unitary factor is undefined (|tr V| = {0:.3e})")]
    PhaseUndefined(f64),
    #[error("channel is catastrophic: {0}")]
    NotNonCatastrophic(String),
    #[error("channel is not decoherent: {0}")]
    NotDecoherent(String),
    #[error("ratio {0} outside (1/2, 1]")]
    RatioOutOfRange(f64),
    #[error("Lindblad operator {0} is not traceless")]
    NotTraceless(usize),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
