use thiserror::Error;

/// Errors raised by the solver and its building blocks.
///
/// Terminal outcomes of a run (line search failure, iteration budget, ...)
/// are not errors; they are reported through [`crate::TerminationStatus`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GsError {
    #[error("parameter out of range: {name} ({constraint})")]
    ParameterOutOfRange {
        name: &'static str,
        constraint: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective returned a non-finite value {value} at {point:?}")]
    NonFiniteObjective { value: f64, point: Vec<f64> },

    #[error("gradient has non-finite components at {point:?}")]
    NonFiniteGradient { point: Vec<f64> },

    #[error("starting point {point:?} is not in the smooth set of the objective")]
    StartNotSmooth { point: Vec<f64> },

    #[error("min-norm iteration failed to certify after {iterations} iterations")]
    NumericalStall { iterations: usize },

    #[error("sample point {point:?} is outside the smooth set")]
    SampleOutsideDomain { point: Vec<f64> },

    #[error("empty vertex set")]
    EmptyPolytope,
}

pub type Result<T> = std::result::Result<T, GsError>;
