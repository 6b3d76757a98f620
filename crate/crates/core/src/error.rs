use thiserror::Error;

/// Errors raised by curve construction, level solves, and material-law evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve coefficient must be positive, got {0}")]
    NonPositiveCoefficient(f64),
    #[error("B-H samples are not strictly monotone between h={h0} and h={h1}")]
    NonMonotoneData { h0: f64, h1: f64 },
    #[error("first B-H sample must be (0, 0), got ({h}, {b})")]
    MissingOrigin { h: f64, b: f64 },
    #[error("at least {required} samples required, got {got}")]
    TooFewSamples { required: usize, got: usize },
    #[error("energy level must be non-negative, got {0}")]
    NegativeEnergy(f64),
    #[error("level must be positive, got {0}")]
    NonPositiveLevel(f64),
    #[error("invalid exponent rule: {0}")]
    InvalidExponent(String),
    #[error("point has non-finite components ({0}, {1})")]
    NonFinitePoint(f64, f64),
    #[error("residual never changed sign while searching for a bracket")]
    NoBracket,
    #[error("solver did not converge within {0} iterations")]
    MaxIterExceeded(usize),
    #[error("exponent {0} is below 1; the level function is not differentiable")]
    ExponentTooSmall(f64),
    #[error("discriminant {0} is not positive")]
    DegenerateDiscriminant(f64),
    #[error("second derivatives are singular on the principal axes (exponent {exponent} < 2)")]
    AxisSingularity { exponent: f64 },
    #[error("second derivatives are undefined at the origin")]
    OriginSingularity,
    #[error("exponent {0} has no conjugate (must exceed 1)")]
    ExponentNotConjugable(f64),
    #[error("inverse axis functions are not proportional (relative deviation {0:e})")]
    ProportionalityViolated(f64),
    #[error("supremum attained on the grid boundary; enlarge the grid")]
    ArgmaxOnBoundary,
    #[error("Newton inversion of the material law diverged at angle {angle}")]
    NewtonDiverged { angle: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
