use thiserror::Error;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix J_st + J is singular at the requested point")]
    SingularMatrix,
    #[error("structure is not normalized at the base point (|J - J_st| = {deviation:.3e})")]
    NotNormalized { deviation: f64 },
    #[error("finite-difference estimates disagree between step sizes (relative gap {relative_gap:.3e})")]
    StepTooLarge { relative_gap: f64 },
    #[error("local disc construction failed: {0}")]
    DiscSolveFailed(String),
    #[error("field evaluated outside its domain: {0}")]
    DomainError(String),
    #[error("field is under-resolved on the grid: {0}")]
    Underresolved(String),
    #[error("boundary data is not real-valued")]
    NotReal,
    #[error("boundary function vanishes on the circle (min modulus {min_modulus:.3e})")]
    ZeroOnCircle { min_modulus: f64 },
    #[error("canonical function requires index 0, got {0}")]
    NonzeroIndex(i64),
    #[error("negative index {0} is not supported")]
    NegativeIndexUnsupported(i64),
    #[error("fixed-point iteration did not contract after {iterations} sweeps (last change {last_change:.3e})")]
    NoContraction { iterations: usize, last_change: f64 },
    #[error("normalization Im w(1) = 0 cannot be imposed (homogeneous direction is real at 1)")]
    NormalizationDegenerate,
    #[error("residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("gamma must be non-negative, got {0}")]
    NegativeGamma(f64),
    #[error("point is parabolic (gamma = 1), rejected")]
    ParabolicPoint,
    #[error("coordinates are not adapted: {0}")]
    AdaptationFailure(String),
    #[error("Theodorsen iteration diverged (last change {last_change:.3e})")]
    TheodorsenDiverged { last_change: f64 },
    #[error("Gauss-Newton stalled at iteration {iteration} (residual {residual:.3e})")]
    NewtonStalled { iteration: usize, residual: f64 },
    #[error("winding number of the iterate changed to {mu}")]
    WindingChanged { mu: i64 },
    #[error("Gauss-Newton hit the iteration cap (residual {residual:.3e})")]
    MaxIterations { residual: f64 },
    #[error("point is within the trim radius of a complex point")]
    ComplexPointProximity,
    #[error("leaf integration stalled at arclength {arclength:.6}")]
    LeafStalled { arclength: f64 },
    #[error("characteristic leaf re-entered its own tube at arclength {arclength:.6}")]
    ClosedLeafDetected { arclength: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("projected tangent frame degenerates along the boundary")]
    FrameDegenerate,
    #[error("gradient blow-up: max |df| = {max_grad:.3e} at t = {t:.6}")]
    BlowUp { max_grad: f64, t: f64 },
    #[error("continuation step underflow at t = {t:.6}")]
    StepUnderflow { t: f64 },
    #[error("no matching disc in the opposite family (best distance {distance:.3e}, tolerance {tolerance:.3e})")]
    NoMatch { distance: f64, tolerance: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
