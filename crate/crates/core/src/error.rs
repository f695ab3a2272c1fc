use thiserror::Error;

/// Errors raised by the geometric, flow and spinor routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("curvature scale mismatch: {left} vs {right}")]
    CurvatureMismatch { left: f64, right: f64 },

    #[error("point is not on the hyperboloid (residual {residual:e})")]
    NotOnHyperboloid { residual: f64 },

    #[error("ball point has norm {norm} >= 1")]
    OutsideBall { norm: f64 },

    #[error("arccosh argument {value} is below 1")]
    ArccoshDomain { value: f64 },

    #[error("normal-flow precondition violated: {0}")]
    NormalFrame(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate induced metric at node {node} (condition number {condition:e})")]
    DegenerateMetric { node: usize, condition: f64 },

    #[error("mean curvature must be positive; found {value} at node {node}")]
    NonPositiveMeanCurvature { node: usize, value: f64 },

    #[error("vector is not null (<z,z> = {residual:e})")]
    NotNull { residual: f64 },

    #[error("flow breakdown at rho = {rho}: u = {value} at node {node}")]
    FlowBreakdown { rho: f64, node: usize, value: f64 },

    #[error("flow diverged at rho = {rho}")]
    Divergence { rho: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
