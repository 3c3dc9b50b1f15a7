use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate metric")]
    DegenerateMetric,
    #[error("form not positive")]
    FormNotPositive,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("frame is not orthonormal (Gram defect {defect:.3e})")]
    NonOrthonormalFrame { defect: f64 },
    #[error("plane not associative (defect {defect:.3e})")]
    PlaneNotAssociative { defect: f64 },
    #[error("no convergence in {iterations} iterations (defect {defect:.3e})")]
    NoConvergence { iterations: usize, defect: f64 },
    #[error("matrix is not in g2 (residual {residual:.3e})")]
    NotInG2 { residual: f64 },
    #[error("internal error: numerical rank {found}, expected {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("tangent frame degenerates at site {site}")]
    FrameDegenerate { site: usize },
    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },
    #[error(
        "eigensolver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    EigenNoConvergence { iterations: usize, residual: f64 },
    #[error("not realizable: {0}")]
    NotRealizable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
