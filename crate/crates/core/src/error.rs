use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("region mismatch: {0}")]
    RegionMismatch(String),
    #[error("solvability defect {defect:e} exceeds tolerance {tol:e}{}", order.map(|m| format!(" at order {m}")).unwrap_or_default())]
    Solvability { defect: f64, tol: f64, order: Option<usize> },
    #[error("parity violation {defect:e} at order {order}")]
    Parity { defect: f64, order: usize },
    #[error("linear solver stalled after {iterations} iterations, relative residual {residual:e}")]
    Solver { iterations: usize, residual: f64 },
    #[error("eigensolver did not converge in {iterations} iterations")]
    Eigen { iterations: usize },
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("certification failed: binding constraint {binding} = {value:.4} at J = {j:e}")]
    Certification { binding: String, value: f64, j: f64 },
    #[error("eta = {eta} outside certified radius R = {radius}")]
    OutsideCertificate { eta: f64, radius: f64 },
    #[error("configuration: {0}")]
    Config(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors caused by the caller's input rather than by a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Geometry(_) | Error::Domain(_) | Error::UnsupportedShape(_) | Error::OutsideCertificate { .. }
        )
    }
}
