use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("stencil at point {index} ({x:.6}, {y:.6}) is not unisolvent: {reason}")]
    Unisolvent { index: usize, x: f64, y: f64, reason: String },

    #[error("quadrature did not converge (achieved {achieved:.3e}, wanted {wanted:.3e})")]
    Quadrature { achieved: f64, wanted: f64 },

    #[error("matrix is numerically singular at pivot {pivot} (|a| = {value:.3e})")]
    Singular { pivot: usize, value: f64 },

    #[error("solve residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("kernel: {0}")]
    Kernel(String),

    #[error("dense limit exceeded: {dofs} unknowns > {limit}; use a coarser grid and scale beta")]
    DenseLimit { dofs: usize, limit: usize },

    #[error("solver step {stage}: {source}")]
    Step {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
