//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on a function argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two grids/rasters that must share a shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A spectrum handed to an inverse transform is not conjugate-symmetric,
    /// i.e. it cannot be the transform of a real image.
    #[error("spectrum is not Hermitian-symmetric (max asymmetry {max_asym:e}, tolerance {tol:e})")]
    NonHermitian { max_asym: f64, tol: f64 },

    /// A norm ratio has a vanishing denominator: the cone misses the image
    /// entirely. Callers must handle this case, it is not an infinity.
    #[error("degenerate denominator in {context}: {value:e} below 1e-14")]
    DegenerateDenominator { context: &'static str, value: f64 },

    /// Gradient-descent step size exceeds the stability bound.
    #[error("step size {lr:e} exceeds gradient-descent stability bound 1/{gram_eig:e} = {bound:e}")]
    StepSize { lr: f64, gram_eig: f64, bound: f64 },

    /// Training loss increased on two consecutive steps.
    #[error(
        "training diverged at step {step} (loss increased twice in a row); \
         step-size bound from the feature Gram eigenvalue is {bound:e}"
    )]
    Divergence { step: usize, bound: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file does not conform to the CLF1 raster format or its JSON sidecar.
    #[error("format error: {0}")]
    Format(String),
}
