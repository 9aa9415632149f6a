//! Spectral density functions of free ℤ^n chain complexes, computed through
//! Fourier symbols on the n-torus.

pub mod complex;
pub mod density;

pub use complex::AbelianCWComplex;
pub use density::{estimate_density, estimate_ns, DensityEstimate, NsEstimate};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("degree {degree}: {detail}")]
    Shape { degree: usize, detail: String },
    #[error("not a chain complex: c_{} ∘ c_{degree} has nonzero coefficient at z^{monomial:?}", degree - 1)]
    NotAComplex { degree: usize, monomial: Vec<i64> },
    #[error("degree {degree} out of range, top degree is {top}")]
    DegreeOutOfRange { degree: usize, top: usize },
    #[error("grid must be nonempty, nonnegative and strictly increasing")]
    InvalidGrid,
    #[error("samples must be at least 1")]
    InvalidSamples,
    #[error(
        "window too small: {usable} usable points, need {needed} (excess floor {floor:e}, window {lambda_range:?})"
    )]
    WindowTooSmall { usable: usize, needed: usize, floor: f64, lambda_range: Option<(f64, f64)> },
    #[error("malformed complex: {0}")]
    Json(String),
}
