use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("eigen decomposition failed (residual {residual:.3e})")]
    Convergence { residual: f64 },

    #[error("u_{i} and u_{j} are not distinct (gap {gap:.3e})")]
    Distinctness { i: usize, j: usize, gap: f64 },

    #[error("line at angle {psi} is not admissible for (u_{i}, u_{j}): |Re e^(i psi)(u_i - u_j)| = {margin:.3e}")]
    Admissibility { psi: f64, i: usize, j: usize, margin: f64 },

    #[error("resonant eigenvalues mu_{i}, mu_{j} (distance to nonzero integer {distance:.3e})")]
    Resonance { i: usize, j: usize, distance: f64 },

    #[error("degenerate spectrum (minimum eigenvalue gap {gap:.3e})")]
    DegenerateSpectrum { gap: f64 },

    #[error("pole: {0}")]
    Pole(String),

    #[error("evaluation routes disagree by {difference:.3e}")]
    Consistency { difference: f64 },

    #[error("path error: {0}")]
    Path(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("Stokes matrix is not triangular in either ordering (residual {residual:.3e}); try flipping the canonical order")]
    Ordering { residual: f64 },

    #[error("asymptotic expansion evaluated at |z| = {modulus:.3e} below the matching radius {radius:.3e}")]
    Validity { modulus: f64, radius: f64 },

    #[error("matrix is not unit upper triangular (residual {residual:.3e})")]
    NotUnitriangular { residual: f64 },
}

impl Error {
    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension(_)
            | Error::Index(_)
            | Error::NonFinite { .. }
            | Error::Invalid(_)
            | Error::Admissibility { .. }
            | Error::Validity { .. }
            | Error::NotUnitriangular { .. } => 2,
            Error::Convergence { .. }
            | Error::Consistency { .. }
            | Error::Path(_)
            | Error::Accuracy(_)
            | Error::Ordering { .. } => 3,
            Error::Singular { .. }
            | Error::Distinctness { .. }
            | Error::Resonance { .. }
            | Error::DegenerateSpectrum { .. }
            | Error::Pole(_) => 4,
        }
    }
}
