use thiserror::Error;

/// Errors raised anywhere in the core crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("eigenvalue {value:.3e} is below the clamp threshold {threshold:.3e}")]
    SignificantlyNegativeEigenvalue { value: f64, threshold: f64 },
    #[error("ambient dimensions differ: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("subspace is not contained in the enclosing subspace (gap {gap:.3e})")]
    NotContained { gap: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),
    #[error("Fock space with {dim} basis vectors exceeds the limit of {limit}")]
    FockTooLarge { dim: usize, limit: usize },
    #[error("not a row contraction: largest eigenvalue of sum T_i T_i^* is {largest:.12}")]
    NotARowContraction { largest: f64 },
    #[error("coefficient for word {word} leaves the defect space (residual {residual:.3e})")]
    CompressionResidualExceeded { word: String, residual: f64 },
    #[error("evaluation point is not strictly inside the unit ball (row norm {norm:.12})")]
    NotStrictlyInsideBall { norm: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("characteristic function is not a polynomial")]
    NotPolynomial,
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("tuple is not row-isometric on the given subspace (defect {defect:.3e})")]
    NotAnIsometry { defect: f64 },
    #[error("subspace is not invariant under the tuple (leak {leak:.3e})")]
    NotInvariant { leak: f64 },
    #[error("model couplings must be zero for the structural prediction")]
    CouplingsNotZero,
    #[error("point is not inside the open unit ball (norm {norm:.15})")]
    OutsideBall { norm: f64 },
    #[error("resolvent I - sum conj(lambda_i) X_i is nearly singular (smallest singular value {sigma:.3e})")]
    NearSingularResolvent { sigma: f64 },
    #[error("defect of the boundary tuple is not rank one (secondary singular value {secondary:.3e})")]
    DefectNotRankOne { secondary: f64 },
    #[error("linear algebra kernel failed: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors that report a failed certificate rather than bad input.
    pub fn is_certification(&self) -> bool {
        matches!(
            self,
            Error::CertificationFailed(_)
                | Error::CompressionResidualExceeded { .. }
                | Error::DefectNotRankOne { .. }
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
