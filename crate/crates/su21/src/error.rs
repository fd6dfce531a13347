use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero vector is not a projective point")]
    ZeroVector,
    #[error("isotropic point")]
    IsotropicPoint,
    #[error("points coincide projectively")]
    CoincidentPoints,
    #[error("point does not lie on the line")]
    PointNotOnLine,
    #[error("orthogonal point in the line is isotropic")]
    DegenerateOrthogonal,
    #[error("unrealizable data: {0}")]
    Unrealizable(String),
    #[error("center is isotropic")]
    IsotropicCenter,
    #[error("parameter is a cube root of unity or not unit modulus")]
    InvalidParameter,
    #[error("matrix is not in SU(2,1): {0}")]
    NotUnitary(String),
    #[error("matrix does not preserve the form up to a positive scalar")]
    NotFormPreserving,
    #[error("classification numerically ambiguous: {0}")]
    NumericallyAmbiguous(String),
    #[error("isometry is not elliptic or ellipto-parabolic")]
    NotElliptic,
    #[error("isometries are not conjugate")]
    NotConjugate,
    #[error("ill-conditioned conjugation (residual {0:e})")]
    IllConditioned(f64),
    #[error("point outside the triangle")]
    OutOfTriangle,
    #[error("trace outside the deltoid")]
    OutsideDeltoid,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("transition parameter: {0}")]
    TransitionParameter(String),
    #[error("sample lies on a wall")]
    OnWall,
    #[error("no solution within search bounds (B = {bound})")]
    NoSolution { bound: f64 },
    #[error("not decomposable")]
    NotDecomposable,
    #[error("decomposability unknown: {0}")]
    Unknown(String),
    #[error("search exhausted after {samples} samples: {detail}")]
    SearchExhausted { samples: usize, detail: String },
    #[error("conjugation failed: {0}")]
    ConjugationFailed(String),
    #[error("line is not hyperbolic")]
    NotHyperbolicLine,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
