use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not diagonalizable: {reason}")]
    NotDiagonalizable { reason: String },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vertex enumeration of a {dim}-dimensional box exceeds the cap of {cap} vertices")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("quadratic form is not convex (smallest eigenvalue {min_eigenvalue:e})")]
    NotConvexForm { min_eigenvalue: f64 },

    #[error("vertex list is empty")]
    EmptyVertexList,

    #[error("constraint set is infeasible or has empty interior")]
    Infeasible,

    #[error("objective is not concave")]
    NotConcave,

    #[error("K^diag needs a positive term, got {0}")]
    NonPositiveNu(f64),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("I - A is numerically singular (condition {condition:e})")]
    SingularShift { condition: f64 },

    #[error("system is not convergent (spectral radius {rho})")]
    NotConvergent { rho: f64 },

    #[error("unsupported objective: {0}")]
    UnsupportedObjective(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),

    #[error("instance generation exhausted after {0} rejections")]
    GenerationExhausted(usize),

    #[error("QP solver did not converge: {0}")]
    QpNotConverged(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used by the command line for machine-readable errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonSquare { .. } => "NonSquare",
            Error::NotDiagonalizable { .. } => "NotDiagonalizable",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::Singular => "Singular",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::NotConvexForm { .. } => "NotConvexForm",
            Error::EmptyVertexList => "EmptyVertexList",
            Error::Infeasible => "Infeasible",
            Error::NotConcave => "NotConcave",
            Error::NonPositiveNu(_) => "NonPositiveNu",
            Error::AssumptionViolated(_) => "AssumptionViolated",
            Error::SingularShift { .. } => "SingularShift",
            Error::NotConvergent { .. } => "NotConvergent",
            Error::UnsupportedObjective(_) => "UnsupportedObjective",
            Error::InvalidPolytope(_) => "InvalidPolytope",
            Error::InvalidInstance(_) => "InvalidInstance",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::GenerationExhausted(_) => "GenerationExhausted",
            Error::QpNotConverged(_) => "QpNotConverged",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
