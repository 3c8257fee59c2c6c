use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RhError {
    #[error("invalid order {0}: at least 2 points are required")]
    InvalidOrder(usize),

    #[error("degenerate scaling: alpha must be nonzero")]
    DegenerateScaling,

    #[error("degenerate Moebius map: ad - bc = 0")]
    DegenerateMap,

    #[error("ambiguous geometry: junctions at {a} and {b} are closer than 10*tol")]
    AmbiguousGeometry { a: Complex64, b: Complex64 },

    #[error("target {z} lies within {distance:e} of segment {segment}; use a boundary value")]
    NearSingularTarget {
        segment: usize,
        z: Complex64,
        distance: f64,
    },

    #[error("jump matrix is singular at segment {segment}, node {node} (|det| = {det:e})")]
    SingularJump {
        segment: usize,
        node: usize,
        det: f64,
    },

    #[error("collocation matrix is numerically singular (condition estimate {cond:e})")]
    SingularSystem { cond: f64 },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<RhError>,
    },

    #[error("conjugating solution is singular at stage {stage}, segment {segment}, node {node}")]
    SingularConjugator {
        stage: usize,
        segment: usize,
        node: usize,
    },

    #[error("jump does not decay below {eps:e} within radius {radius}")]
    TruncationFailure { eps: f64, radius: f64 },

    #[error("contour groups overlap (minimum distance {distance:e})")]
    OverlappingGroups { distance: f64 },

    #[error("LDU factorization is singular: 1 - s1*s3 = 0")]
    FactorizationSingular,

    #[error("point {0} lies on the branch cut [-1/2, 1/2]")]
    BranchCut(Complex64),

    #[error("product condition fails at junction {junction} (defect {defect:e})")]
    ProductDefect { junction: Complex64, defect: f64 },

    #[error("contour leaves the strip of analyticity |Im z| < {width}")]
    Analyticity { width: f64 },

    #[error("initial data does not decay: |u0| = {value:e} at the domain edge")]
    DomainTruncation { value: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, RhError>;

impl RhError {
    /// Stable short code for logs and per-row failure records.
    pub fn code(&self) -> &'static str {
        match self {
            RhError::InvalidOrder(_) => "invalid_order",
            RhError::DegenerateScaling => "degenerate_scaling",
            RhError::DegenerateMap => "degenerate_map",
            RhError::AmbiguousGeometry { .. } => "ambiguous_geometry",
            RhError::NearSingularTarget { .. } => "near_singular_target",
            RhError::SingularJump { .. } => "singular_jump",
            RhError::SingularSystem { .. } => "singular_system",
            RhError::Stage { source, .. } => source.code(),
            RhError::SingularConjugator { .. } => "singular_conjugator",
            RhError::TruncationFailure { .. } => "truncation_failure",
            RhError::OverlappingGroups { .. } => "overlapping_groups",
            RhError::FactorizationSingular => "factorization_singular",
            RhError::BranchCut(_) => "branch_cut",
            RhError::ProductDefect { .. } => "product_defect",
            RhError::Analyticity { .. } => "analyticity",
            RhError::DomainTruncation { .. } => "domain_truncation",
            RhError::Invalid(_) => "invalid_input",
        }
    }
}
