use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Error, Debug)]
pub enum Error {
    #[error("domain must have at least {min} values, got {got}")]
    DomainTooSmall { min: usize, got: usize },

    #[error("relation tuple {tuple:?} does not match arity {arity} / domain size {domain_size}")]
    InvalidRelationTuple {
        tuple: Vec<usize>,
        arity: usize,
        domain_size: usize,
    },

    #[error("constraint scope {scope:?} references variable >= num_vars {num_vars}")]
    ScopeOutOfRange { scope: Vec<usize>, num_vars: usize },

    #[error("assignment has {got} values, instance has {want} variables")]
    AssignmentLength { got: usize, want: usize },

    #[error("assignment value {value} at variable {var} outside domain of size {domain_size}")]
    AssignmentValue {
        var: usize,
        value: usize,
        domain_size: usize,
    },

    #[error("total constraint weight is zero; cannot normalize")]
    ZeroTotalWeight,

    #[error("search space {space} exceeds brute-force cap {cap}")]
    BruteForceCapExceeded { space: f64, cap: f64 },

    #[error("operation table arity {got} too small; need at least {min}")]
    ArityTooSmall { min: usize, got: usize },

    #[error("domain size {got} exceeds cap {cap} for exhaustive search")]
    SearchCapExceeded { cap: usize, got: usize },

    #[error("language cannot corrupt constraint against the planted assignment; eps must be 0")]
    UncorruptibleLanguage,

    #[error("constraint arity {arity} unsupported here; binarize first")]
    ArityUnsupported { arity: usize },

    #[error("pattern concatenation: end label {end} != begin label {begin}")]
    PatternLabelMismatch { end: usize, begin: usize },

    #[error("pattern is not tree-shaped and too large for naive realization search")]
    PatternTooLarge,

    #[error("SDP solver did not converge: residual {residual} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("SDP constraint system is degenerate (Cholesky pivot {pivot})")]
    DegenerateConstraints { pivot: f64 },

    #[error("level sets violate structure at alpha={alpha}: {reason}")]
    AlphaTooLarge { alpha: f64, reason: String },

    #[error(
        "pipeline contract violation: survivor instance is unsatisfiable \
         ({survivor_constraints} constraints survived)"
    )]
    PipelineContractViolation { survivor_constraints: usize },

    #[error("relation is not preserved by the dual discriminator")]
    NotDualDiscriminatorClosed,

    #[error("variable {var} has {count} candidate values; SDP solution infeasible")]
    PartitionTooWide { var: usize, count: usize },

    #[error("zero vector for variable {var} value {value}; SDP solution degenerate")]
    DegenerateVector { var: usize, value: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
