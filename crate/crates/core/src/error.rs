//! Error type shared across the crate.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: usize, v: usize },

    #[error("non-positive weight {weight} on edge {{{u}, {v}}}")]
    NonPositiveWeight { u: usize, v: usize, weight: f64 },

    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    DisconnectedGraph(usize),

    #[error("vertex index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("graph has a single vertex, no pairwise distances exist")]
    SingletonGraph,

    #[error("supplied metric is not symmetric at ({x}, {y})")]
    MetricNotSymmetric { x: usize, y: usize },

    #[error("supplied metric is not zero exactly on the diagonal at vertex {0}")]
    MetricDiagonalViolation(usize),

    #[error(
        "metric distance {value} between distinct vertices {x} and {y} is not strictly positive"
    )]
    MetricNotPositive { x: usize, y: usize, value: f64 },

    #[error("triangle inequality fails for vertices ({x}, {y}, {z})")]
    TriangleInequalityViolation { x: usize, y: usize, z: usize },

    #[error("supplied metric is not geodesic: d({x}, {y}) exceeds the shortest path over edges")]
    MetricNotGeodesic { x: usize, y: usize },

    #[error("weight-compatibility sum {sum} exceeds 1 at vertex {vertex}")]
    CompatibilityExceeded { vertex: usize, sum: f64 },

    #[error("eigensolver failed to converge")]
    EigensolverFailure,

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("support set is empty")]
    EmptySupport,

    #[error("support vertex {0} appears more than once")]
    DuplicateSupportVertex(usize),

    #[error("restricted heat operator is numerically singular")]
    NumericallySingular,

    #[error("non-positive distance {0}")]
    NonPositiveDistance(f64),

    #[error("non-positive time {0}")]
    NonPositiveTime(f64),

    #[error("invertibility condition violated, the inverse norm bound is undefined")]
    ConditionViolated,

    #[error("sign pattern entry {value} at position {index} is not +1 or -1")]
    InvalidSign { index: usize, value: f64 },

    #[error("observation time {observation} does not match heat operator time {operator}")]
    TimeMismatch { observation: f64, operator: f64 },

    #[error("problem too large for brute force: n = {n} (max {max_n}), support {support} (max {max_support})")]
    TooLarge {
        n: usize,
        max_n: usize,
        support: usize,
        max_support: usize,
    },

    #[error("graph generation failed: {0}")]
    GenerationFailed(String),

    #[error("invalid experiment config: {0}")]
    ConfigInvalid(String),

    #[error("graph file, line {line}: {msg}")]
    GraphFileParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
