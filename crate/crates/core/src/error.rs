use thiserror::Error;

/// Errors raised while reading or constructing problem instances.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: missing mandatory keyword {keyword}")]
    MissingKeyword { keyword: &'static str, line: usize },
    #[error("line {line}: unsupported EDGE_WEIGHT_TYPE `{found}` (only EUC_2D is supported)")]
    UnsupportedWeightType { found: String, line: usize },
    #[error("line {line}: DIMENSION is {expected} but {section} holds {got} entries")]
    DimensionMismatch {
        section: &'static str,
        expected: usize,
        got: usize,
        line: usize,
    },
    #[error("line {line}: node {node} has demand {demand} exceeding capacity {capacity}")]
    DemandExceedsCapacity {
        node: usize,
        demand: f64,
        capacity: f64,
        line: usize,
    },
    #[error("line {line}: {message}")]
    Malformed { message: String, line: usize },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Contract violations of a route plan against an instance.
#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("customer {0} is visited {1} times (expected exactly once)")]
    CoverageViolation(usize, usize),
    #[error("route {route} carries load {load} exceeding capacity {capacity}")]
    CapacityViolation {
        route: usize,
        load: f64,
        capacity: f64,
    },
    #[error("route {0} is empty")]
    EmptyRoute(usize),
    #[error("route {route} references node {node} outside the instance")]
    UnknownNode { route: usize, node: usize },
    #[error("route {route} visits the depot")]
    DepotInRoute { route: usize },
    #[error("move is stale for this plan: {0}")]
    StaleMove(String),
}

/// Errors from correlation-matrix construction and comparison.
#[derive(Debug, Error, PartialEq)]
pub enum LocError {
    #[error("trap matrix is empty")]
    EmptyTrapMatrix,
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("matrix CSV line {line}: {message}")]
    Csv { message: String, line: usize },
}
