use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Positions and magnitudes are reported as `f64` regardless of the scalar
/// type used for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]: require finite a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("grid nodes must be finite and strictly increasing (violated at index {index})")]
    NodesNotIncreasing { index: usize },

    #[error("anchor x0 = {x0} is not a grid node")]
    AnchorOffGrid { x0: f64 },

    #[error("anchor index {index} out of range for {len} nodes")]
    AnchorIndex { index: usize, len: usize },

    #[error("configuration error: {what} needs at least {needed} nodes, grid has {got}")]
    TooFewNodes {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("sampling produced a non-finite value at node {index} (x = {x})")]
    NonFiniteSample { index: usize, x: f64 },

    #[error("point x = {x} lies outside [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("value length {got} does not match node count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("seed vanishes at node {index} (x = {x}, |f| = {modulus:e})")]
    SeedDegenerate { index: usize, x: f64, modulus: f64 },

    #[error("order {requested} exceeds the available order {available}")]
    OrderOutOfRange { requested: usize, available: usize },

    #[error("truncation of {terms} terms needs order {needed}, family has order {available}")]
    TruncationExceedsOrder {
        terms: usize,
        needed: usize,
        available: usize,
    },

    #[error("truncation must retain at least one term")]
    EmptyTruncation,

    #[error("jets are anchored at different points ({left} vs {right})")]
    AnchorMismatch { left: f64, right: f64 },

    #[error("jet has (near-)zero leading coefficient {modulus:e}; cannot invert")]
    ZeroLeadingCoefficient { modulus: f64 },

    #[error("cannot differentiate a jet of order 0")]
    OrderUnderflow,

    #[error("jet of order {got} is too short; order {needed} is required")]
    OrderBudget { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("least-squares system lost rank at column {column}")]
    RankCollapse { column: usize },

    #[error("degenerate boundary condition: coefficients ({0}, {1}) both vanish")]
    DegenerateBoundary(&'static str, &'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Invariant(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
