use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{0}` as a number (expected p/q, integer or decimal)")]
pub struct ParseScalarError(pub String);

#[derive(Debug, Error)]
pub enum Error {
    #[error("operands belong to different groups: {0} and {1}")]
    MixedGroups(String, String),

    #[error("element {element} is not in the ball of radius {radius}")]
    RadiusExceeded { element: String, radius: u32 },

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("the empty set has no boundary ratio")]
    EmptySet,

    #[error("window too small: outer boundary point {0} lies outside the window")]
    WindowTooSmall(String),

    #[error("unsupported group for this operation: {0}")]
    UnsupportedGroup(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("invalid graphing: {0}")]
    InvalidGraphing(String),

    #[error("weights sum to {0}, expected exactly 1")]
    Normalization(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("measure is not stationary: vertex {vertex} has mass {mass} but the averaged pushforward gives {averaged}")]
    NotStationary {
        vertex: usize,
        mass: String,
        averaged: String,
    },

    #[error("radius {requested} exceeds the free window {window} of the graphing")]
    BeyondFreeWindow { requested: usize, window: usize },

    #[error("generating set S2 is not contained in any power S1^k with k <= {0}")]
    NotContained(u32),

    #[error("towers cover {achieved}, short of the required {required}")]
    CoverageShortfall { achieved: String, required: String },

    #[error(transparent)]
    Scalar(#[from] ParseScalarError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
