use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid triangulation: {0}")]
    Triangulation(String),
    #[error("edge {0} cannot be flipped: both of its sides lie in one face")]
    NotFlippable(usize),
    #[error("edge index {edge} out of range for {zeta} edges")]
    EdgeOutOfRange { edge: usize, zeta: usize },
    #[error("not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("edge vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("edge vector has a negative entry")]
    Negative,
    #[error("vector is not a multicurve")]
    NotMulticurve,
    #[error("invalid corner choice: {0}")]
    CornerChoice(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator table: {0}")]
    Table(String),
    #[error("path does not close up: its end triangulation differs from its start")]
    NotClosed,
    #[error("cone is infeasible")]
    InfeasibleCone,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
