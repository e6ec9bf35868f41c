use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty instance")]
    EmptyInstance,
    #[error("empty budget")]
    EmptyBudget,
    #[error("empty gated set")]
    EmptyGatedSet,
    #[error("degenerate K: no ball of radius {0} disconnects the graph")]
    DegenerateK(u32),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),
    #[error("self-loop at {0}")]
    SelfLoop(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("point {0} is not in the ground set")]
    NotInGround(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("inclusion violated: {0}")]
    InclusionViolated(String),
    #[error("map is not a ({lambda})-quasiisometry: pair ({a}, {b}) has source distance {source_dist} and image distance {image_dist}")]
    NotQuasiIsometry {
        lambda: u32,
        a: usize,
        b: usize,
        source_dist: u32,
        image_dist: u32,
    },
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
