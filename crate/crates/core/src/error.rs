use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{count} is not integral: {detail}")]
    Integrality { count: &'static str, detail: String },

    #[error("invalid group spec: {0}")]
    InvalidGroup(String),

    #[error("degree mismatch: design has {design} points, group acts on {group}")]
    DegreeMismatch { design: usize, group: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("unsupported plane order {0}")]
    UnsupportedOrder(u64),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("corrupt bundled data: {0}")]
    CorruptData(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
