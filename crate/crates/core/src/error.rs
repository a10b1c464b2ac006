use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("invalid point: {0}")]
    Point(String),
    #[error("malformed map: {0}")]
    Map(String),
    #[error("maps are defined on different graphs")]
    DomainMismatch,
    #[error("not a homeomorphism: {0}")]
    NotHomeomorphism(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("rational arithmetic overflow")]
    Overflow,
    #[error("invalid protocol: {0}")]
    Protocol(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown system: {0}")]
    UnknownSystem(String),
}

impl Error {
    /// Resource exhaustion (piece caps, sample budgets, rational overflow).
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_) | Error::Overflow)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
