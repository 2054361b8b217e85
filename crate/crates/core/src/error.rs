use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid vertex {0} (graph has {1} vertices)")]
    InvalidVertex(usize, usize),

    #[error("graph is disconnected: {components} components, sizes {sizes:?}")]
    Disconnected {
        components: usize,
        sizes: Vec<usize>,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bound search failed: {0}")]
    BoundSearch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
