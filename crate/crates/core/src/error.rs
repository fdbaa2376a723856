use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("non-planar input: {0}")]
    NonPlanar(String),
    #[error("edge {0} is a loop")]
    Loop(usize),
    #[error("vertex {0} has degree one")]
    DegreeOne(usize),
    #[error("cycle rank {rank} exceeds the enumeration cap {cap}")]
    CapExceeded { rank: usize, cap: usize },
    #[error("defect set has odd cardinality")]
    OddDefects,
    #[error("spinor: {0}")]
    Spinor(String),
    #[error("increments do not close around face {face} (mismatch {mismatch:e})")]
    Closure { face: usize, mismatch: f64 },
    #[error("not s-holomorphic at corner {corner} (projection mismatch {residual:e})")]
    NotSHolomorphic { corner: usize, residual: f64 },
    #[error("quad {0} is degenerate")]
    DegenerateQuad(usize),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("no good level in the search window")]
    NoGoodLevel,
    #[error("circle packing did not converge (residual {0:e})")]
    PackingDiverged(f64),
    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
