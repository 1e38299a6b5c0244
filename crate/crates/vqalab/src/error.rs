use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("size guard: {what} requires n <= {max}, got {n}")]
    SizeGuard { what: &'static str, max: usize, n: usize },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("parameter index {index} out of range for {len} parameters")]
    ParamIndex { index: usize, len: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("zero operator has no normalized norm")]
    ZeroNorm,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("gate on sites ({0}, {1}) is not nearest-neighbour")]
    NonAdjacent(usize, usize),
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
