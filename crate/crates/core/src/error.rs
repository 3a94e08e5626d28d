use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unknown system id {0} (valid ids are 1..=11)")]
    UnknownSystem(u32),
    #[error("parse error in expression `{src}`: {msg}")]
    ExprParse { src: String, msg: String },
    #[error("expression evaluation: {0}")]
    ExprEval(String),
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("parameter constraint violated: {0}")]
    ParamConstraint(String),
    #[error("system {id} is not separable for these parameters: {why}")]
    NotSeparable { id: u32, why: String },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("solver diagnostic: {0}")]
    Solver(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
