use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("parameter schema mismatch for `{model}`: {detail}")]
    SchemaMismatch { model: String, detail: String },

    #[error("momentum has dimension {got}, model expects {expected}")]
    MomentumDimension { expected: usize, got: usize },

    #[error("invalid momentum: {0}")]
    InvalidMomentum(String),

    #[error("h-vector dimension {got} is not supported here ({expected})")]
    VectorDimension { expected: &'static str, got: usize },

    #[error("gapless input (|h| = {norm:e}): fidelity is undefined at a band touching")]
    GaplessInput { norm: f64 },

    #[error("inverse temperature must be finite and non-negative, got {0}")]
    InvalidBeta(f64),

    #[error("`{0}` is a multi-sector model; evaluate it per sector")]
    CompositeModel(String),

    #[error("h-vectors are not antipodal (1 + cos = {0:e})")]
    NonAntipodal(f64),

    #[error("`{model}` is not declared linear in {params:?}")]
    LinearityNotDeclared { model: String, params: Vec<String> },

    #[error("critical line verification failed: gap {gap:e} exceeds {tol:e}")]
    VerificationFailed { gap: f64, tol: f64 },

    #[error("k0 is not a fidelity zero (F = {0:e})")]
    NotAZero(f64),

    #[error("insufficient points: {0}")]
    InsufficientPoints(String),

    #[error("zero mass at TRI momentum {0:?}: critical point")]
    CriticalPoint([f64; 3]),

    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}", config_text(*line, msg))]
    Config { line: usize, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
}

impl Error {
    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            msg: err.to_string(),
        }
    }
}

fn config_text(line: usize, msg: &str) -> String {
    if line == 0 {
        format!("config: {msg}")
    } else {
        format!("config line {line}: {msg}")
    }
}
