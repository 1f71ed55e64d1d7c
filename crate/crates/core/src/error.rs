use std::path::PathBuf;

/// Errors surfaced by the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("eigensolver failed to converge (matrix digest {digest:016x})")]
    Convergence { digest: u64 },
    #[error("energy {energy} lies within {distance:e} of eigenvalue {index} of the lower block")]
    Singular {
        energy: f64,
        index: usize,
        distance: f64,
    },
    #[error("null space of the detection system at {0} is two-dimensional")]
    Multiplicity(f64),
    #[error("sign formula undefined at {energy}: denominator {denominator:e}")]
    UndefinedSign { energy: f64, denominator: f64 },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
