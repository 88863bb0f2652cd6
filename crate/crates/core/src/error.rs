use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No mean photon number up to the search cap reaches the target error.
    #[error("target error {target} is infeasible: analytic error floor is {floor:.6} (searched mu <= {mu_max})")]
    Infeasible {
        target: f64,
        floor: f64,
        mu_max: f64,
    },

    #[error("error probability is not monotone on mu in [{lo}, {hi}]")]
    NonMonotone { lo: f64, hi: f64 },

    #[error("degenerate cosine fit: samples carry no modulation at the ramp frequency")]
    DegenerateFit,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
