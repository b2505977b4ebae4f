use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid sequence spec `{spec}`: bad token `{token}` ({reason})")]
    SequenceSyntax {
        spec: String,
        token: String,
        reason: String,
    },

    #[error("sequence index must be at least 1, got {0}")]
    ZeroIndex(u64),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("config file {path}: line {line}: {reason}")]
    ConfigSyntax {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("point ({a}, {n}) is not on the even sublattice (a + n must be even)")]
    OffParity { a: i64, n: i64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
