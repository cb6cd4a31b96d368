use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid clause: {0}")]
    InvalidClause(String),

    #[error("pop_scope called with no open scope")]
    EmptyScopeStack,

    #[error("solver error: {0}")]
    Solver(String),

    #[error("model enumeration refused: {n} variables exceeds the limit of {limit}")]
    TooManyVariables { n: usize, limit: usize },

    #[error("formula unsatisfiable")]
    Unsatisfiable,

    #[error("initialisation reached {found} of {mu} members after {attempts} failed draws")]
    InitFailure {
        found: usize,
        mu: usize,
        attempts: usize,
    },

    #[error("no satisfiable formula after {rejects} rejected draws")]
    Generation { rejects: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
