use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID: i32 = 1;
    pub const IO: i32 = 2;
    pub const DIVERGED: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Invalid(vqccs::Error),
    #[error("missing input {}: run `{hint}` first", path.display())]
    Missing { path: PathBuf, hint: &'static str },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{message}{}", written_to(.checkpoint.as_deref()))]
    Diverged {
        message: String,
        /// Where the last finite model was saved, if anywhere.
        checkpoint: Option<PathBuf>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => exit::INVALID,
            CliError::Missing { .. } | CliError::Io { .. } => exit::IO,
            CliError::Diverged { .. } => exit::DIVERGED,
        }
    }
}

impl From<vqccs::Error> for CliError {
    fn from(e: vqccs::Error) -> Self {
        match e {
            vqccs::Error::Io(source) => CliError::Io {
                path: PathBuf::new(),
                source,
            },
            other => CliError::Invalid(other),
        }
    }
}

fn written_to(path: Option<&std::path::Path>) -> String {
    path.map(|p| format!(" (last finite checkpoint written to {})", p.display()))
        .unwrap_or_default()
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches `path` to I/O failures coming out of the library.
pub fn at_path<T>(path: &std::path::Path, r: vqccs::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        vqccs::Error::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Invalid(other),
    })
}
