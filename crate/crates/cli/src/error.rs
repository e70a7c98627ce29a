use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Clap(clap::Error),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] homoclinic::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Clap(e) if !e.use_stderr() => 0,
            Self::Clap(_) | Self::Usage(_) => 2,
            Self::Core(homoclinic::Error::Config(_) | homoclinic::Error::Usage(_) | homoclinic::Error::Expression { .. }) => 2,
            Self::Core(_) | Self::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}
