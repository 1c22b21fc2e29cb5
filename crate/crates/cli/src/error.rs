use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}:{column}: {message}")]
    Config { path: PathBuf, line: usize, column: usize, message: String },

    #[error("{0}")]
    Library(validim_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Usage(_) | CliError::Config { .. } | CliError::Library(_) => 2,
            CliError::Io { .. } => 1,
        }
    }

    /// Machine-readable form of a numerical failure.
    pub fn report(&self, command: &str) -> Option<String> {
        #[derive(Serialize)]
        struct Report<'a> {
            command: &'a str,
            error: &'a str,
            message: String,
        }
        let CliError::Library(e) = self else { return None };
        let error = match e {
            validim_core::Error::NonPrevisible(_) => "non-previsible",
            validim_core::Error::Divergent(_) => "divergent",
            _ => return None,
        };
        serde_json::to_string(&Report { command, error, message: e.to_string() }).ok()
    }

    /// Points a TOML error at its line and column.
    pub fn from_toml(path: PathBuf, text: &str, err: &toml::de::Error) -> Self {
        let offset = err.span().map_or(0, |s| s.start).min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        CliError::Config { path, line, column, message: err.message().to_string() }
    }
}

impl From<validim_core::Error> for CliError {
    fn from(e: validim_core::Error) -> Self {
        CliError::Library(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
