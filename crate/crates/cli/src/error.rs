use std::fmt;
use std::path::Path;

use foreco_core::channel::ChannelError;
use foreco_core::eval::EvalError;
use foreco_core::forecast::ForecastError;
use foreco_core::recovery::RecoveryError;
use foreco_core::trace::TraceError;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Io,
    Parse,
    Config,
    Numeric,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 2,
            ErrorKind::Parse | ErrorKind::Config => 3,
            ErrorKind::Numeric => 4,
            ErrorKind::Internal => 1,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(ErrorKind::Io, format!("{}: {err}", path.display()))
    }

    /// Prefixes the message with the file it concerns.
    pub fn at(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }

    /// The last line written to stderr on failure.
    pub fn json_line(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message } }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(ErrorKind::Io, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        let kind = if e.is_io() { ErrorKind::Io } else { ErrorKind::Parse };
        Self::new(kind, e.to_string())
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        let kind = match e {
            TraceError::Io(_) => ErrorKind::Io,
            TraceError::Csv(_) | TraceError::InvalidTrace(_) | TraceError::DimensionMismatch { .. } => ErrorKind::Parse,
            _ => ErrorKind::Config,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<ForecastError> for CliError {
    fn from(e: ForecastError) -> Self {
        let kind = match e {
            ForecastError::RankDeficient { .. } | ForecastError::Diverged { .. } | ForecastError::DegenerateCovariance => {
                ErrorKind::Numeric
            }
            ForecastError::Io(_) => ErrorKind::Io,
            ForecastError::Format(_) => ErrorKind::Parse,
            _ => ErrorKind::Config,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        let kind = match e {
            ChannelError::Io(_) => ErrorKind::Io,
            ChannelError::Format(_) => ErrorKind::Parse,
            _ => ErrorKind::Config,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<RecoveryError> for CliError {
    fn from(e: RecoveryError) -> Self {
        match e {
            RecoveryError::Forecast(f) => f.into(),
            RecoveryError::Io(io) => io.into(),
            RecoveryError::Config(m) => Self::config(m),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Config(m) => Self::config(m),
            EvalError::Channel(c) => c.into(),
            EvalError::Recovery(r) => r.into(),
            EvalError::Forecast(f) => f.into(),
            EvalError::Trace(t) => t.into(),
        }
    }
}
