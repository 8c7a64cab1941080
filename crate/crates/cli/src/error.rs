use std::fmt;

/// Failure classes of the command-line front end, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable file, malformed JSON or a document that does not match the schema.
    Parse {
        source: String,
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed input that fails a structural check.
    Validation(String),
    /// A failure while executing a valid experiment.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    pub fn from_json(source: &str, e: serde_json::Error) -> Self {
        let (line, column) = (e.line(), e.column());
        let full = e.to_string();
        let suffix = format!(" at line {line} column {column}");
        let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
        CliError::Parse {
            source: source.to_string(),
            line,
            column,
            message,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(e: impl fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse {
                source,
                line,
                column,
                message,
            } => write!(f, "parse error at {source}:{line}:{column}: {message}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
