use std::fmt;
use std::path::Path;

use xsens_core::Error as CoreError;

/// Failure categories, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Config,
    MissingInput,
    Format,
    InvalidArgument,
    Numerical,
    Output,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Usage => 2,
            Kind::Config => 3,
            Kind::MissingInput => 4,
            Kind::Format => 5,
            Kind::InvalidArgument => 6,
            Kind::Numerical => 7,
            Kind::Output => 8,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Config => "config",
            Kind::MissingInput => "missing-input",
            Kind::Format => "format",
            Kind::InvalidArgument => "invalid-argument",
            Kind::Numerical => "numerical",
            Kind::Output => "output",
        }
    }
}

pub const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  2  usage: unknown flag, missing argument or bad flag value
  3  config: unreadable config file, unknown key or invalid value
  4  missing-input: an input file does not exist or cannot be read
  5  format: an input file is not a valid container
  6  invalid-argument: inputs are inconsistent (grids, coil counts, indices)
  7  numerical: singular coil geometry or degenerate sensitivity voxels
  8  output: the output directory or a result file cannot be written

Errors are reported on stderr as a single line:
  error kind=<kind> exit=<code> message=\"<text>\"";

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Kind::Config, message)
    }

    /// Classify a library error raised while reading `path`.
    pub fn reading(path: &Path, err: CoreError) -> Self {
        match err {
            CoreError::Io(e) => Self::new(Kind::MissingInput, format!("{}: {e}", path.display())),
            e @ (CoreError::Format { .. } | CoreError::Truncated { .. }) => {
                Self::new(Kind::Format, format!("{}: {e}", path.display()))
            }
            other => Self::from(other).prefixed(path),
        }
    }

    /// Classify an I/O error raised while writing `path`.
    pub fn writing(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(Kind::Output, format!("{}: {err}", path.display()))
    }

    fn prefixed(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }

    /// The single stderr line describing this error.
    pub fn line(&self) -> String {
        let message = self.message.replace(['\n', '\r'], " ").replace('"', "'");
        format!("error kind={} exit={} message=\"{}\"", self.kind.tag(), self.kind.exit_code(), message.trim())
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let kind = match &err {
            CoreError::InvalidArgument(_) | CoreError::VacantVoxel => Kind::InvalidArgument,
            CoreError::SingularGeometry { .. } | CoreError::DegenerateVoxel { .. } => Kind::Numerical,
            CoreError::Format { .. } | CoreError::Truncated { .. } => Kind::Format,
            CoreError::Io(_) => Kind::Output,
        };
        Self::new(kind, err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
