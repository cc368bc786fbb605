//! Model files, command dispatch and reports for the `indextwo` binary.

pub mod commands;
pub mod model;
pub mod report;

pub use commands::{effective_tol, run_command, Command, Flags, Model, Which};
pub use model::{emit_model_file, fixture_file_name, fixture_model, parse_model_file, ModelFile, FIXTURE_NAMES};
pub use report::{emit_report, Format, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("dimension mismatch in {field}: expected {expected}, found {found}")]
    DimensionMismatch { field: String, expected: String, found: String },
    #[error("missing or incomplete field: {0}")]
    MissingField(String),
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("no 2Z-inner system available for {0} (none declared and classification found none)")]
    NoSystem(String),
    #[error(transparent)]
    Core(#[from] indextwo::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
