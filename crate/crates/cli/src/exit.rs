//! Stable exit codes. Documented in the README; scripts may rely on them.

/// Input files could not be read or parsed.
pub const PARSE_FAILURE: u8 = 2;
/// Flags or configuration files were invalid or inconsistent.
pub const INVALID_CONFIG: u8 = 3;
/// A constrained run found no feasible assignment (for example the threshold
/// is at least the total volume). Unconstrained artifacts are still written.
pub const NO_FEASIBLE_ASSIGNMENT: u8 = 4;

/// An error annotated with the exit code it should produce.
pub struct CliError {
    pub code: u8,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn new(code: u8, source: anyhow::Error) -> Self {
        Self { code, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub trait WithCode<T> {
    fn code(self, code: u8) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> WithCode<T> for Result<T, E> {
    fn code(self, code: u8) -> CliResult<T> {
        self.map_err(|e| CliError::new(code, e.into()))
    }
}
