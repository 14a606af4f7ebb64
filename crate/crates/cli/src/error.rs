use fpengine::engine::EngineError;
use fpengine::isa::IsaError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    ConfigFile { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Trace { path: PathBuf, source: IsaError },
    #[error("{}: {source}", path.display())]
    Engine { path: PathBuf, source: EngineError },
    #[error("{}: trap at instruction {inst}, cycle {cycle}: {cause}", path.display())]
    Trapped { path: PathBuf, inst: usize, cycle: u64, cause: String },
    #[error("{0}")]
    Golden(String),
    #[error("self-check failed: {0} mismatching operations")]
    SelfCheck(u64),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::ConfigFile { .. } | CliError::Config(_) | CliError::Trace { .. } => 1,
            CliError::Engine { source: EngineError::Config(_) | EngineError::Program(_), .. } => 1,
            CliError::Engine { .. } | CliError::Trapped { .. } => 2,
            CliError::Golden(_) | CliError::SelfCheck(_) => 3,
        }
    }
}
