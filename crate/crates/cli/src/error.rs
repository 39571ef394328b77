use thiserror::Error;

/// Exit status for bad flags, config files or grids.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when a built-in consistency or regression check fails.
pub const EXIT_CHECK: i32 = 3;
/// Exit status for simulation errors (cutoff too small, invalid states, ...).
pub const EXIT_SIMULATION: i32 = 4;
/// Exit status for I/O failures.
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Simulation(#[from] duality_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Toml(_) => EXIT_CONFIG,
            CliError::Check(_) => EXIT_CHECK,
            CliError::Simulation(_) => EXIT_SIMULATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
