use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] twophase_core::Error),

    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: String,
        source: std::io::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error("every sweep row failed")]
    SweepFailed,

    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
}

impl CliError {
    /// 2: rejected input, 3: no stationary profile, 4: blow-up during time
    /// stepping, 1: anything else.
    pub fn exit_code(&self) -> u8 {
        use twophase_core::Error as E;
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } => 2,
            CliError::SweepFailed => 3,
            CliError::Core(e) => match e {
                E::Config(_) | E::Rejected(_) | E::Domain(_) | E::Usage(_) => 2,
                E::NoProfile { .. } => 3,
                E::BlowUp { .. } | E::StepFailure { .. } | E::NonFinite { .. } => 4,
                E::Structural(_) | E::InsufficientData { .. } => 1,
            },
            CliError::Write { .. } | CliError::VerifyFailed(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
