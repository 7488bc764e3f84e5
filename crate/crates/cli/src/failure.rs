use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] isoprofile::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        use isoprofile::Error as E;
        match self {
            Failure::Usage(_) | Failure::Io { .. } => EXIT_USAGE,
            Failure::Budget(_) => EXIT_BUDGET,
            Failure::Core(e) => match e {
                E::Budget(_) | E::RadiusExceeded { .. } => EXIT_BUDGET,
                E::CoverageShortfall { .. } | E::NotStationary { .. } => EXIT_CHECK_FAILED,
                _ => EXIT_USAGE,
            },
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
