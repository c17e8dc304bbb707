//! Batch experiments on smooth rarefaction waves: simulations, decay-rate
//! tables, exponent sweeps, convergence studies and a self-check suite.
//! Every run writes its artifacts plus a `manifest.json` with SHA-256
//! checksums into the output directory.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod plot;

use std::path::PathBuf;

pub use config::{parse_config, ConfigError, ExperimentKind, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] rarelab_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("fitted slopes outside tolerance: {0}")]
    Fit(String),
    #[error("self-check failed: {0}")]
    Check(String),
}

/// Structured failure category, reported on stderr and as the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Blowup,
    Convergence,
    Fit,
    Io,
    Check,
}

impl Category {
    pub fn exit_code(self) -> u8 {
        match self {
            Category::Config => 2,
            Category::Blowup => 3,
            Category::Convergence | Category::Fit => 4,
            Category::Io | Category::Check => 1,
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> Category {
        use rarelab_core::Error as E;
        match self {
            CliError::Config(_) => Category::Config,
            CliError::Core(e) => match e {
                E::Config(_) | E::Domain(_) | E::Degenerate { .. } => Category::Config,
                E::Blowup { .. } => Category::Blowup,
                E::Fit(_) => Category::Fit,
                E::Bracket { .. }
                | E::Convergence { .. }
                | E::Window { .. }
                | E::NegativeWeight { .. }
                | E::Precondition(_) => Category::Convergence,
            },
            CliError::Io { .. } => Category::Io,
            CliError::Fit(_) => Category::Fit,
            CliError::Check(_) => Category::Check,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
