//! Batch front end for `sfwarp`: augment WAV corpora, dump the
//! source/filter matrices of one utterance, and run the built-in checks.
//!
//! The binary is a thin wrapper over [`cmd_augment`], [`cmd_decompose`] and
//! [`cmd_selftest`]; everything here is also usable from tests.

mod args;
mod augment;
mod decompose;

pub use args::{AugmentArgs, Cli, Command, ConfigArgs, DecomposeArgs};
pub use augment::{
    cmd_augment, collect_inputs, output_name, AugmentSummary, Failure, JobSpec, ManifestEntry,
    MANIFEST_NAME,
};
pub use decompose::{cmd_decompose, write_matrix};

use std::path::PathBuf;

/// Errors that stop a command before any per-file work happens.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("no input WAV files found")]
    NoInputs,

    #[error("{0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Core(#[from] sfwarp::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for unusable arguments, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::NoInputs | Self::InvalidSpec(_) => 2,
            Self::Core(
                sfwarp::Error::InvalidGamma(_)
                | sfwarp::Error::InvalidWarp(_)
                | sfwarp::Error::InvalidRange { .. }
                | sfwarp::Error::InvalidFraming(_),
            ) => 2,
            Self::Core(_) | Self::Io { .. } => 1,
        }
    }
}

/// Runs every built-in property check.
pub fn cmd_selftest() -> sfwarp::selftest::Report {
    sfwarp::selftest::run()
}
