use std::path::PathBuf;

/// Errors produced by the augmentation toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed WAV: {reason}")]
    MalformedWav { path: PathBuf, reason: String },

    #[error("{path}: unsupported encoding: {found} (expected 16-bit PCM or 32-bit float)")]
    UnsupportedEncoding { path: PathBuf, found: String },

    #[error("{path}: expected 1 channel, found {found}")]
    ChannelCount { path: PathBuf, found: u16 },

    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),

    #[error("sample rate {found} Hz is not supported; resample the input to {expected} Hz first")]
    SampleRate { found: u32, expected: u32 },

    #[error("invalid framing parameters: {0}")]
    InvalidFraming(String),

    #[error("signal has {len} samples, shorter than one analysis window of {window} samples")]
    SignalTooShort { len: usize, window: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("smoothing factor must lie in (0, 1), got {0}")]
    InvalidGamma(f64),

    #[error("warping coefficient must be positive and finite, got {0}")]
    InvalidWarp(f64),

    #[error("spectral values must be finite and non-negative (bin {index} is {value})")]
    InvalidSpectrum { index: usize, value: f64 },

    #[error("invalid range {lo}:{hi}; need 0 < lo <= hi")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("original-phase initialisation requested but no phase spectrogram was supplied")]
    MissingPhase,
}

impl Error {
    /// File the error refers to, if any.
    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            Self::Io { path, .. }
            | Self::MalformedWav { path, .. }
            | Self::UnsupportedEncoding { path, .. }
            | Self::ChannelCount { path, .. } => Some(path),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
