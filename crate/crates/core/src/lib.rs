//! Speech augmentation by source-filter frequency warping.
//!
//! Adult speech is pushed toward child-like spectra by stretching the
//! harmonic fine structure (source) and the formant envelope (filter) with
//! independent factors, then resynthesised with Griffin-Lim. A single-factor
//! whole-spectrum warp (VTLP) and a warp-free round trip are provided as
//! baselines that share the same analysis and synthesis path.
//!
//! ```no_run
//! use sfwarp::{read_wav, write_wav, AugmentConfig, Augmenter};
//!
//! let input = read_wav("adult.wav")?;
//! let augmenter = Augmenter::new(AugmentConfig::default())?;
//! let (output, coeffs) = augmenter.augment(&input, 0)?;
//! println!("alpha={} beta={}", coeffs.alpha, coeffs.beta);
//! write_wav("adult.sfw0.wav", &output)?;
//! # Ok::<(), sfwarp::Error>(())
//! ```

pub mod envelope;
pub mod error;
pub mod pipeline;
pub mod reconstruct;
pub mod selftest;
pub mod signal_io;
pub mod stft;
pub mod synth;
pub mod warp;

pub use envelope::{decompose, estimate_envelope, recombine, SourceFilterPair};
pub use error::{Error, Result};
pub use pipeline::{
    augment_gl_only, augment_sfw, augment_vtlp, draw_coefficients, warp_source_filter, Analysis,
    AugmentConfig, Augmenter, DrawnCoefficients, Method, WarpRange,
};
pub use reconstruct::{griffin_lim, griffin_lim_traced, GriffinLimConfig, InitPhase};
pub use signal_io::{read_wav, write_wav, Waveform};
pub use stft::{
    istft, magnitude_with_phase, power, stft, ComplexSpectrogram, FramingParams, PowerSpectrogram,
    StftPlan,
};
pub use warp::{warp_frame, warp_phase, warp_spectrogram, WarpCoefficient};
