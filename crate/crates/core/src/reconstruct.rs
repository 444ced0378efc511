//! Griffin-Lim phase estimation for modified power spectrograms.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal_io::Waveform;
use crate::stft::{magnitude_with_phase, ComplexSpectrogram, PowerSpectrogram, StftPlan};

/// Starting phase for the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitPhase {
    /// Phase of a supplied complex spectrogram, usually the unmodified input.
    #[default]
    Original,
    /// All-zero phase.
    Zero,
}

impl fmt::Display for InitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Original => "original",
            Self::Zero => "zero",
        })
    }
}

impl FromStr for InitPhase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "original" => Ok(Self::Original),
            "zero" => Ok(Self::Zero),
            other => Err(format!(
                "unknown phase initialisation {other:?} (original|zero)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GriffinLimConfig {
    pub iterations: usize,
    pub init_phase: InitPhase,
}

impl Default for GriffinLimConfig {
    fn default() -> Self {
        Self {
            iterations: 8,
            init_phase: InitPhase::Original,
        }
    }
}

/// Frobenius distance between `|stft(x)|^2` and the target power.
pub fn consistency_error(estimate: &ComplexSpectrogram, target: &PowerSpectrogram) -> f64 {
    estimate
        .values
        .iter()
        .zip(target.values.iter())
        .map(|(z, &p)| (z.norm_sqr() - p).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Result of a traced run: the waveform plus the consistency error of every
/// intermediate estimate, starting with the initial one.
#[derive(Debug, Clone)]
pub struct GriffinLimTrace {
    pub waveform: Waveform,
    pub errors: Vec<f64>,
}

fn initial_phase(
    target: &PowerSpectrogram,
    phase_init: Option<&ComplexSpectrogram>,
    cfg: &GriffinLimConfig,
) -> Result<ComplexSpectrogram> {
    match cfg.init_phase {
        InitPhase::Original => {
            let init = phase_init.ok_or(Error::MissingPhase)?;
            if init.values.dim() != target.values.dim() || init.params != target.params {
                return Err(Error::DimensionMismatch(format!(
                    "phase initialiser is {:?}, target is {:?}",
                    init.values.dim(),
                    target.values.dim()
                )));
            }
            magnitude_with_phase(target, init)
        }
        InitPhase::Zero => Ok(ComplexSpectrogram {
            values: target.values.mapv(|p| Complex64::new(p.sqrt(), 0.0)),
            params: target.params,
        }),
    }
}

fn run(
    target: &PowerSpectrogram,
    phase_init: Option<&ComplexSpectrogram>,
    cfg: &GriffinLimConfig,
    mut on_estimate: impl FnMut(&ComplexSpectrogram),
) -> Result<Waveform> {
    let plan = StftPlan::new(target.params)?;
    let mut estimate = initial_phase(target, phase_init, cfg)?;
    let mut x = plan.inverse(&estimate)?;
    for _ in 0..cfg.iterations {
        let rebuilt = plan.forward(&x)?;
        on_estimate(&rebuilt);
        estimate = magnitude_with_phase(target, &rebuilt)?;
        x = plan.inverse(&estimate)?;
    }
    Ok(x)
}

/// Reconstructs a waveform whose power spectrogram approximates `target`.
///
/// Each iteration synthesises a signal from the target magnitude and the
/// current phase, then re-analyses it to obtain the next phase. With zero
/// iterations the initial phase is used directly. `phase_init` is required
/// when `cfg.init_phase` is [`InitPhase::Original`].
pub fn griffin_lim(
    target: &PowerSpectrogram,
    phase_init: Option<&ComplexSpectrogram>,
    cfg: &GriffinLimConfig,
) -> Result<Waveform> {
    run(target, phase_init, cfg, |_| {})
}

/// Like [`griffin_lim`], also recording the consistency error of each
/// estimate `x_0 ..= x_n`.
pub fn griffin_lim_traced(
    target: &PowerSpectrogram,
    phase_init: Option<&ComplexSpectrogram>,
    cfg: &GriffinLimConfig,
) -> Result<GriffinLimTrace> {
    let mut errors = Vec::with_capacity(cfg.iterations + 1);
    let waveform = run(target, phase_init, cfg, |s| {
        errors.push(consistency_error(s, target))
    })?;
    let last = StftPlan::new(target.params)?.forward(&waveform)?;
    errors.push(consistency_error(&last, target));
    Ok(GriffinLimTrace { waveform, errors })
}
