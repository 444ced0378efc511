//! Linear frequency warping of spectral frames.
//!
//! Output bin `i` reads the input at fractional position `u = i / lambda`
//! and interpolates linearly between bins `floor(u)` and `floor(u) + 1`.
//! With `lambda > 1` content moves toward higher bins. Positions that fall
//! past the last bin read a fill value: the mean of the uppermost 2% of bins
//! (at least one bin) of the input frame.

use std::f64::consts::PI;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stft::{ComplexSpectrogram, PowerSpectrogram};

/// A positive warping factor (source, filter or whole-spectrum).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WarpCoefficient(f64);

impl WarpCoefficient {
    pub const IDENTITY: Self = Self(1.0);

    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::InvalidWarp(lambda))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for WarpCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<f64> for WarpCoefficient {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

/// Number of bins averaged for the out-of-range fill value.
pub fn fill_bin_count(bins: usize) -> usize {
    ((0.02 * bins as f64).ceil() as usize).clamp(1, bins.max(1))
}

/// Mean of the uppermost `fill_bin_count` bins.
pub fn upper_fill(frame: &[f64]) -> f64 {
    if frame.is_empty() {
        return 0.0;
    }
    let n = fill_bin_count(frame.len());
    frame[frame.len() - n..].iter().sum::<f64>() / n as f64
}

pub(crate) fn warp_into(frame: &[f64], lambda: f64, out: &mut [f64]) {
    debug_assert_eq!(frame.len(), out.len());
    if frame.is_empty() {
        return;
    }
    let top = frame.len() - 1;
    let fill = upper_fill(frame);
    for (i, o) in out.iter_mut().enumerate() {
        let u = i as f64 / lambda;
        let base = u.floor();
        let t = u - base;
        *o = if base > top as f64 {
            fill
        } else {
            let k = base as usize;
            if t == 0.0 {
                frame[k]
            } else {
                let next = if k < top { frame[k + 1] } else { fill };
                frame[k] * (1.0 - t) + next * t
            }
        };
    }
}

/// Warps one frame. The output has the same number of bins as the input.
pub fn warp_frame(frame: &[f64], lambda: WarpCoefficient) -> Result<Vec<f64>> {
    if let Some((index, &value)) = frame
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::InvalidSpectrum { index, value });
    }
    let mut out = vec![0.0; frame.len()];
    warp_into(frame, lambda.get(), &mut out);
    Ok(out)
}

/// Warps every frame of `p` with the same coefficient.
pub fn warp_spectrogram(p: &PowerSpectrogram, lambda: WarpCoefficient) -> Result<PowerSpectrogram> {
    let mut values = Array2::<f64>::zeros(p.values.dim());
    for (src, mut dst) in p.values.rows().into_iter().zip(values.rows_mut()) {
        let warped = warp_frame(&src.to_vec(), lambda)?;
        dst.assign(&ndarray::ArrayView1::from(&warped));
    }
    Ok(PowerSpectrogram {
        values,
        params: p.params,
    })
}

/// Wraps a phase into `[-pi, pi)`.
fn principal(x: f64) -> f64 {
    x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor()
}

/// Unit-magnitude phase field that follows a frequency warp by `lambda`.
///
/// Output bin `i` borrows the instantaneous frequency of input bin
/// `round(i / lambda)`, scales it by `lambda`, and accumulates it across
/// frames (the phase-vocoder rule). The first frame copies the source
/// phase. With `lambda == 1` the input phase is returned unchanged.
///
/// Used to initialise Griffin-Lim for warped spectrograms: feeding the
/// unwarped phase would keep the original pulse timing and pull the
/// harmonics back to the original pitch.
pub fn warp_phase(phase: &ComplexSpectrogram, lambda: WarpCoefficient) -> ComplexSpectrogram {
    let lambda = lambda.get();
    if lambda == 1.0 {
        return phase.clone();
    }
    let (frames, bins) = phase.values.dim();
    let hop = phase.params.hop_len() as f64;
    let n = phase.params.fft_size as f64;
    let source_bin: Vec<usize> = (0..bins)
        .map(|i| ((i as f64 / lambda).round() as usize).min(bins.saturating_sub(1)))
        .collect();

    let mut values = Array2::<Complex64>::zeros((frames, bins));
    let mut acc = vec![0.0; bins];
    for m in 0..frames {
        for (i, &k) in source_bin.iter().enumerate() {
            let current = phase.values[[m, k]].arg();
            if m == 0 {
                acc[i] = current;
            } else {
                let expected = 2.0 * PI * k as f64 / n * hop;
                let deviation = principal(current - phase.values[[m - 1, k]].arg() - expected);
                acc[i] = principal(acc[i] + lambda * (expected + deviation));
            }
            values[[m, i]] = Complex64::from_polar(1.0, acc[i]);
        }
    }
    ComplexSpectrogram {
        values,
        params: phase.params,
    }
}
