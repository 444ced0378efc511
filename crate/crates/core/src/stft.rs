//! Short-time Fourier analysis and weighted overlap-add synthesis.
//!
//! Frames are taken without centering or padding: frame `m` covers samples
//! `[m * hop, m * hop + win)`, weighted by a periodic Hann window and
//! zero-padded to the FFT size. Only the one-sided spectrum
//! (`fft_size / 2 + 1` bins) is kept.
//!
//! Synthesis uses the analysis window again and divides by the summed
//! squared window, which makes `istft` the least-squares inverse of `stft`
//! for any hop. Near either end of the signal only the tapered edge of one
//! frame covers each sample, so reconstructing a *modified* spectrogram can
//! produce very large values there. [`StftPlan::attenuate_edges`] tames
//! those samples for final output; it is kept out of `istft` itself so that
//! iterative phase estimation keeps an exact least-squares inverse.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1, ArrayViewMut1, Zip};
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::signal_io::Waveform;

/// Window sums below this are treated as "no coverage" and produce zeros.
const MIN_WINDOW_SUM: f64 = 1e-10;

/// Edge attenuation threshold, relative to the largest window sum.
pub const EDGE_WINDOW_SUM_FLOOR: f64 = 0.1;

/// Framing configuration. Durations are converted to samples by rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramingParams {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub fft_size: usize,
    pub sample_rate: u32,
}

impl Default for FramingParams {
    /// 25 ms window, 10 ms hop, 512-point FFT at 16 kHz.
    fn default() -> Self {
        Self {
            window_ms: 25.0,
            hop_ms: 10.0,
            fft_size: 512,
            sample_rate: 16_000,
        }
    }
}

impl FramingParams {
    pub fn window_len(&self) -> usize {
        (self.window_ms * f64::from(self.sample_rate) / 1000.0).round() as usize
    }

    pub fn hop_len(&self) -> usize {
        (self.hop_ms * f64::from(self.sample_rate) / 1000.0).round() as usize
    }

    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Width of one frequency bin in Hz.
    pub fn bin_hz(&self) -> f64 {
        f64::from(self.sample_rate) / self.fft_size as f64
    }

    /// Number of frames for a signal of `len` samples, or `None` if the
    /// signal is shorter than one window.
    pub fn frame_count(&self, len: usize) -> Option<usize> {
        let win = self.window_len();
        (len >= win).then(|| 1 + (len - win) / self.hop_len())
    }

    /// Length of the signal produced by synthesising `frames` frames.
    pub fn output_len(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            (frames - 1) * self.hop_len() + self.window_len()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFraming(msg));
        if self.sample_rate == 0 {
            return bad("sample rate must be positive".into());
        }
        if !(self.window_ms.is_finite() && self.window_ms > 0.0) {
            return bad(format!("window of {} ms", self.window_ms));
        }
        if !(self.hop_ms.is_finite() && self.hop_ms > 0.0) {
            return bad(format!("hop of {} ms", self.hop_ms));
        }
        if self.fft_size < 2 || self.fft_size % 2 != 0 {
            return bad(format!("FFT size {} must be even and >= 2", self.fft_size));
        }
        let (win, hop) = (self.window_len(), self.hop_len());
        if win == 0 || win > self.fft_size {
            return bad(format!(
                "window of {win} samples must be in 1..={}",
                self.fft_size
            ));
        }
        if hop == 0 || hop > win {
            return bad(format!("hop of {hop} samples must be in 1..={win}"));
        }
        Ok(())
    }
}

/// Periodic Hann window of length `len`.
pub fn hann_periodic(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Complex one-sided STFT, `frames x bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    pub values: Array2<Complex64>,
    pub params: FramingParams,
}

/// Power spectrogram `|X|^2`, `frames x bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrogram {
    pub values: Array2<f64>,
    pub params: FramingParams,
}

impl ComplexSpectrogram {
    pub fn frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn bins(&self) -> usize {
        self.values.ncols()
    }
}

impl PowerSpectrogram {
    /// Wraps `values`, checking bin count, non-negativity and finiteness.
    pub fn new(values: Array2<f64>, params: FramingParams) -> Result<Self> {
        if values.ncols() != params.bins() {
            return Err(Error::DimensionMismatch(format!(
                "{} bins for FFT size {}",
                values.ncols(),
                params.fft_size
            )));
        }
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidSpectrum {
                index: i % params.bins(),
                value: v,
            });
        }
        Ok(Self { values, params })
    }

    pub fn zeros(frames: usize, params: FramingParams) -> Self {
        Self {
            values: Array2::zeros((frames, params.bins())),
            params,
        }
    }

    pub fn frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn bins(&self) -> usize {
        self.values.ncols()
    }

    /// Per-bin mean over all frames.
    pub fn mean_frame(&self) -> Vec<f64> {
        let n = self.frames().max(1) as f64;
        self.values
            .columns()
            .into_iter()
            .map(|c| c.sum() / n)
            .collect()
    }
}

/// Precomputed FFT plans and window for one framing configuration.
///
/// Reuse a plan when transforming repeatedly with the same parameters
/// (Griffin-Lim does this every iteration).
#[derive(Clone)]
pub struct StftPlan {
    params: FramingParams,
    win: usize,
    hop: usize,
    window: Vec<f64>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl std::fmt::Debug for StftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StftPlan")
            .field("params", &self.params)
            .field("win", &self.win)
            .field("hop", &self.hop)
            .finish_non_exhaustive()
    }
}

impl StftPlan {
    pub fn new(params: FramingParams) -> Result<Self> {
        params.validate()?;
        let mut planner = RealFftPlanner::<f64>::new();
        let win = params.window_len();
        Ok(Self {
            params,
            win,
            hop: params.hop_len(),
            window: hann_periodic(win),
            forward: planner.plan_fft_forward(params.fft_size),
            inverse: planner.plan_fft_inverse(params.fft_size),
        })
    }

    pub fn params(&self) -> FramingParams {
        self.params
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn forward(&self, w: &Waveform) -> Result<ComplexSpectrogram> {
        self.forward_samples(&w.samples)
    }

    pub fn forward_samples(&self, samples: &[f64]) -> Result<ComplexSpectrogram> {
        let frames = self
            .params
            .frame_count(samples.len())
            .ok_or(Error::SignalTooShort {
                len: samples.len(),
                window: self.win,
            })?;
        let n = self.params.fft_size;
        let mut values = Array2::<Complex64>::zeros((frames, self.params.bins()));
        let mut buf = vec![0.0; n];
        let mut scratch = self.forward.make_scratch_vec();
        let mut spectrum = self.forward.make_output_vec();

        for (m, mut row) in values.rows_mut().into_iter().enumerate() {
            let start = m * self.hop;
            for ((b, &x), &w) in buf
                .iter_mut()
                .zip(&samples[start..start + self.win])
                .zip(&self.window)
            {
                *b = x * w;
            }
            buf[self.win..].fill(0.0);
            self.forward
                .process_with_scratch(&mut buf, &mut spectrum, &mut scratch)
                .expect("FFT buffer sizes come from the plan");
            for (dst, src) in row.iter_mut().zip(&spectrum) {
                *dst = *src;
            }
        }
        Ok(ComplexSpectrogram {
            values,
            params: self.params,
        })
    }

    /// Weighted overlap-add synthesis. Output length is
    /// `(frames - 1) * hop + win`.
    pub fn inverse(&self, s: &ComplexSpectrogram) -> Result<Waveform> {
        self.check_dims(s.bins(), &s.params)?;
        let n = self.params.fft_size;
        let out_len = self.params.output_len(s.frames());
        let mut out = vec![0.0; out_len];
        let mut wsum = vec![0.0; out_len];
        let mut spectrum = self.inverse.make_input_vec();
        let mut buf = self.inverse.make_output_vec();
        let mut scratch = self.inverse.make_scratch_vec();
        let last = spectrum.len() - 1;
        let scale = 1.0 / n as f64;

        for (m, row) in s.values.rows().into_iter().enumerate() {
            for (dst, src) in spectrum.iter_mut().zip(row) {
                *dst = *src;
            }
            // A real signal has purely real DC and Nyquist terms.
            spectrum[0].im = 0.0;
            spectrum[last].im = 0.0;
            self.inverse
                .process_with_scratch(&mut spectrum, &mut buf, &mut scratch)
                .expect("FFT buffer sizes come from the plan");
            let start = m * self.hop;
            for (k, &w) in self.window.iter().enumerate() {
                out[start + k] += buf[k] * scale * w;
                wsum[start + k] += w * w;
            }
        }
        for (x, &ws) in out.iter_mut().zip(&wsum) {
            *x = if ws > MIN_WINDOW_SUM { *x / ws } else { 0.0 };
        }
        Ok(Waveform {
            samples: out,
            sample_rate: self.params.sample_rate,
        })
    }

    /// Summed squared synthesis window for `frames` frames.
    pub fn window_sum(&self, frames: usize) -> Vec<f64> {
        let mut wsum = vec![0.0; self.params.output_len(frames)];
        for m in 0..frames {
            let start = m * self.hop;
            for (k, &w) in self.window.iter().enumerate() {
                wsum[start + k] += w * w;
            }
        }
        wsum
    }

    /// Scales down samples whose window sum is below
    /// [`EDGE_WINDOW_SUM_FLOOR`] of its peak, as if the overlap-add divisor
    /// had been floored there. Only the first and last few milliseconds of
    /// a synthesised signal are affected.
    pub fn attenuate_edges(&self, w: &mut Waveform) {
        let frames = self.params.frame_count(w.len()).unwrap_or(0);
        let wsum = self.window_sum(frames);
        let floor = EDGE_WINDOW_SUM_FLOOR * wsum.iter().fold(0.0f64, |m, &v| m.max(v));
        for (x, &ws) in w.samples.iter_mut().zip(&wsum) {
            if ws < floor {
                *x *= ws / floor;
            }
        }
    }

    fn check_dims(&self, bins: usize, params: &FramingParams) -> Result<()> {
        if bins != self.params.bins() || *params != self.params {
            return Err(Error::DimensionMismatch(format!(
                "spectrogram framed with {params:?} ({bins} bins) does not match plan {:?}",
                self.params
            )));
        }
        Ok(())
    }
}

/// Forward STFT of `w` with framing `p`.
pub fn stft(w: &Waveform, p: FramingParams) -> Result<ComplexSpectrogram> {
    if w.sample_rate != p.sample_rate {
        return Err(Error::SampleRate {
            found: w.sample_rate,
            expected: p.sample_rate,
        });
    }
    StftPlan::new(p)?.forward(w)
}

/// Inverse STFT by weighted overlap-add.
pub fn istft(s: &ComplexSpectrogram) -> Result<Waveform> {
    StftPlan::new(s.params)?.inverse(s)
}

/// Element-wise `|X|^2`.
pub fn power(s: &ComplexSpectrogram) -> PowerSpectrogram {
    PowerSpectrogram {
        values: s.values.mapv(|z| z.norm_sqr()),
        params: s.params,
    }
}

fn apply_phase(
    mut dst: ArrayViewMut1<Complex64>,
    power: ArrayView1<f64>,
    phase: ArrayView1<Complex64>,
) {
    Zip::from(&mut dst)
        .and(&power)
        .and(&phase)
        .for_each(|d, &p, &z| {
            let mag = p.sqrt();
            let r = z.norm();
            *d = if r > 0.0 {
                z * (mag / r)
            } else {
                Complex64::new(mag, 0.0)
            };
        });
}

/// Combines the magnitude `sqrt(p)` with the phase of `phase_source`.
/// Zero-valued phase sources contribute phase zero.
pub fn magnitude_with_phase(
    p: &PowerSpectrogram,
    phase_source: &ComplexSpectrogram,
) -> Result<ComplexSpectrogram> {
    if p.values.dim() != phase_source.values.dim() {
        return Err(Error::DimensionMismatch(format!(
            "power spectrogram is {:?}, phase source is {:?}",
            p.values.dim(),
            phase_source.values.dim()
        )));
    }
    let mut values = Array2::<Complex64>::zeros(p.values.dim());
    for ((dst, pw), ph) in values
        .rows_mut()
        .into_iter()
        .zip(p.values.rows())
        .zip(phase_source.values.rows())
    {
        apply_phase(dst, pw, ph);
    }
    Ok(ComplexSpectrogram {
        values,
        params: p.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    fn noise(len: usize, seed: u64) -> Vec<f64> {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn wave(samples: Vec<f64>) -> Waveform {
        Waveform {
            samples,
            sample_rate: 16_000,
        }
    }

    /// Direct O(N^2) DFT of one zero-padded frame.
    fn dft(frame: &[f64], n: usize) -> Vec<Complex64> {
        (0..=n / 2)
            .map(|k| {
                frame
                    .iter()
                    .enumerate()
                    .map(|(t, &x)| Complex64::from_polar(x, -2.0 * PI * (k * t) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn default_framing_in_samples() {
        let p = FramingParams::default();
        assert_eq!(p.window_len(), 400);
        assert_eq!(p.hop_len(), 160);
        assert_eq!(p.bins(), 257);
        assert_eq!(p.bin_hz(), 31.25);
    }

    #[test]
    fn one_second_gives_98_frames() {
        let s = stft(&wave(vec![0.1; 16_000]), FramingParams::default()).unwrap();
        assert_eq!(s.values.dim(), (98, 257));
    }

    #[test]
    fn zero_signal_gives_zero_spectrogram() {
        let s = stft(&wave(vec![0.0; 4000]), FramingParams::default()).unwrap();
        assert!(s.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        let back = istft(&s).unwrap();
        assert!(back.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn short_signal_rejected() {
        let err = stft(&wave(vec![0.0; 399]), FramingParams::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::SignalTooShort {
                len: 399,
                window: 400
            }
        ));
    }

    #[test]
    fn sample_rate_mismatch_rejected() {
        let w = Waveform {
            samples: vec![0.0; 1000],
            sample_rate: 8000,
        };
        assert!(matches!(
            stft(&w, FramingParams::default()),
            Err(Error::SampleRate { found: 8000, .. })
        ));
    }

    #[test]
    fn invalid_framing_rejected() {
        for p in [
            FramingParams {
                fft_size: 256,
                ..Default::default()
            },
            FramingParams {
                hop_ms: 30.0,
                ..Default::default()
            },
            FramingParams {
                hop_ms: 0.01,
                ..Default::default()
            },
        ] {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn matches_direct_dft() {
        let p = FramingParams::default();
        let x = noise(1000, 3);
        let s = stft(&wave(x.clone()), p).unwrap();
        let w = hann_periodic(400);
        for m in [0, 2, 3] {
            let frame: Vec<f64> = (0..400).map(|n| x[m * 160 + n] * w[n]).collect();
            let reference = dft(&frame, 512);
            for (k, z) in reference.iter().enumerate() {
                assert!((s.values[[m, k]] - z).norm() < 1e-9, "frame {m} bin {k}");
            }
        }
    }

    #[test]
    fn sine_500hz_peaks_at_bin_16() {
        let x: Vec<f64> = (0..16_000)
            .map(|n| (2.0 * PI * 500.0 * n as f64 / 16_000.0).sin())
            .collect();
        let s = power(&stft(&wave(x), FramingParams::default()).unwrap());
        for row in s.values.rows() {
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_eq!(argmax, 16);
        }
    }

    #[test]
    fn round_trip_interior() {
        let p = FramingParams::default();
        let x = noise(16_000, 11);
        let y = istft(&stft(&wave(x.clone()), p).unwrap()).unwrap();
        assert_eq!(y.len(), p.output_len(98));
        let (lo, hi) = (400, y.len() - 400);
        assert!(rel_l2(&y.samples[lo..hi], &x[lo..hi]) < 1e-12);
    }

    #[test]
    fn single_frame_recovers_segment() {
        let p = FramingParams::default();
        let x = noise(400, 5);
        let y = istft(&stft(&wave(x.clone()), p).unwrap()).unwrap();
        assert_eq!(y.len(), 400);
        assert_eq!(y.samples[0], 0.0);
        for (n, (a, b)) in y.samples.iter().zip(&x).enumerate().skip(1) {
            assert!((a - b).abs() < 1e-6, "sample {n}");
        }
    }

    #[test]
    fn edge_attenuation_only_touches_edges() {
        let p = FramingParams::default();
        let plan = StftPlan::new(p).unwrap();
        let mut w = wave(vec![1.0; 2000]);
        plan.attenuate_edges(&mut w);
        let wsum = plan.window_sum(p.frame_count(2000).unwrap());
        let peak = wsum.iter().cloned().fold(0.0, f64::max);
        assert_eq!(w.samples[0], 0.0);
        for (n, (&x, &ws)) in w.samples.iter().zip(&wsum).enumerate() {
            if ws >= EDGE_WINDOW_SUM_FLOOR * peak {
                assert_eq!(x, 1.0, "sample {n}");
            } else {
                assert!(x < 1.0 && !(160..=2000 - 160).contains(&n), "sample {n}");
            }
        }
        assert!(w.samples[400..1600].iter().all(|&x| x == 1.0));
    }

    #[test]
    fn parseval_per_frame() {
        let p = FramingParams::default();
        let x = noise(2000, 9);
        let s = power(&stft(&wave(x.clone()), p).unwrap());
        let w = hann_periodic(400);
        let mut windowed_energy = 0.0;
        for m in 0..s.frames() {
            windowed_energy += (0..400)
                .map(|n| (x[m * 160 + n] * w[n]).powi(2))
                .sum::<f64>();
        }
        // One-sided spectrum: interior bins stand for two full-spectrum bins.
        let mut spectral = 0.0;
        for row in s.values.rows() {
            for (k, &v) in row.iter().enumerate() {
                spectral += if k == 0 || k == 256 { v } else { 2.0 * v };
            }
        }
        let rel = (spectral / 512.0 - windowed_energy).abs() / windowed_energy;
        assert!(rel < 1e-6, "relative Parseval error {rel}");
    }

    #[test]
    fn power_definition() {
        let p = FramingParams::default();
        let mut values = Array2::zeros((1, 257));
        values[[0, 0]] = Complex64::new(3.0, 4.0);
        values[[0, 1]] = Complex64::new(3.0, -4.0);
        let pw = power(&ComplexSpectrogram { values, params: p });
        assert_eq!(pw.values[[0, 0]], 25.0);
        assert_eq!(pw.values[[0, 1]], 25.0);
        assert_eq!(pw.values[[0, 2]], 0.0);
    }

    #[test]
    fn magnitude_with_phase_cases() {
        let p = FramingParams::default();
        let mut pw = PowerSpectrogram::zeros(1, p);
        pw.values[[0, 0]] = 25.0;
        pw.values[[0, 1]] = 4.0;
        let mut ph = Array2::zeros((1, 257));
        ph[[0, 0]] = Complex64::new(3.0, 4.0);
        ph[[0, 2]] = Complex64::new(-1.0, 7.0);
        let out = magnitude_with_phase(
            &pw,
            &ComplexSpectrogram {
                values: ph,
                params: p,
            },
        )
        .unwrap();
        assert!((out.values[[0, 0]] - Complex64::new(3.0, 4.0)).norm() < 1e-15);
        assert_eq!(out.values[[0, 1]], Complex64::new(2.0, 0.0));
        assert_eq!(out.values[[0, 2]], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn magnitude_with_phase_dimension_mismatch() {
        let p = FramingParams::default();
        let pw = PowerSpectrogram::zeros(2, p);
        let ph = ComplexSpectrogram {
            values: Array2::zeros((3, 257)),
            params: p,
        };
        assert!(matches!(
            magnitude_with_phase(&pw, &ph),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn power_spectrogram_rejects_negative() {
        let p = FramingParams::default();
        let mut v = Array2::zeros((1, 257));
        v[[0, 5]] = -1.0;
        assert!(matches!(
            PowerSpectrogram::new(v, p),
            Err(Error::InvalidSpectrum { index: 5, .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn round_trip_random_lengths(len in 1200usize..6000, seed in any::<u64>()) {
                let p = FramingParams::default();
                let x = noise(len, seed);
                let y = istft(&stft(&wave(x.clone()), p).unwrap()).unwrap();
                prop_assert_eq!(y.len(), p.output_len(p.frame_count(len).unwrap()));
                let hi = y.len() - 400;
                prop_assert!(rel_l2(&y.samples[400..hi], &x[400..hi]) < 1e-6);
            }

            #[test]
            fn linear_in_scale(a in -4.0f64..4.0, seed in any::<u64>()) {
                let p = FramingParams::default();
                let x = noise(1200, seed);
                let s1 = stft(&wave(x.iter().map(|v| a * v).collect()), p).unwrap();
                let s0 = stft(&wave(x), p).unwrap();
                for (u, v) in s1.values.iter().zip(s0.values.iter()) {
                    prop_assert!((u - v * a).norm() <= 1e-9 * (1.0 + v.norm()));
                }
            }
        }
    }
}
