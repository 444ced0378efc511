//! Synthetic test signals.

use std::f64::consts::PI;

use crate::signal_io::Waveform;

/// Sine tone of the given amplitude.
pub fn tone(freq_hz: f64, amplitude: f64, secs: f64, sample_rate: u32) -> Waveform {
    let sr = f64::from(sample_rate);
    let n = (secs * sr).round() as usize;
    Waveform {
        samples: (0..n)
            .map(|i| amplitude * (2.0 * PI * freq_hz * i as f64 / sr).sin())
            .collect(),
        sample_rate,
    }
}

/// One peak of a synthetic spectral envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formant {
    pub freq_hz: f64,
    pub level_db: f64,
}

/// Default two-formant shape used by [`vowel`] callers in tests and benches.
pub const TWO_FORMANTS: [Formant; 2] = [
    Formant {
        freq_hz: 1000.0,
        level_db: 0.0,
    },
    Formant {
        freq_hz: 3000.0,
        level_db: -10.0,
    },
];

/// Envelope level in dB at `freq_hz`: the highest of the formant peaks,
/// each falling off linearly at `slope_db_per_khz`.
pub fn envelope_db(formants: &[Formant], slope_db_per_khz: f64, freq_hz: f64) -> f64 {
    formants
        .iter()
        .map(|f| f.level_db - slope_db_per_khz * (freq_hz - f.freq_hz).abs() / 1000.0)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Pulse train at `f0_hz` shaped by a piecewise-linear (in dB) envelope.
///
/// Built additively as cosine-phase harmonics up to 97.5% of Nyquist, which
/// is a pulse train through a zero-phase shaping filter. Normalised to
/// `peak`.
pub fn vowel(
    f0_hz: f64,
    formants: &[Formant],
    slope_db_per_khz: f64,
    peak: f64,
    secs: f64,
    sample_rate: u32,
) -> Waveform {
    let sr = f64::from(sample_rate);
    let n = (secs * sr).round() as usize;
    let mut out = vec![0.0; n];
    let mut h = 1.0;
    while h * f0_hz < 0.4875 * sr {
        let freq = h * f0_hz;
        let amp = 10f64.powf(envelope_db(formants, slope_db_per_khz, freq) / 20.0);
        let step = 2.0 * PI * freq / sr;
        for (t, o) in out.iter_mut().enumerate() {
            *o += amp * (step * t as f64).cos();
        }
        h += 1.0;
    }
    let max = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max > 0.0 {
        out.iter_mut().for_each(|v| *v *= peak / max);
    }
    Waveform {
        samples: out,
        sample_rate,
    }
}

/// Deterministic white noise in `[-amplitude, amplitude)`.
pub fn noise(amplitude: f64, secs: f64, sample_rate: u32, seed: u64) -> Waveform {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = (secs * f64::from(sample_rate)).round() as usize;
    Waveform {
        samples: (0..n)
            .map(|_| rng.random_range(-amplitude..amplitude))
            .collect(),
        sample_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_shape() {
        assert_eq!(envelope_db(&TWO_FORMANTS, 16.0, 1000.0), 0.0);
        assert_eq!(envelope_db(&TWO_FORMANTS, 16.0, 3000.0), -10.0);
        assert_eq!(envelope_db(&TWO_FORMANTS, 16.0, 1500.0), -8.0);
    }

    #[test]
    fn vowel_is_periodic_and_normalised() {
        let v = vowel(100.0, &TWO_FORMANTS, 16.0, 0.5, 0.1, 16_000);
        assert_eq!(v.len(), 1600);
        assert!((v.peak() - 0.5).abs() < 1e-12);
        for t in 0..1440 {
            assert!((v.samples[t] - v.samples[t + 160]).abs() < 1e-9);
        }
    }
}
