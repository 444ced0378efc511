//! Shared inputs for the benchmarks.

use sfwarp::synth::{vowel, TWO_FORMANTS};
use sfwarp::Waveform;

/// A voiced utterance of `secs` seconds at 16 kHz.
pub fn utterance(secs: f64) -> Waveform {
    vowel(130.0, &TWO_FORMANTS, 16.0, 0.5, secs, 16_000)
}
