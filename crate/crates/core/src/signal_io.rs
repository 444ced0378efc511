//! Mono WAV input and output.
//!
//! Reading accepts 16-bit PCM (format code 1) and 32-bit IEEE float
//! (format code 3). Writing always produces 16-bit PCM at the waveform's
//! sample rate.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// Mono PCM samples in `[-1, 1]` plus their sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    /// Validating constructor.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let w = Self {
            samples,
            sample_rate,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::InvalidWaveform(
                "sample rate must be positive".into(),
            ));
        }
        if let Some(i) = self.samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidWaveform(format!(
                "sample {i} is not finite ({})",
                self.samples[i]
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }
}

fn malformed(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(source) if source.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::MalformedWav {
                path: path.to_path_buf(),
                reason: "file is truncated".into(),
            }
        }
        hound::Error::IoError(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        hound::Error::Unsupported => Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            found: "a format hound cannot decode".into(),
        },
        other => Error::MalformedWav {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Reads a mono 16-bit PCM or 32-bit float WAV file.
///
/// Integer samples are divided by 32768. Multichannel files are rejected;
/// there is no implicit downmix.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| malformed(path, e))?;
    let spec = reader.spec();

    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => {
            check_channels(path, spec)?;
            reader
                .into_samples::<i16>()
                .map(|s| s.map(|v| f64::from(v) / 32768.0))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| malformed(path, e))?
        }
        (SampleFormat::Float, 32) => {
            check_channels(path, spec)?;
            reader
                .into_samples::<f32>()
                .map(|s| s.map(f64::from))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| malformed(path, e))?
        }
        (SampleFormat::Int, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                found: format!("{bits}-bit integer PCM"),
            })
        }
        (SampleFormat::Float, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                found: format!("{bits}-bit float"),
            })
        }
    };
    let w = Waveform {
        samples,
        sample_rate: spec.sample_rate,
    };
    w.validate().map_err(|e| Error::MalformedWav {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(w)
}

fn check_channels(path: &Path, spec: WavSpec) -> Result<()> {
    if spec.channels != 1 {
        return Err(Error::ChannelCount {
            path: path.to_path_buf(),
            found: spec.channels,
        });
    }
    Ok(())
}

/// Quantises `x` (assumed in `[-1, 1]`) to 16 bits without wrapping.
fn to_i16(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Writes a waveform as mono 16-bit PCM.
///
/// If any sample exceeds unit magnitude the whole signal is rescaled by its
/// peak and a warning is logged. Returns the gain that was applied.
pub fn write_wav(path: impl AsRef<Path>, w: &Waveform) -> Result<f64> {
    let path = path.as_ref();
    w.validate()?;
    let peak = w.peak();
    let gain = if peak > 1.0 {
        log::warn!(
            "{}: peak {peak:.4} exceeds full scale, normalising by {:.4}",
            path.display(),
            1.0 / peak
        );
        1.0 / peak
    } else {
        1.0
    };

    let spec = WavSpec {
        channels: 1,
        sample_rate: w.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let io_err = |e: hound::Error| match e {
        hound::Error::IoError(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::MalformedWav {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(io_err)?;
    {
        let mut samples = writer.get_i16_writer(w.samples.len() as u32);
        for &x in &w.samples {
            samples.write_sample(to_i16(x * gain));
        }
        samples.flush().map_err(io_err)?;
    }
    writer.finalize().map_err(io_err)?;
    Ok(gain)
}
