//! Spectral envelope estimation and source/filter separation.
//!
//! The envelope `V` of a power frame `Y` is a decaying peak-hold:
//!
//! ```text
//! V[i] = max(Y[i], V[i-1] + gamma * (Y[i] - V[i-1]))
//! ```
//!
//! run once from the lowest bin upward and once from the highest bin
//! downward, each pass seeded with the first value it visits. The two passes
//! are independent and combined by element-wise maximum. The source is the
//! residual `Y / V`, so the pair multiplies back to the input.

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::stft::{FramingParams, PowerSpectrogram};

/// Division floor used when extracting the source from silent bins.
pub const SOURCE_EPSILON: f64 = 1e-10;

/// Default smoothing factor.
pub const DEFAULT_GAMMA: f64 = 0.2;

pub fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

fn check_frame(frame: &[f64]) -> Result<()> {
    match frame
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        Some((index, &value)) => Err(Error::InvalidSpectrum { index, value }),
        None => Ok(()),
    }
}

#[inline]
fn step(prev: f64, y: f64, gamma: f64) -> f64 {
    y.max(prev + gamma * (y - prev))
}

/// Writes the envelope of `frame` into `out`. Inputs are not validated.
pub(crate) fn envelope_into(frame: &[f64], gamma: f64, out: &mut [f64]) {
    debug_assert_eq!(frame.len(), out.len());
    let Some(&first) = frame.first() else {
        return;
    };
    // Ascending pass.
    let mut v = first;
    out[0] = v;
    for (o, &y) in out.iter_mut().zip(frame).skip(1) {
        v = step(v, y, gamma);
        *o = v;
    }
    // Descending pass, merged on the fly.
    let last = frame.len() - 1;
    let mut v = frame[last];
    out[last] = out[last].max(v);
    for i in (0..last).rev() {
        v = step(v, frame[i], gamma);
        out[i] = out[i].max(v);
    }
}

/// Estimates the spectral envelope of one power frame.
///
/// The result dominates the input element-wise.
pub fn estimate_envelope(frame: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    check_frame(frame)?;
    let mut out = vec![0.0; frame.len()];
    envelope_into(frame, gamma, &mut out);
    Ok(out)
}

/// Source residual and envelope for every frame of a power spectrogram.
///
/// `source` lies in `[0, 1]`, `filter` dominates the originating power, and
/// `source * filter` reproduces it to within `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceFilterPair {
    pub source: Array2<f64>,
    pub filter: Array2<f64>,
    pub epsilon: f64,
    pub params: FramingParams,
}

impl SourceFilterPair {
    pub fn source_spectrogram(&self) -> PowerSpectrogram {
        PowerSpectrogram {
            values: self.source.clone(),
            params: self.params,
        }
    }

    pub fn filter_spectrogram(&self) -> PowerSpectrogram {
        PowerSpectrogram {
            values: self.filter.clone(),
            params: self.params,
        }
    }
}

/// Splits `p` into source and filter with smoothing factor `gamma`.
pub fn decompose(p: &PowerSpectrogram, gamma: f64) -> Result<SourceFilterPair> {
    check_gamma(gamma)?;
    let mut filter = Array2::<f64>::zeros(p.values.dim());
    for (y, mut v) in p.values.rows().into_iter().zip(filter.rows_mut()) {
        let y = y.to_vec();
        check_frame(&y)?;
        envelope_into(
            &y,
            gamma,
            v.as_slice_mut().expect("fresh array is contiguous"),
        );
    }
    let mut source = Array2::<f64>::zeros(p.values.dim());
    Zip::from(&mut source)
        .and(&p.values)
        .and(&filter)
        .for_each(|s, &y, &v| *s = y / v.max(SOURCE_EPSILON));
    Ok(SourceFilterPair {
        source,
        filter,
        epsilon: SOURCE_EPSILON,
        params: p.params,
    })
}

/// Element-wise product of source and filter.
pub fn recombine(sf: &SourceFilterPair) -> Result<PowerSpectrogram> {
    if sf.source.dim() != sf.filter.dim() {
        return Err(Error::DimensionMismatch(format!(
            "source is {:?}, filter is {:?}",
            sf.source.dim(),
            sf.filter.dim()
        )));
    }
    Ok(PowerSpectrogram {
        values: &sf.source * &sf.filter,
        params: sf.params,
    })
}
