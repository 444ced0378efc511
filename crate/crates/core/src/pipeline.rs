//! End-to-end augmentation: analysis, warping, and Griffin-Lim resynthesis.
//!
//! Three methods share one analysis/synthesis path so that their outputs are
//! directly comparable:
//!
//! * `sfw`: split each power frame into source and envelope, warp the source
//!   by `alpha` and the envelope by `beta`, multiply back.
//! * `vtlp`: warp the whole power spectrum by a single `eta`.
//! * `gl-only`: no warping; only the spectral round trip.
//!
//! Griffin-Lim starts from the utterance's own phase. When the harmonic
//! structure is warped (`alpha` for `sfw`, `eta` for `vtlp`) that phase is
//! first carried through the same warp with [`warp_phase`], unless
//! `warp_phase` is disabled in the config; an identity warp leaves it
//! untouched, so unit coefficients reproduce the plain round trip.
//!
//! Warping coefficients are drawn once per utterance from a ChaCha stream
//! keyed by `(seed, utterance_index)`, so results never depend on the order
//! in which utterances are processed.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envelope::{check_gamma, decompose, recombine, SourceFilterPair, DEFAULT_GAMMA};
use crate::error::{Error, Result};
use crate::reconstruct::{griffin_lim, GriffinLimConfig};
use crate::signal_io::Waveform;
use crate::stft::{power, ComplexSpectrogram, FramingParams, PowerSpectrogram, StftPlan};
use crate::warp::{warp_phase, warp_spectrogram, WarpCoefficient};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Method {
    #[default]
    Sfw,
    Vtlp,
    GlOnly,
}

impl Method {
    /// Tag used in output file names (`<stem>.<tag><copy>.wav`).
    pub fn file_tag(self) -> &'static str {
        match self {
            Self::Sfw => "sfw",
            Self::Vtlp => "vtlp",
            Self::GlOnly => "gl",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sfw => "sfw",
            Self::Vtlp => "vtlp",
            Self::GlOnly => "gl-only",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sfw" => Ok(Self::Sfw),
            "vtlp" => Ok(Self::Vtlp),
            "gl-only" | "gl_only" | "gl" => Ok(Self::GlOnly),
            other => Err(format!("unknown method {other:?} (sfw|vtlp|gl-only)")),
        }
    }
}

/// Closed sampling interval `[lo, hi]` with `0 < lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpRange {
    lo: f64,
    hi: f64,
}

impl WarpRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidRange { lo, hi })
        }
    }

    /// Degenerate range containing only `v`.
    pub fn fixed(v: f64) -> Result<Self> {
        Self::new(v, v)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.lo..=self.hi).contains(&v)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

impl fmt::Display for WarpRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl FromStr for WarpRange {
    type Err = String;

    /// Parses `LO:HI`, or a single value for a fixed coefficient.
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {v:?} in range {s:?}: {e}"))
        };
        let (lo, hi) = match s.split_once(':') {
            Some((lo, hi)) => (parse(lo)?, parse(hi)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        Self::new(lo, hi).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub method: Method,
    pub alpha_range: WarpRange,
    pub beta_range: WarpRange,
    pub eta_range: WarpRange,
    pub gamma: f64,
    pub framing: FramingParams,
    pub gl: GriffinLimConfig,
    /// Carry the initial phase through the harmonic warp.
    pub warp_phase: bool,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            method: Method::Sfw,
            alpha_range: WarpRange { lo: 1.0, hi: 1.3 },
            beta_range: WarpRange { lo: 1.0, hi: 1.3 },
            eta_range: WarpRange { lo: 1.0, hi: 1.2 },
            gamma: DEFAULT_GAMMA,
            framing: FramingParams::default(),
            gl: GriffinLimConfig::default(),
            warp_phase: true,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        for r in [self.alpha_range, self.beta_range, self.eta_range] {
            WarpRange::new(r.lo, r.hi)?;
        }
        check_gamma(self.gamma)?;
        self.framing.validate()
    }
}

/// Coefficients drawn for one utterance. All three are always drawn so that
/// switching methods does not perturb the others.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawnCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

/// Draws `alpha`, `beta` and `eta` independently and uniformly from their
/// ranges. The stream depends only on `(cfg.seed, utterance_index)`.
pub fn draw_coefficients(cfg: &AugmentConfig, utterance_index: u64) -> DrawnCoefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(utterance_index);
    let alpha = cfg.alpha_range.sample(&mut rng);
    let beta = cfg.beta_range.sample(&mut rng);
    let eta = cfg.eta_range.sample(&mut rng);
    DrawnCoefficients { alpha, beta, eta }
}

/// STFT, power and source/filter split of one utterance.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub complex: ComplexSpectrogram,
    pub power: PowerSpectrogram,
    pub pair: SourceFilterPair,
}

/// Warps source and filter independently and multiplies them back.
pub fn warp_source_filter(
    pair: &SourceFilterPair,
    alpha: WarpCoefficient,
    beta: WarpCoefficient,
) -> Result<PowerSpectrogram> {
    let source = warp_spectrogram(&pair.source_spectrogram(), alpha)?;
    let filter = warp_spectrogram(&pair.filter_spectrogram(), beta)?;
    recombine(&SourceFilterPair {
        source: source.values,
        filter: filter.values,
        epsilon: pair.epsilon,
        params: pair.params,
    })
}

/// Reusable augmenter for one configuration.
#[derive(Debug, Clone)]
pub struct Augmenter {
    cfg: AugmentConfig,
    plan: StftPlan,
}

impl Augmenter {
    pub fn new(cfg: AugmentConfig) -> Result<Self> {
        cfg.validate()?;
        let plan = StftPlan::new(cfg.framing)?;
        Ok(Self { cfg, plan })
    }

    pub fn config(&self) -> &AugmentConfig {
        &self.cfg
    }

    fn spectrum(&self, w: &Waveform) -> Result<ComplexSpectrogram> {
        w.validate()?;
        if w.sample_rate != self.cfg.framing.sample_rate {
            return Err(Error::SampleRate {
                found: w.sample_rate,
                expected: self.cfg.framing.sample_rate,
            });
        }
        self.plan.forward(w)
    }

    pub fn analyze(&self, w: &Waveform) -> Result<Analysis> {
        let complex = self.spectrum(w)?;
        let power = power(&complex);
        let pair = decompose(&power, self.cfg.gamma)?;
        Ok(Analysis {
            complex,
            power,
            pair,
        })
    }

    fn resynthesize(
        &self,
        target: &PowerSpectrogram,
        phase: &ComplexSpectrogram,
        harmonic_warp: WarpCoefficient,
    ) -> Result<Waveform> {
        let mut out = if self.cfg.warp_phase && harmonic_warp != WarpCoefficient::IDENTITY {
            let warped = warp_phase(phase, harmonic_warp);
            griffin_lim(target, Some(&warped), &self.cfg.gl)?
        } else {
            griffin_lim(target, Some(phase), &self.cfg.gl)?
        };
        self.plan.attenuate_edges(&mut out);
        Ok(out)
    }

    pub fn sfw(&self, w: &Waveform, alpha: f64, beta: f64) -> Result<Waveform> {
        let (alpha, beta) = (WarpCoefficient::new(alpha)?, WarpCoefficient::new(beta)?);
        let a = self.analyze(w)?;
        let target = warp_source_filter(&a.pair, alpha, beta)?;
        self.resynthesize(&target, &a.complex, alpha)
    }

    pub fn vtlp(&self, w: &Waveform, eta: f64) -> Result<Waveform> {
        let eta = WarpCoefficient::new(eta)?;
        let complex = self.spectrum(w)?;
        let target = warp_spectrogram(&power(&complex), eta)?;
        self.resynthesize(&target, &complex, eta)
    }

    pub fn gl_only(&self, w: &Waveform) -> Result<Waveform> {
        let complex = self.spectrum(w)?;
        self.resynthesize(&power(&complex), &complex, WarpCoefficient::IDENTITY)
    }

    /// Applies the configured method with already-drawn coefficients.
    pub fn apply(&self, w: &Waveform, c: &DrawnCoefficients) -> Result<Waveform> {
        match self.cfg.method {
            Method::Sfw => self.sfw(w, c.alpha, c.beta),
            Method::Vtlp => self.vtlp(w, c.eta),
            Method::GlOnly => self.gl_only(w),
        }
    }

    /// Draws coefficients for `utterance_index` and applies the method.
    pub fn augment(
        &self,
        w: &Waveform,
        utterance_index: u64,
    ) -> Result<(Waveform, DrawnCoefficients)> {
        let c = draw_coefficients(&self.cfg, utterance_index);
        Ok((self.apply(w, &c)?, c))
    }
}

/// Source-filter warping of one utterance.
pub fn augment_sfw(w: &Waveform, alpha: f64, beta: f64, cfg: &AugmentConfig) -> Result<Waveform> {
    Augmenter::new(cfg.clone())?.sfw(w, alpha, beta)
}

/// Whole-spectrum linear warping of one utterance.
pub fn augment_vtlp(w: &Waveform, eta: f64, cfg: &AugmentConfig) -> Result<Waveform> {
    Augmenter::new(cfg.clone())?.vtlp(w, eta)
}

/// Spectral round trip through Griffin-Lim without warping.
pub fn augment_gl_only(w: &Waveform, cfg: &AugmentConfig) -> Result<Waveform> {
    Augmenter::new(cfg.clone())?.gl_only(w)
}
