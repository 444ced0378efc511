//! Built-in property checks on synthetic signals.
//!
//! [`run`] exercises the analysis/synthesis chain end to end and reports
//! each property separately. [`run_with`] accepts replacement kernels so a
//! deliberately broken implementation can be shown to be caught.

use std::fmt;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envelope::{decompose, estimate_envelope, recombine};
use crate::error::Result;
use crate::reconstruct::{griffin_lim_traced, GriffinLimConfig, InitPhase};
use crate::signal_io::Waveform;
use crate::stft::{power, FramingParams, PowerSpectrogram, StftPlan};
use crate::synth::tone;
use crate::warp::{warp_frame, WarpCoefficient};

/// Signature of a single-frame warp kernel.
pub type WarpFn = fn(&[f64], WarpCoefficient) -> Result<Vec<f64>>;

/// Kernels under test.
#[derive(Clone, Copy)]
pub struct Kernels {
    pub warp: WarpFn,
}

impl Default for Kernels {
    fn default() -> Self {
        Self { warp: warp_frame }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<4} {:<22} {} ({:.0} ms)",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail,
                c.elapsed.as_secs_f64() * 1e3
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn noise(rng: &mut ChaCha8Rng, len: usize) -> Waveform {
    Waveform {
        samples: (0..len).map(|_| rng.random_range(-0.5..0.5)).collect(),
        sample_rate: 16_000,
    }
}

fn random_power(rng: &mut ChaCha8Rng, frames: usize) -> PowerSpectrogram {
    PowerSpectrogram {
        values: Array2::from_shape_fn((frames, 257), |_| rng.random_range(0.0..1.0)),
        params: FramingParams::default(),
    }
}

fn stft_round_trip(rng: &mut ChaCha8Rng) -> Outcome {
    let plan = StftPlan::new(FramingParams::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let x = noise(rng, 16_000);
        let y = plan
            .forward(&x)
            .and_then(|s| plan.inverse(&s))
            .map_err(|e| e.to_string())?;
        let margin = plan.params().window_len();
        let hi = y.len() - margin;
        let num: f64 = (margin..hi)
            .map(|i| (y.samples[i] - x.samples[i]).powi(2))
            .sum();
        let den: f64 = (margin..hi).map(|i| x.samples[i].powi(2)).sum();
        worst = worst.max((num / den).sqrt());
    }
    ensure(worst < 1e-6, || format!("relative error {worst:.2e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn envelope_oracle(rng: &mut ChaCha8Rng) -> Outcome {
    let impulse = estimate_envelope(&[1.0, 0.0, 0.0, 0.0, 0.0], 0.2).map_err(|e| e.to_string())?;
    ensure(impulse == [1.0, 0.8, 0.64, 0.512, 0.4096], || {
        format!("impulse response {impulse:?}")
    })?;
    let mut frames = 0;
    for gamma in [0.05, 0.2, 0.8] {
        for _ in 0..100 {
            let y: Vec<f64> = (0..257).map(|_| rng.random_range(0.0..1.0)).collect();
            let v = estimate_envelope(&y, gamma).map_err(|e| e.to_string())?;
            // Ascending and descending passes evaluated separately.
            let mut up = y.clone();
            for i in 1..up.len() {
                up[i] = y[i].max(up[i - 1] + gamma * (y[i] - up[i - 1]));
            }
            let mut down = y.clone();
            for i in (0..down.len() - 1).rev() {
                down[i] = y[i].max(down[i + 1] + gamma * (y[i] - down[i + 1]));
            }
            for i in 0..y.len() {
                let expected = up[i].max(down[i]);
                ensure(v[i] == expected, || {
                    format!("gamma {gamma}, bin {i}: {} != {expected}", v[i])
                })?;
            }
            frames += 1;
        }
    }
    Ok(format!("{frames} frames exact"))
}

fn warp_identity(rng: &mut ChaCha8Rng, k: &Kernels) -> Outcome {
    for _ in 0..50 {
        let f: Vec<f64> = (0..257).map(|_| rng.random_range(0.0..10.0)).collect();
        let out = (k.warp)(&f, WarpCoefficient::IDENTITY).map_err(|e| e.to_string())?;
        ensure(out == f, || "lambda = 1 altered the frame".to_string())?;
    }
    let lam = |v| WarpCoefficient::new(v).expect("constant is valid");
    let a = (k.warp)(&[0.0, 10.0, 20.0, 30.0], lam(2.0)).map_err(|e| e.to_string())?;
    ensure(a == [0.0, 5.0, 10.0, 15.0], || {
        format!("stretch gave {a:?}")
    })?;
    let b = (k.warp)(&[1.0, 2.0, 3.0, 4.0], lam(0.5)).map_err(|e| e.to_string())?;
    ensure(b == [1.0, 3.0, 4.0, 4.0], || format!("compress gave {b:?}"))?;
    Ok("identity and worked cases exact".into())
}

fn warp_shift(k: &Kernels) -> Outcome {
    let p = FramingParams::default();
    let plan = StftPlan::new(p).map_err(|e| e.to_string())?;
    let s = plan
        .forward(&tone(500.0, 0.5, 0.5, 16_000))
        .map_err(|e| e.to_string())?;
    let mean = power(&s).mean_frame();
    let warped = (k.warp)(
        &mean,
        WarpCoefficient::new(1.25).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let argmax = |v: &[f64]| {
        v.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i)
    };
    let (before, after) = (argmax(&mean), argmax(&warped));
    ensure(before == 16 && after == 20, || {
        format!("500 Hz peak at bin {before}, warped by 1.25 to bin {after} (want 16 -> 20)")
    })?;
    Ok(format!("500 Hz tone bin {before} -> {after}"))
}

fn gl_monotone(rng: &mut ChaCha8Rng) -> Outcome {
    let cfg = GriffinLimConfig {
        iterations: 8,
        init_phase: InitPhase::Zero,
    };
    for trial in 0..3 {
        let target = random_power(rng, 30);
        let trace = griffin_lim_traced(&target, None, &cfg).map_err(|e| e.to_string())?;
        for (j, w) in trace.errors.windows(2).enumerate() {
            ensure(w[1] <= w[0] + 1e-9, || {
                format!(
                    "trial {trial}: error rose at iteration {}: {} -> {}",
                    j + 1,
                    w[0],
                    w[1]
                )
            })?;
        }
    }
    Ok("3 targets, 8 iterations".into())
}

fn decompose_identity(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut p = random_power(rng, 20);
        p.values.mapv_inplace(|v| v * v * 100.0);
        let sf = decompose(&p, 0.2).map_err(|e| e.to_string())?;
        let back = recombine(&sf).map_err(|e| e.to_string())?;
        for (a, b) in back.values.iter().zip(p.values.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max error {worst:.2e}"))?;
    Ok(format!("max error {worst:.1e}"))
}

/// Runs every check with the library's own kernels.
pub fn run() -> Report {
    run_with(&Kernels::default())
}

/// Runs every check, routing warps through `kernels`.
pub fn run_with(kernels: &Kernels) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut report = Report::default();
    let mut record = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        report.checks.push(CheckResult {
            name,
            passed,
            detail,
            elapsed,
        });
    };
    record("stft-round-trip", &mut || stft_round_trip(&mut rng));
    record("envelope-oracle", &mut || envelope_oracle(&mut rng));
    record("warp-identity", &mut || warp_identity(&mut rng, kernels));
    record("warp-shift", &mut || warp_shift(kernels));
    record("griffin-lim-monotone", &mut || gl_monotone(&mut rng));
    record("decompose-recombine", &mut || decompose_identity(&mut rng));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes() {
        let r = run();
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.checks.len(), 6);
    }

    #[test]
    fn broken_identity_is_reported() {
        fn off_by_one(f: &[f64], lambda: WarpCoefficient) -> Result<Vec<f64>> {
            let mut out = warp_frame(f, lambda)?;
            if let Some(first) = out.first_mut() {
                *first += 1e-3;
            }
            Ok(out)
        }
        let r = run_with(&Kernels { warp: off_by_one });
        assert!(!r.all_passed());
        assert!(!r.get("warp-identity").unwrap().passed);
        assert!(r.get("stft-round-trip").unwrap().passed);
        assert!(r.to_string().contains("FAIL warp-identity"));
    }
}
