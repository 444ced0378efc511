use sfwarp::synth::{noise, tone, vowel, TWO_FORMANTS};
use sfwarp::{
    augment_gl_only, augment_sfw, augment_vtlp, griffin_lim_traced, istft, power, stft,
    AugmentConfig, Augmenter, FramingParams, GriffinLimConfig, InitPhase, Method, StftPlan,
    Waveform,
};

fn interior_rel_err(a: &[f64], b: &[f64]) -> f64 {
    let (lo, hi) = (400, a.len().min(b.len()) - 400);
    let num: f64 = (lo..hi).map(|i| (a[i] - b[i]).powi(2)).sum();
    let den: f64 = (lo..hi).map(|i| b[i].powi(2)).sum();
    (num / den).sqrt()
}

fn speech_like() -> Waveform {
    vowel(120.0, &TWO_FORMANTS, 16.0, 0.5, 0.8, 16_000)
}

#[test]
fn unit_coefficients_reproduce_round_trip() {
    let cfg = AugmentConfig::default();
    let x = speech_like();
    let rt = istft(&stft(&x, cfg.framing).unwrap()).unwrap();
    let sfw = augment_sfw(&x, 1.0, 1.0, &cfg).unwrap();
    let vtlp = augment_vtlp(&x, 1.0, &cfg).unwrap();
    let gl = augment_gl_only(&x, &cfg).unwrap();
    for y in [&sfw, &vtlp, &gl] {
        assert!(interior_rel_err(&y.samples, &rt.samples) < 1e-5);
        assert!(interior_rel_err(&y.samples, &x.samples) < 1e-5);
    }
}

#[test]
fn vtlp_and_sfw_differ_above_one() {
    let cfg = AugmentConfig::default();
    let x = speech_like();
    let v = augment_vtlp(&x, 1.2, &cfg).unwrap();
    let s = augment_sfw(&x, 1.2, 1.2, &cfg).unwrap();
    assert!(interior_rel_err(&v.samples, &s.samples) > 1e-3);
}

#[test]
fn gl_only_zero_init_does_not_worsen_consistency() {
    let x = speech_like();
    let gl = GriffinLimConfig {
        iterations: 8,
        init_phase: InitPhase::Zero,
    };
    let cfg = AugmentConfig {
        gl,
        ..Default::default()
    };
    let y = Augmenter::new(cfg).unwrap().gl_only(&x).unwrap();
    assert!(interior_rel_err(&y.samples, &x.samples) > 1e-3);

    let target = power(&stft(&x, FramingParams::default()).unwrap());
    let trace = griffin_lim_traced(&target, None, &gl).unwrap();
    assert!(
        trace.errors.last().unwrap() <= &trace.errors[0],
        "{:?}",
        trace.errors
    );
}

#[test]
fn silence_stays_silent() {
    let cfg = AugmentConfig::default();
    let x = Waveform::new(vec![0.0; 8000], 16_000).unwrap();
    for y in [
        augment_sfw(&x, 1.2, 1.1, &cfg).unwrap(),
        augment_vtlp(&x, 1.1, &cfg).unwrap(),
        augment_gl_only(&x, &cfg).unwrap(),
    ] {
        assert!(y.samples.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn length_depends_only_on_input_length() {
    let cfg = AugmentConfig::default();
    let plan = StftPlan::new(cfg.framing).unwrap();
    for len in [400, 401, 559, 560, 8000, 12_345] {
        let x = noise(0.3, len as f64 / 16_000.0, 16_000, len as u64);
        let expected = cfg
            .framing
            .output_len(cfg.framing.frame_count(x.len()).unwrap());
        for y in [
            augment_sfw(&x, 1.3, 1.0, &cfg).unwrap(),
            augment_sfw(&x, 1.0, 1.25, &cfg).unwrap(),
            augment_vtlp(&x, 1.15, &cfg).unwrap(),
            augment_gl_only(&x, &cfg).unwrap(),
        ] {
            assert_eq!(y.len(), expected);
        }
        assert_eq!(plan.params(), cfg.framing);
    }
}

#[test]
fn outputs_finite_and_energy_bounded() {
    let cfg = AugmentConfig::default();
    let inputs = [
        speech_like(),
        vowel(220.0, &TWO_FORMANTS, 16.0, 0.5, 0.8, 16_000),
        noise(0.3, 0.8, 16_000, 3),
        tone(440.0, 0.4, 0.8, 16_000),
    ];
    for x in &inputs {
        for (a, b) in [(1.0, 1.3), (1.3, 1.0), (1.3, 1.3), (1.15, 1.05)] {
            let y = augment_sfw(x, a, b, &cfg).unwrap();
            assert!(y.samples.iter().all(|v| v.is_finite()));
            let ratio = y.rms() / x.rms();
            assert!(
                (0.25..=4.0).contains(&ratio),
                "sfw {a} {b}: rms ratio {ratio}"
            );
        }
        for eta in [1.0, 1.1, 1.2, 1.3] {
            let y = augment_vtlp(x, eta, &cfg).unwrap();
            let ratio = y.rms() / x.rms();
            assert!(
                (0.25..=4.0).contains(&ratio),
                "vtlp {eta}: rms ratio {ratio}"
            );
        }
    }
}

#[test]
fn augment_is_deterministic() {
    let cfg = AugmentConfig {
        method: Method::Sfw,
        seed: 77,
        ..Default::default()
    };
    let aug = Augmenter::new(cfg).unwrap();
    let x = speech_like();
    let (a, ca) = aug.augment(&x, 3).unwrap();
    let (b, cb) = aug.augment(&x, 3).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(a, b);
}

#[test]
fn literal_original_phase_is_available() {
    let x = speech_like();
    let literal = AugmentConfig {
        warp_phase: false,
        ..Default::default()
    };
    let a = augment_sfw(&x, 1.3, 1.0, &literal).unwrap();
    let b = augment_sfw(&x, 1.3, 1.0, &AugmentConfig::default()).unwrap();
    assert_ne!(a, b);
}
