use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sfwarp::{AugmentConfig, FramingParams, GriffinLimConfig, InitPhase, Method, WarpRange};

#[derive(Debug, Parser)]
#[command(
    name = "sfwarp",
    version,
    about = "Source-filter warping augmentation for speech"
)]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write warped copies of every input utterance plus a manifest.
    Augment(AugmentArgs),
    /// Dump power, envelope and source matrices of one file as CSV.
    Decompose(DecomposeArgs),
    /// Run the built-in property checks.
    Selftest,
}

/// Analysis, warping and reconstruction settings shared by all commands.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// sfw, vtlp or gl-only.
    #[arg(long, default_value = "sfw")]
    pub method: Method,

    /// Source warp range, `LO:HI` or a single value [default: 1:1.3].
    #[arg(long, value_name = "LO:HI")]
    pub alpha: Option<WarpRange>,

    /// Filter warp range [default: 1:1.3].
    #[arg(long, value_name = "LO:HI")]
    pub beta: Option<WarpRange>,

    /// Whole-spectrum warp range for vtlp [default: 1:1.2].
    #[arg(long, value_name = "LO:HI")]
    pub eta: Option<WarpRange>,

    /// Envelope smoothing factor in (0, 1).
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,

    /// FFT size; at least the window length.
    #[arg(long, value_name = "N", default_value_t = 512)]
    pub fft: usize,

    /// Analysis window length.
    #[arg(long, value_name = "MS", default_value_t = 25.0)]
    pub win_ms: f64,

    /// Frame hop.
    #[arg(long, value_name = "MS", default_value_t = 10.0)]
    pub hop_ms: f64,

    /// Griffin-Lim iterations.
    #[arg(long, value_name = "N", default_value_t = 8)]
    pub gl_iters: usize,

    /// Griffin-Lim starting phase.
    #[arg(long, value_name = "original|zero", default_value = "original")]
    pub gl_init: InitPhase,

    /// Start Griffin-Lim from the unwarped input phase.
    #[arg(long)]
    pub no_phase_warp: bool,

    /// Base seed; each copy draws from its own stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ConfigArgs {
    pub fn to_config(&self) -> sfwarp::Result<AugmentConfig> {
        let defaults = AugmentConfig::default();
        let cfg = AugmentConfig {
            method: self.method,
            alpha_range: self.alpha.unwrap_or(defaults.alpha_range),
            beta_range: self.beta.unwrap_or(defaults.beta_range),
            eta_range: self.eta.unwrap_or(defaults.eta_range),
            gamma: self.gamma,
            framing: FramingParams {
                window_ms: self.win_ms,
                hop_ms: self.hop_ms,
                fft_size: self.fft,
                ..defaults.framing
            },
            gl: GriffinLimConfig {
                iterations: self.gl_iters,
                init_phase: self.gl_init,
            },
            warp_phase: !self.no_phase_warp,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct AugmentArgs {
    /// WAV files or directories (scanned for `*.wav`).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,

    /// Output directory; created if missing.
    #[arg(short, long)]
    pub out: PathBuf,

    /// Augmented copies per input utterance.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,

    /// Worker threads [default: available cores].
    #[arg(short, long)]
    pub jobs: Option<usize>,

    /// Also write power/envelope/source CSVs for every input.
    #[arg(long)]
    pub dump_matrices: bool,

    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    pub input: PathBuf,

    /// Prefix for the CSV files [default: input path without extension].
    #[arg(long)]
    pub out_prefix: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

impl DecomposeArgs {
    /// `(alpha, beta)` for the warped dump, if either range was given.
    ///
    /// A missing coefficient is 1; a proper range is sampled with utterance
    /// index 0 so the choice is reproducible from `--seed`.
    pub fn warp(&self, cfg: &AugmentConfig) -> Option<(f64, f64)> {
        if self.config.alpha.is_none() && self.config.beta.is_none() {
            return None;
        }
        let unit = WarpRange::fixed(1.0).expect("1 is a valid coefficient");
        let cfg = AugmentConfig {
            alpha_range: self.config.alpha.unwrap_or(unit),
            beta_range: self.config.beta.unwrap_or(unit),
            ..cfg.clone()
        };
        let c = sfwarp::draw_coefficients(&cfg, 0);
        Some((c.alpha, c.beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flag_defaults_match_library_defaults() {
        let cli = Cli::try_parse_from(["sfwarp", "augment", "--out", "o", "x.wav"]).unwrap();
        let Command::Augment(args) = cli.command else {
            panic!("parsed the wrong subcommand");
        };
        assert_eq!(args.config.to_config().unwrap(), AugmentConfig::default());
        assert_eq!(args.copies, 1);
    }

    #[test]
    fn every_hyperparameter_is_reachable() {
        let cli = Cli::try_parse_from([
            "sfwarp",
            "decompose",
            "in.wav",
            "--method",
            "vtlp",
            "--alpha",
            "1.1",
            "--beta",
            "1:1.2",
            "--eta",
            "1.05:1.1",
            "--gamma",
            "0.3",
            "--fft",
            "1024",
            "--win-ms",
            "32",
            "--hop-ms",
            "8",
            "--gl-iters",
            "16",
            "--gl-init",
            "zero",
            "--seed",
            "9",
        ])
        .unwrap();
        let Command::Decompose(args) = cli.command else {
            panic!("parsed the wrong subcommand");
        };
        let cfg = args.config.to_config().unwrap();
        assert_eq!(cfg.method, Method::Vtlp);
        assert_eq!((cfg.alpha_range.lo(), cfg.alpha_range.hi()), (1.1, 1.1));
        assert_eq!((cfg.eta_range.lo(), cfg.eta_range.hi()), (1.05, 1.1));
        assert_eq!(cfg.gamma, 0.3);
        assert_eq!(cfg.framing.fft_size, 1024);
        assert_eq!(cfg.framing.window_len(), 512);
        assert_eq!(cfg.framing.hop_len(), 128);
        assert_eq!(cfg.gl.iterations, 16);
        assert_eq!(cfg.gl.init_phase, InitPhase::Zero);
        assert_eq!(cfg.seed, 9);
        let (alpha, beta) = args.warp(&cfg).unwrap();
        assert_eq!(alpha, 1.1);
        assert!((1.0..=1.2).contains(&beta));
    }

    #[test]
    fn decompose_without_coefficients_has_no_warp() {
        let cli = Cli::try_parse_from(["sfwarp", "decompose", "in.wav"]).unwrap();
        let Command::Decompose(args) = cli.command else {
            panic!("parsed the wrong subcommand");
        };
        assert!(args.warp(&args.config.to_config().unwrap()).is_none());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        for argv in [
            &["sfwarp", "augment", "--out", "o"][..],
            &[
                "sfwarp", "augment", "--out", "o", "--method", "pitch", "x.wav",
            ],
            &["sfwarp", "augment", "--out", "o", "--alpha", "a:b", "x.wav"],
            &[
                "sfwarp",
                "augment",
                "--out",
                "o",
                "--gl-init",
                "random",
                "x.wav",
            ],
        ] {
            assert_eq!(
                Cli::try_parse_from(argv).unwrap_err().exit_code(),
                2,
                "{argv:?}"
            );
        }
    }
}
