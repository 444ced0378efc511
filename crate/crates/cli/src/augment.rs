use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sfwarp::{read_wav, write_wav, AugmentConfig, Augmenter, DrawnCoefficients, Method};

use crate::decompose::write_decomposition;
use crate::CliError;

/// File name of the manifest inside the output directory.
pub const MANIFEST_NAME: &str = "manifest.tsv";

/// One batch augmentation job.
#[derive(Debug, Clone)]
pub struct JobSpec {
    /// Files or directories; directories contribute their `*.wav` entries.
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub config: AugmentConfig,
    pub copies: usize,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
    pub dump_matrices: bool,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// Output file name, relative to the manifest's directory.
    pub output: String,
    pub method: Method,
    pub coefficients: DrawnCoefficients,
    pub seed: u64,
    pub utterance_index: u64,
}

impl fmt::Display for ManifestEntry {
    /// Tab-separated; coefficients the method ignores are written as `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.coefficients;
        let (alpha, beta, eta) = match self.method {
            Method::Sfw => (c.alpha.to_string(), c.beta.to_string(), "-".into()),
            Method::Vtlp => ("-".into(), "-".into(), c.eta.to_string()),
            Method::GlOnly => ("-".into(), "-".into(), "-".to_string()),
        };
        write!(
            f,
            "{}\t{}\t{alpha}\t{beta}\t{eta}\t{}\t{}",
            self.output, self.method, self.seed, self.utterance_index
        )
    }
}

/// An input that could not be processed.
#[derive(Debug)]
pub struct Failure {
    pub input: PathBuf,
    pub error: CliError,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.error {
            CliError::Core(e) if e.path().is_none() => {
                write!(f, "{}: {e}", self.input.display())
            }
            e => e.fmt(f),
        }
    }
}

#[derive(Debug)]
pub struct AugmentSummary {
    pub inputs: usize,
    pub entries: Vec<ManifestEntry>,
    pub failures: Vec<Failure>,
    pub manifest: PathBuf,
}

impl AugmentSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

/// Expands directories to their `*.wav` files (not recursive) and returns
/// the sorted, de-duplicated input list. Explicit file paths are kept even
/// if they do not exist so that they are reported as failures later.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(|source| CliError::Io {
                path: p.clone(),
                source,
            })?;
            for entry in entries {
                let entry = entry.map_err(|source| CliError::Io {
                    path: p.clone(),
                    source,
                })?;
                let path = entry.path();
                if path.is_file() && is_wav(&path) {
                    files.push(path);
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    files.dedup();
    if files.is_empty() {
        return Err(CliError::NoInputs);
    }
    Ok(files)
}

/// `<stem>.<tag><copy>.wav`, e.g. `utt01.sfw0.wav`.
pub fn output_name(input: &Path, method: Method, copy: usize) -> String {
    let stem = input
        .file_stem()
        .map_or_else(|| "input".into(), |s| s.to_string_lossy());
    format!("{stem}.{}{copy}.wav", method.file_tag())
}

fn check_spec(spec: &JobSpec, inputs: &[PathBuf]) -> Result<(), CliError> {
    if spec.copies == 0 {
        return Err(CliError::InvalidSpec("--copies must be at least 1".into()));
    }
    if spec.jobs == Some(0) {
        return Err(CliError::InvalidSpec("--jobs must be at least 1".into()));
    }
    let mut stems: HashMap<String, &Path> = HashMap::new();
    for input in inputs {
        let name = output_name(input, spec.config.method, 0);
        if let Some(other) = stems.insert(name, input) {
            return Err(CliError::InvalidSpec(format!(
                "{} and {} would write the same output names",
                other.display(),
                input.display()
            )));
        }
        for copy in 0..spec.copies {
            let out = spec
                .out_dir
                .join(output_name(input, spec.config.method, copy));
            if inputs.contains(&out) {
                return Err(CliError::InvalidSpec(format!(
                    "output {} would overwrite an input",
                    out.display()
                )));
            }
        }
    }
    Ok(())
}

fn process_file(
    augmenter: &Augmenter,
    spec: &JobSpec,
    file_index: usize,
    input: &Path,
) -> Result<Vec<ManifestEntry>, CliError> {
    let w = read_wav(input)?;
    let cfg = augmenter.config();
    let mut outputs = Vec::with_capacity(spec.copies);
    for copy in 0..spec.copies {
        let utterance_index = (file_index * spec.copies + copy) as u64;
        let (out, coefficients) = augmenter.augment(&w, utterance_index)?;
        outputs.push((copy, out, coefficients, utterance_index));
    }
    if spec.dump_matrices {
        let stem = input.file_stem().unwrap_or_default();
        write_decomposition(&augmenter.analyze(&w)?, &spec.out_dir.join(stem), None)?;
    }
    let mut entries = Vec::with_capacity(spec.copies);
    for (copy, out, coefficients, utterance_index) in outputs {
        let name = output_name(input, cfg.method, copy);
        let gain = write_wav(spec.out_dir.join(&name), &out)?;
        if gain != 1.0 {
            log::info!("{name}: normalised by {gain:.4}");
        }
        entries.push(ManifestEntry {
            output: name,
            method: cfg.method,
            coefficients,
            seed: cfg.seed,
            utterance_index,
        });
    }
    log::debug!("{}: {} copies", input.display(), spec.copies);
    Ok(entries)
}

/// Augments every input `copies` times and writes the manifest.
///
/// Files are processed in parallel, but the utterance index of each copy
/// (`file_index * copies + copy`) and the manifest order depend only on the
/// sorted input list. Per-file failures are collected, not fatal.
pub fn cmd_augment(spec: &JobSpec) -> Result<AugmentSummary, CliError> {
    let inputs = collect_inputs(&spec.inputs)?;
    check_spec(spec, &inputs)?;
    let augmenter = Augmenter::new(spec.config.clone())?;
    fs::create_dir_all(&spec.out_dir).map_err(|source| CliError::Io {
        path: spec.out_dir.clone(),
        source,
    })?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        inputs
            .par_iter()
            .enumerate()
            .map(|(i, input)| process_file(&augmenter, spec, i, input))
            .collect()
    });

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (input, result) in inputs.iter().zip(results) {
        match result {
            Ok(e) => entries.extend(e),
            Err(error) => {
                let failure = Failure {
                    input: input.clone(),
                    error,
                };
                log::error!("{failure}");
                failures.push(failure);
            }
        }
    }

    let manifest = spec.out_dir.join(MANIFEST_NAME);
    let mut text = String::new();
    for e in &entries {
        text.push_str(&e.to_string());
        text.push('\n');
    }
    fs::File::create(&manifest)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|source| CliError::Io {
            path: manifest.clone(),
            source,
        })?;

    Ok(AugmentSummary {
        inputs: inputs.len(),
        entries,
        failures,
        manifest,
    })
}
