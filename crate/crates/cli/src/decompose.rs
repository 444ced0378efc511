use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sfwarp::{read_wav, warp_source_filter, Analysis, AugmentConfig, Augmenter, WarpCoefficient};

use crate::CliError;

/// Writes a matrix as CSV: one line per frame, one plain decimal per bin.
pub fn write_matrix(path: &Path, m: &sfwarp::PowerSpectrogram) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for row in m.values.rows() {
        let line = row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub(crate) fn write_decomposition(
    a: &Analysis,
    prefix: &Path,
    warp: Option<(f64, f64)>,
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::with_capacity(4);
    let mut emit = |suffix: &str, m: &sfwarp::PowerSpectrogram| {
        let path = with_suffix(prefix, suffix);
        write_matrix(&path, m)?;
        written.push(path);
        Ok::<_, CliError>(())
    };
    emit(".power.csv", &a.power)?;
    emit(".envelope.csv", &a.pair.filter_spectrogram())?;
    emit(".source.csv", &a.pair.source_spectrogram())?;
    if let Some((alpha, beta)) = warp {
        let warped = warp_source_filter(
            &a.pair,
            WarpCoefficient::new(alpha)?,
            WarpCoefficient::new(beta)?,
        )?;
        emit(".warped.csv", &warped)?;
    }
    Ok(written)
}

/// Writes `<prefix>.power.csv`, `.envelope.csv`, `.source.csv` and, when
/// `warp = Some((alpha, beta))`, the recombined `.warped.csv`.
pub fn cmd_decompose(
    input: &Path,
    out_prefix: &Path,
    cfg: &AugmentConfig,
    warp: Option<(f64, f64)>,
) -> Result<Vec<PathBuf>, CliError> {
    let augmenter = Augmenter::new(cfg.clone())?;
    let w = read_wav(input)?;
    write_decomposition(&augmenter.analyze(&w)?, out_prefix, warp)
}
