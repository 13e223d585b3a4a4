use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::RateSummary;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 18] = [
    "sweep_var",
    "sweep_value",
    "scheme",
    "mode",
    "M",
    "N",
    "K",
    "pnr_db",
    "qnr_db",
    "e1_sq",
    "e2_sq",
    "alpha_mmse",
    "alpha_rzf",
    "trials",
    "rate_mean_bits",
    "rate_stderr_bits",
    "degenerate_resamples",
    "seed",
];

/// `%.10g`-style rendering: 10 significant digits, trailing zeros trimmed,
/// exponent form outside `[1e-5, 1e10)`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..10).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    let decimals = (9 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io { path: path.to_path_buf(), source },
        other => Error::Parse { path: path.to_path_buf(), message: format!("{other:?}") },
    }
}

fn record(r: &RateSummary) -> Vec<String> {
    let c = &r.config;
    vec![
        r.sweep_variable.tag().into(),
        format_float(r.sweep_value),
        r.scheme.tag().into(),
        r.mode.tag().into(),
        c.m.to_string(),
        c.n.to_string(),
        c.k.to_string(),
        format_float(c.pnr_db()),
        format_float(c.qnr_db()),
        format_float(c.e1_sq),
        format_float(c.e2_sq),
        format_float(r.alpha_mmse),
        format_float(r.alpha_rzf),
        r.trials.to_string(),
        format_float(r.rate_mean),
        format_float(r.rate_stderr),
        r.degenerate_resamples.to_string(),
        r.seed.to_string(),
    ]
}

/// Sidecar listing skipped rows and their reasons, next to the results file.
pub fn skipped_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".skipped.csv");
    path.with_file_name(name)
}

/// Writes the results CSV. Rows with a skip reason keep their NaN rates in
/// the main file; the reasons go to `<path>.skipped.csv`, written only when
/// something was skipped.
pub fn write_results(rows: &[RateSummary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path).map_err(io_err(path))?);
    w.write_record(CSV_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(record(r)).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;

    let skipped: Vec<_> = rows.iter().filter(|r| r.skipped.is_some()).collect();
    if !skipped.is_empty() {
        let side = skipped_path(path);
        let mut w = csv::Writer::from_writer(File::create(&side).map_err(io_err(&side))?);
        w.write_record(["sweep_var", "sweep_value", "scheme", "mode", "K", "e1_sq", "e2_sq", "reason"])
            .map_err(csv_err(&side))?;
        for r in skipped {
            w.write_record([
                r.sweep_variable.tag().to_string(),
                format_float(r.sweep_value),
                r.scheme.tag().into(),
                r.mode.tag().into(),
                r.config.k.to_string(),
                format_float(r.config.e1_sq),
                format_float(r.config.e2_sq),
                r.skipped.clone().unwrap_or_default(),
            ])
            .map_err(csv_err(&side))?;
        }
        w.flush().map_err(io_err(&side))?;
    }
    Ok(())
}

/// Long-format per-trial rates of every ergodic row.
pub fn write_per_trial(rows: &[RateSummary], path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(File::create(path).map_err(io_err(path))?);
    writeln!(file, "sweep_var,sweep_value,scheme,e1_sq,e2_sq,alpha_mmse,alpha_rzf,trial,rate_bits").map_err(io_err(path))?;
    for r in rows {
        for (t, rate) in r.per_trial.iter().enumerate() {
            writeln!(
                file,
                "{},{},{},{},{},{},{},{t},{}",
                r.sweep_variable.tag(),
                format_float(r.sweep_value),
                r.scheme.tag(),
                format_float(r.config.e1_sq),
                format_float(r.config.e2_sq),
                format_float(r.alpha_mmse),
                format_float(r.alpha_rzf),
                format_float(*rate),
            )
            .map_err(io_err(path))?;
        }
    }
    file.flush().map_err(io_err(path))
}

/// A parsed row of a results file.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct ResultRecord {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub scheme: String,
    pub mode: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub pnr_db: f64,
    pub qnr_db: f64,
    pub e1_sq: f64,
    pub e2_sq: f64,
    pub alpha_mmse: f64,
    pub alpha_rzf: f64,
    pub trials: usize,
    pub rate_mean_bits: f64,
    pub rate_stderr_bits: f64,
    pub degenerate_resamples: usize,
    pub seed: u64,
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_reader(File::open(path).map_err(io_err(path))?);
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse { path: path.to_path_buf(), message: format!("unexpected header {header:?}") });
    }
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}
