use std::path::Path;

use serde::Deserialize;

use super::{CsiErrors, Mode, SchemeSpec, SweepSpec, SweepVariable};
use crate::asymptotic::DEFAULT_SAMPLES;
use crate::beamformer::Scheme;
use crate::channel::DynamicErrorParams;
use crate::config::{NetworkConfig, SeedSpec};
use crate::error::{Error, Result};
use crate::sic::{ErgodicOptions, SicModel};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    sweep_variable: SweepVariable,
    values: Vec<f64>,
    network: NetworkSection,
    schemes: Vec<SchemeEntry>,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_mode")]
    mode: Mode,
    dynamic_error: Option<DynamicErrorParams>,
    e1_override: Option<f64>,
    /// `[[e1_sq, e2_sq], ...]`; absent means the template errors.
    csi_levels: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_samples")]
    expectation_samples: usize,
    #[serde(default)]
    genie_sic: bool,
}

fn default_trials() -> usize {
    1000
}
fn default_seed() -> u64 {
    42
}
fn default_mode() -> Mode {
    Mode::Ergodic
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn unit() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkSection {
    m: usize,
    n: Option<usize>,
    k: usize,
    pnr_db: f64,
    qnr_db: f64,
    #[serde(default = "unit")]
    sigma1_sq: f64,
    #[serde(default = "unit")]
    sigma2_sq: f64,
    #[serde(default)]
    e1_sq: f64,
    #[serde(default)]
    e2_sq: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SchemeEntry {
    Name(String),
    Regularized {
        scheme: String,
        alpha_mmse: f64,
        alpha_rzf: f64,
    },
}

impl SchemeEntry {
    fn into_spec(self) -> Result<SchemeSpec> {
        match self {
            SchemeEntry::Name(name) => Ok(match name.parse::<Scheme>()? {
                Scheme::MmseRzf => SchemeSpec::MmseRzfOptimized,
                s => SchemeSpec::Fixed(s),
            }),
            SchemeEntry::Regularized { scheme, alpha_mmse, alpha_rzf } => match scheme.parse::<Scheme>()? {
                Scheme::MmseRzf => Ok(SchemeSpec::MmseRzf { alpha_mmse, alpha_rzf }),
                s => Err(Error::InvalidConfig(format!("{s} takes no regularizers"))),
            },
        }
    }
}

/// Parses a TOML sweep description. `path` only labels errors.
pub fn parse_sweep_spec(text: &str, path: &Path) -> Result<SweepSpec> {
    let parse_err = |message: String| Error::Parse { path: path.to_path_buf(), message };
    let file: SweepFile = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let net = &file.network;
    let (s1, s2) = (net.sigma1_sq, net.sigma2_sq);
    let fixed = NetworkConfig::new(
        net.m,
        net.n.unwrap_or(net.m),
        net.k,
        s1 * crate::config::db_to_linear(net.pnr_db),
        s2 * crate::config::db_to_linear(net.qnr_db),
        s1,
        s2,
        net.e1_sq,
        net.e2_sq,
    )?;
    let schemes = file.schemes.into_iter().map(SchemeEntry::into_spec).collect::<Result<_>>()?;
    let mut spec = SweepSpec::new(file.sweep_variable, file.values, fixed, schemes);
    spec.trials = file.trials;
    spec.seed = SeedSpec::new(file.seed, 0);
    spec.mode = file.mode;
    spec.dynamic_error = file.dynamic_error;
    spec.e1_override = file.e1_override;
    if let Some(levels) = file.csi_levels {
        spec.csi = levels.into_iter().map(|[e1_sq, e2_sq]| CsiErrors::Fixed { e1_sq, e2_sq }).collect();
    }
    spec.expectation_samples = file.expectation_samples;
    if file.genie_sic {
        spec.options = ErgodicOptions { sic: SicModel::Genie, ..spec.options };
    }
    spec.validate()?;
    Ok(spec)
}

pub fn load_sweep_spec(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_sweep_spec(&text, path)
}
