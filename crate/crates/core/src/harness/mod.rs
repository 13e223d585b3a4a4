//! Parameter sweeps over the relay network, the figure presets, and their
//! CSV output.

mod config_file;
mod output;
mod presets;

use serde::{Deserialize, Serialize};

use crate::asymptotic::{optimized_regularizers, AsymptoticModel, DEFAULT_SAMPLES};
use crate::beamformer::{BeamformerKind, Scheme};
use crate::channel::{dynamic_error_powers, DynamicErrorParams};
use crate::config::{db_to_linear, NetworkConfig, SeedSpec};
use crate::error::{Error, Result};
use crate::sic::{ergodic_rate, ErgodicOptions};

pub use config_file::{load_sweep_spec, parse_sweep_spec};
pub use output::{format_float, read_results, write_per_trial, write_results, ResultRecord, CSV_HEADER};
pub use presets::{figure_preset, PRESET_NAMES};

/// The quantity varied along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "K")]
    K,
    #[serde(rename = "e_sq")]
    ESq,
    #[serde(rename = "pnr_qnr")]
    PnrQnr,
    #[serde(rename = "feedback_bits")]
    FeedbackBits,
}

impl SweepVariable {
    pub fn tag(&self) -> &'static str {
        match self {
            SweepVariable::K => "K",
            SweepVariable::ESq => "e_sq",
            SweepVariable::PnrQnr => "pnr_qnr",
            SweepVariable::FeedbackBits => "feedback_bits",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ergodic,
    Asymptotic,
    Both,
}

impl Mode {
    fn runs(&self) -> &'static [RowMode] {
        match self {
            Mode::Ergodic => &[RowMode::Ergodic],
            Mode::Asymptotic => &[RowMode::Asymptotic],
            Mode::Both => &[RowMode::Ergodic, RowMode::Asymptotic],
        }
    }
}

/// Mode of a single result row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowMode {
    Ergodic,
    Asymptotic,
}

impl RowMode {
    pub fn tag(&self) -> &'static str {
        match self {
            RowMode::Ergodic => "ergodic",
            RowMode::Asymptotic => "asymptotic",
        }
    }
}

/// A beamforming scheme as requested in a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeSpec {
    /// MF-MF, ZF-ZF or MF-RZF with their fixed regularizers.
    Fixed(Scheme),
    /// MMSE-RZF with the closed-form MMSE regularizer and the RZF regularizer
    /// optimizing the asymptotic rate, recomputed at every sweep point.
    MmseRzfOptimized,
    /// MMSE-RZF with user-chosen regularizers.
    MmseRzf { alpha_mmse: f64, alpha_rzf: f64 },
}

impl SchemeSpec {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeSpec::Fixed(s) => *s,
            _ => Scheme::MmseRzf,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SchemeSpec::Fixed(Scheme::MmseRzf) => {
                Err(Error::InvalidConfig("MMSE_RZF needs regularizers or the optimized variant".into()))
            }
            SchemeSpec::MmseRzf { alpha_mmse, alpha_rzf } => BeamformerKind::mmse_rzf(*alpha_mmse, *alpha_rzf).map(|_| ()),
            _ => Ok(()),
        }
    }

    fn resolve(&self, cfg: &NetworkConfig, model: &AsymptoticModel) -> Result<BeamformerKind> {
        match *self {
            SchemeSpec::Fixed(s) => {
                BeamformerKind::fixed(s).ok_or_else(|| Error::InvalidConfig(format!("{s} has no fixed regularizers")))
            }
            SchemeSpec::MmseRzfOptimized => {
                let (a, b) = optimized_regularizers(model, cfg)?;
                BeamformerKind::mmse_rzf(a, b)
            }
            SchemeSpec::MmseRzf { alpha_mmse, alpha_rzf } => BeamformerKind::mmse_rzf(alpha_mmse, alpha_rzf),
        }
    }
}

/// CSI-error powers used for one curve of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CsiErrors {
    /// Errors from the template, the dynamic model, or the sweep value.
    Template,
    /// Fixed powers, overriding everything else.
    Fixed { e1_sq: f64, e2_sq: f64 },
}

/// A full experiment grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub sweep_variable: SweepVariable,
    pub values: Vec<f64>,
    pub fixed: NetworkConfig,
    pub schemes: Vec<SchemeSpec>,
    pub trials: usize,
    pub seed: SeedSpec,
    pub mode: Mode,
    pub dynamic_error: Option<DynamicErrorParams>,
    /// Replaces the dynamic-model `e₁²` while keeping its `e₂²`.
    pub e1_override: Option<f64>,
    /// One curve per entry; defaults to `[Template]`.
    pub csi: Vec<CsiErrors>,
    /// Eigenvalue sample size for asymptotic rates and optimized regularizers.
    pub expectation_samples: usize,
    pub options: ErgodicOptions,
}

impl SweepSpec {
    pub fn new(sweep_variable: SweepVariable, values: Vec<f64>, fixed: NetworkConfig, schemes: Vec<SchemeSpec>) -> Self {
        Self {
            sweep_variable,
            values,
            fixed,
            schemes,
            trials: 1000,
            seed: SeedSpec::new(42, 0),
            mode: Mode::Ergodic,
            dynamic_error: None,
            e1_override: None,
            csi: vec![CsiErrors::Template],
            expectation_samples: DEFAULT_SAMPLES,
            options: ErgodicOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep values must not be empty".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) || self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("sweep values must be finite and strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() || self.csi.is_empty() {
            return Err(Error::InvalidConfig("at least one scheme and one CSI level are required".into()));
        }
        if self.expectation_samples < 2 {
            return Err(Error::InvalidConfig("expectation_samples must be at least 2".into()));
        }
        self.fixed.validate()?;
        for s in &self.schemes {
            s.validate()?;
        }
        let integral = matches!(self.sweep_variable, SweepVariable::K | SweepVariable::FeedbackBits);
        if integral && self.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(Error::InvalidConfig(format!("{} values must be nonnegative integers", self.sweep_variable.tag())));
        }
        if self.sweep_variable == SweepVariable::K && self.values[0] < 1.0 {
            return Err(Error::InvalidConfig("K values must be at least 1".into()));
        }
        if self.sweep_variable == SweepVariable::FeedbackBits && self.dynamic_error.is_none() {
            return Err(Error::InvalidConfig("a feedback_bits sweep needs dynamic_error".into()));
        }
        if let Some(d) = &self.dynamic_error {
            d.validate()?;
        }
        if let Some(e1) = self.e1_override {
            if !(0.0..1.0).contains(&e1) {
                return Err(Error::InvalidConfig(format!("e1_override must lie in [0, 1), got {e1}")));
            }
        }
        Ok(())
    }

    /// Network configuration at one sweep point and CSI level.
    pub fn point_config(&self, value: f64, csi: CsiErrors) -> Result<NetworkConfig> {
        let mut cfg = self.fixed;
        let mut dynamic = self.dynamic_error;
        match self.sweep_variable {
            SweepVariable::K => cfg.k = value as usize,
            SweepVariable::ESq => {
                cfg.e1_sq = value;
                cfg.e2_sq = value;
            }
            SweepVariable::PnrQnr => {
                cfg.p = cfg.sigma1_sq * db_to_linear(value);
                cfg.q = cfg.sigma2_sq * db_to_linear(value);
            }
            SweepVariable::FeedbackBits => {
                if let Some(d) = dynamic.as_mut() {
                    d.feedback_bits = value as u32;
                }
            }
        }
        match csi {
            CsiErrors::Fixed { e1_sq, e2_sq } => {
                cfg.e1_sq = e1_sq;
                cfg.e2_sq = e2_sq;
            }
            CsiErrors::Template => {
                if let Some(d) = &dynamic {
                    let (e1, e2) = dynamic_error_powers(cfg.k, cfg.m, d)?;
                    cfg.e1_sq = self.e1_override.unwrap_or(e1);
                    cfg.e2_sq = e2;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One result row. Skipped combinations carry NaN rates and a reason.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSummary {
    pub sweep_variable: SweepVariable,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub mode: RowMode,
    pub config: NetworkConfig,
    pub alpha_mmse: f64,
    pub alpha_rzf: f64,
    /// Monte-Carlo trials for ergodic rows, eigenvalue samples for asymptotic rows.
    pub trials: usize,
    pub rate_mean: f64,
    /// `s/√trials` for ergodic rows; NaN for asymptotic rows.
    pub rate_stderr: f64,
    pub degenerate_resamples: usize,
    pub seed: u64,
    pub skipped: Option<String>,
    pub per_trial: Vec<f64>,
}

fn skipped_row(
    spec: &SweepSpec,
    value: f64,
    scheme: Scheme,
    mode: RowMode,
    config: NetworkConfig,
    kind: Option<BeamformerKind>,
    reason: String,
) -> RateSummary {
    RateSummary {
        sweep_variable: spec.sweep_variable,
        sweep_value: value,
        scheme,
        mode,
        config,
        alpha_mmse: kind.map_or(f64::NAN, |k| k.alpha_mmse),
        alpha_rzf: kind.map_or(f64::NAN, |k| k.alpha_rzf),
        trials: 0,
        rate_mean: f64::NAN,
        rate_stderr: f64::NAN,
        degenerate_resamples: 0,
        seed: spec.seed.master_seed,
        skipped: Some(reason),
        per_trial: Vec::new(),
    }
}

/// Runs every (value × CSI level × scheme × mode) combination. Ergodic runs
/// share the sweep seed, so all points see common random channels. Rows come
/// back sorted by scheme and sweep value; ties keep generation order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<RateSummary>> {
    spec.validate()?;
    let model = AsymptoticModel::new(spec.fixed.m, spec.expectation_samples, spec.seed.with_stream(0))?;
    let mut rows = Vec::new();
    for &value in &spec.values {
        for &csi in &spec.csi {
            let cfg = match spec.point_config(value, csi) {
                Ok(cfg) => cfg,
                Err(e) => {
                    let mut cfg = spec.fixed;
                    if spec.sweep_variable == SweepVariable::K {
                        cfg.k = value as usize;
                    }
                    for scheme in &spec.schemes {
                        for &mode in spec.mode.runs() {
                            rows.push(skipped_row(spec, value, scheme.scheme(), mode, cfg, None, e.to_string()));
                        }
                    }
                    continue;
                }
            };
            for scheme in &spec.schemes {
                let kind = match scheme.resolve(&cfg, &model) {
                    Ok(k) => k,
                    Err(e) => {
                        for &mode in spec.mode.runs() {
                            rows.push(skipped_row(spec, value, scheme.scheme(), mode, cfg, None, e.to_string()));
                        }
                        continue;
                    }
                };
                for &mode in spec.mode.runs() {
                    rows.push(run_point(spec, value, &cfg, kind, mode, &model));
                }
            }
        }
    }
    rows.sort_by(|a, b| a.scheme.tag().cmp(b.scheme.tag()).then(a.sweep_value.total_cmp(&b.sweep_value)));
    Ok(rows)
}

fn run_point(spec: &SweepSpec, value: f64, cfg: &NetworkConfig, kind: BeamformerKind, mode: RowMode, model: &AsymptoticModel) -> RateSummary {
    let base = RateSummary {
        sweep_variable: spec.sweep_variable,
        sweep_value: value,
        scheme: kind.scheme,
        mode,
        config: *cfg,
        alpha_mmse: kind.alpha_mmse,
        alpha_rzf: kind.alpha_rzf,
        trials: 0,
        rate_mean: f64::NAN,
        rate_stderr: f64::NAN,
        degenerate_resamples: 0,
        seed: spec.seed.master_seed,
        skipped: None,
        per_trial: Vec::new(),
    };
    match mode {
        RowMode::Ergodic => match ergodic_rate(cfg, &kind, spec.trials, spec.seed, &spec.options) {
            Ok(s) => RateSummary {
                trials: s.trials,
                rate_mean: s.mean,
                rate_stderr: s.stderr,
                degenerate_resamples: s.degenerate_resamples,
                per_trial: s.per_trial,
                ..base
            },
            Err(e) => skipped_row(spec, value, kind.scheme, mode, *cfg, Some(kind), e.to_string()),
        },
        RowMode::Asymptotic => {
            if kind.alpha_mmse == 0.0 || kind.alpha_rzf == 0.0 {
                let reason = "asymptotic rate undefined at zero regularization: E{1/λ} of a square Wishart matrix diverges";
                return skipped_row(spec, value, kind.scheme, mode, *cfg, Some(kind), reason.into());
            }
            match model.rate(cfg, kind.alpha_mmse, kind.alpha_rzf) {
                Ok(r) => RateSummary { trials: model.samples(), rate_mean: r, ..base },
                Err(e) => skipped_row(spec, value, kind.scheme, mode, *cfg, Some(kind), e.to_string()),
            }
        }
    }
}
