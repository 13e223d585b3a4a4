//! Destination side: effective source-destination channel, QR-based SIC,
//! effective-noise covariance, per-stream SNR and ergodic rate.

use rayon::prelude::*;

use crate::beamformer::{build_beamformer_set, BeamformerKind, BeamformerSet, PowerControl};
use crate::channel::{generate_realization, ChannelRealization};
use crate::config::{NetworkConfig, SeedSpec};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, householder_qr, CMatrix};

/// Draws allowed per trial before a degenerate channel stream is abandoned.
pub const MAX_RESAMPLES_PER_TRIAL: usize = 1000;

/// `H_SD = Σ_k ρ_k Ĝ_k F_k Ĥ_k`.
pub fn effective_channel(bf: &BeamformerSet, ch: &ChannelRealization) -> CMatrix {
    let m = ch.g_hat[0].nrows();
    let mut h_sd = CMatrix::zeros(m, ch.h_hat[0].ncols());
    for k in 0..ch.relays() {
        h_sd += (&ch.g_hat[k] * &bf.f[k] * &ch.h_hat[k]).scale(bf.rho[k]);
    }
    h_sd
}

/// QR decomposition with a real nonnegative diagonal in `R`.
pub fn qr_decompose(h_sd: &CMatrix) -> (CMatrix, CMatrix) {
    householder_qr(h_sd)
}

/// Diagonal of the effective-noise covariance after the `Q_SD^H` filter:
///
/// ```text
/// (e₁²P + σ₁²) Σ_k ρ_k² ‖(Q_SD^H Ĝ_k F_k)_m‖²
///   + (P e₂²/M) Σ_k ρ_k² tr(F_k Ĥ_k Ĥ_k^H F_k^H) + e₂²σ₁² Σ_k ρ_k² tr(F_k F_k^H) + σ₂²
/// ```
pub fn noise_covariance(bf: &BeamformerSet, ch: &ChannelRealization, q_sd: &CMatrix, cfg: &NetworkConfig) -> Vec<f64> {
    let m = cfg.m;
    let q_adj = q_sd.adjoint();
    let relay_noise = cfg.e1_sq * cfg.p + cfg.sigma1_sq;
    let mut diag = vec![0.0; m];
    let mut common = cfg.sigma2_sq;
    for k in 0..ch.relays() {
        let rho_sq = bf.rho[k] * bf.rho[k];
        let a = &q_adj * &ch.g_hat[k] * &bf.f[k];
        for (i, d) in diag.iter_mut().enumerate() {
            *d += relay_noise * rho_sq * a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        common += cfg.p * cfg.e2_sq / m as f64 * rho_sq * frobenius_sq(&(&bf.f[k] * &ch.h_hat[k]));
        common += cfg.e2_sq * cfg.sigma1_sq * rho_sq * frobenius_sq(&bf.f[k]);
    }
    diag.iter().map(|d| d + common).collect()
}

/// Whether the upper-triangular residual counts as interference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SicModel {
    /// `(P/M)Σ_{j>m}|R_{m,j}|²` stays in the denominator.
    #[default]
    Literal,
    /// Ideal cancellation: the residual is dropped.
    Genie,
}

/// Per-stream SNR after QR detection.
pub fn stream_snr(r: &CMatrix, n_cov: &[f64], p: f64, m: usize, model: SicModel) -> Vec<f64> {
    let pm = p / m as f64;
    (0..m)
        .map(|i| {
            let signal = pm * r[(i, i)].norm_sqr();
            if signal == 0.0 {
                return 0.0;
            }
            let interference = match model {
                SicModel::Literal => pm * ((i + 1)..m).map(|j| r[(i, j)].norm_sqr()).sum::<f64>(),
                SicModel::Genie => 0.0,
            };
            signal / (interference + n_cov[i])
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateSample {
    pub per_stream_snr: Vec<f64>,
    pub rate_bits: f64,
}

impl RateSample {
    /// Two-slot rate `(1/2)Σ log₂(1 + snr)`.
    pub fn from_snr(per_stream_snr: Vec<f64>) -> Self {
        let rate_bits = 0.5 * per_stream_snr.iter().map(|s| (1.0 + s).log2()).sum::<f64>();
        Self { per_stream_snr, rate_bits }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErgodicOptions {
    pub power_control: PowerControl,
    pub sic: SicModel,
}

impl Default for ErgodicOptions {
    fn default() -> Self {
        Self { power_control: PowerControl::PerRelay, sic: SicModel::Literal }
    }
}

/// Rate of one realization with given beamformers.
pub fn realization_rate(bf: &BeamformerSet, ch: &ChannelRealization, cfg: &NetworkConfig, sic: SicModel) -> RateSample {
    let h_sd = effective_channel(bf, ch);
    let (q, r) = qr_decompose(&h_sd);
    let n_cov = noise_covariance(bf, ch, &q, cfg);
    RateSample::from_snr(stream_snr(&r, &n_cov, cfg.p, cfg.m, sic))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub rate: RateSample,
    pub degenerate_resamples: usize,
}

/// One Monte Carlo trial on its own stream, redrawing the whole realization
/// whenever a beamformer inverse is degenerate.
pub fn simulate_trial(cfg: &NetworkConfig, kind: &BeamformerKind, opts: &ErgodicOptions, seed: SeedSpec) -> Result<TrialOutcome> {
    let mut rng = seed.derive_stream();
    let mut resamples = 0;
    loop {
        let ch = generate_realization(cfg, &mut rng)?;
        match build_beamformer_set(kind, &ch, cfg, opts.power_control) {
            Ok(bf) => {
                return Ok(TrialOutcome { rate: realization_rate(&bf, &ch, cfg, opts.sic), degenerate_resamples: resamples });
            }
            Err(Error::Degenerate { .. }) => {
                resamples += 1;
                if resamples >= MAX_RESAMPLES_PER_TRIAL {
                    return Err(Error::TooManyDegenerate { attempts: resamples });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Welford accumulator for mean and sample variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 { 0.0 } else { self.m2 / (self.count - 1) as f64 }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 { 0.0 } else { (self.sample_variance() / self.count as f64).sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicSummary {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub degenerate_resamples: usize,
    /// Rate of every trial in trial order.
    pub per_trial: Vec<f64>,
}

/// Ergodic rate over `trials` independent realizations. Trial `t` uses stream
/// `seed.stream_id + t`; trials run in parallel and are reduced in trial
/// order, so the result does not depend on the thread count.
pub fn ergodic_rate(cfg: &NetworkConfig, kind: &BeamformerKind, trials: usize, seed: SeedSpec, opts: &ErgodicOptions) -> Result<ErgodicSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| simulate_trial(cfg, kind, opts, seed.with_stream(seed.stream_id + t as u64)))
        .collect::<Result<_>>()?;
    let mut stats = RunningStats::default();
    let mut resamples = 0;
    for o in &outcomes {
        stats.push(o.rate.rate_bits);
        resamples += o.degenerate_resamples;
    }
    Ok(ErgodicSummary {
        mean: stats.mean(),
        stderr: stats.std_error(),
        trials,
        degenerate_resamples: resamples,
        per_trial: outcomes.iter().map(|o| o.rate.rate_bits).collect(),
    })
}
