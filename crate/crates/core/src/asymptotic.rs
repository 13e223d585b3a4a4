//! Large-`K` asymptotic rate of the MMSE-RZF relay network and the RZF
//! regularizer that maximizes it.
//!
//! Everything here is driven by eight eigenvalue expectations, four for the
//! backward Gram matrix `ĤĤ^H` (eigenvalues `θ`, regularizer `α_mmse`) and
//! four for the forward Gram matrix `ĜĜ^H` (eigenvalues `λ`, regularizer
//! `α_rzf`):
//!
//! ```text
//! E1 = E{x/(x+α)}   E2 = E{x/(x+α)²}   E3 = E{x²/(x+α)²}
//! E4 = E{x x'/((x+α)(x'+α))}   x ≠ x' eigenvalues of the same matrix
//! ```
//!
//! They are estimated by arithmetic means over a sample of Wishart spectra.
//! A unit-variance sample is drawn once per `(M, L, seed, side)` and cached;
//! a CSI-error power `e²` rescales it by `1 - e²`.
//!
//! An infinite regularizer is handled through the limit `α·x/(x+α) → x`:
//! `E1` is returned scaled by `α` and `E2..E4` by `α²`. The rate and the RZF
//! regularizer formula are invariant to that per-side scaling, and the
//! scaled values correspond to the beamformer built with the inverse dropped.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::config::{NetworkConfig, SeedSpec};
use crate::error::{Error, Result};
use crate::random_matrix::{gram_eigenvalues, sample_gaussian_matrix};

/// Default number of sampled matrices per side.
pub const DEFAULT_SAMPLES: usize = 100_000;
/// Matrices drawn per stream when sampling spectra.
const CHUNK: usize = 1024;
/// Stream-id base of the backward (`θ`) eigenvalue sample.
pub const THETA_STREAM_BASE: u64 = 1 << 62;
/// Stream-id base of the forward (`λ`) eigenvalue sample.
pub const LAMBDA_STREAM_BASE: u64 = (1 << 62) | (1 << 48);

/// Eigenvalues of `L` independent `M × M` unit-variance Wishart matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSample {
    m: usize,
    /// Row-major, `M` eigenvalues per matrix.
    values: Vec<f64>,
}

impl EigenSample {
    /// Draws `l` spectra in chunks of 1024 matrices; chunk `c` uses stream
    /// `seed.stream_id + c`.
    pub fn draw(m: usize, l: usize, seed: SeedSpec) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(Error::InvalidArgument("eigenvalue sample needs M ≥ 1 and L ≥ 1".into()));
        }
        let chunks = l.div_ceil(CHUNK);
        let parts: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = seed.with_stream(seed.stream_id + c as u64).derive_stream();
                let count = CHUNK.min(l - c * CHUNK);
                let mut out = Vec::with_capacity(count * m);
                for _ in 0..count {
                    let h = sample_gaussian_matrix(m, m, 1.0, &mut rng)?;
                    out.extend(gram_eigenvalues(&h));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(Self { m, values: parts.concat() })
    }

    pub fn from_values(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || values.is_empty() || !values.len().is_multiple_of(m) {
            return Err(Error::InvalidArgument("eigenvalue sample length must be a positive multiple of M".into()));
        }
        Ok(Self { m, values })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of sampled matrices.
    pub fn len(&self) -> usize {
        self.values.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spectra(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.m)
    }

    /// Expectations for channels of per-entry variance `1 - e_sq` at
    /// regularizer `alpha`.
    pub fn expectations(&self, e_sq: f64, alpha: f64) -> SideExpectations {
        let scale = 1.0 - e_sq;
        let m = self.m;
        let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
        for spectrum in self.spectra() {
            let (mut sum_x, mut sum_x2) = (0.0, 0.0);
            for &unit in spectrum {
                let v = unit * scale;
                let (x, x2) = if alpha.is_infinite() {
                    (v, v)
                } else {
                    let t = v + alpha;
                    (if t > 0.0 { v / t } else { 1.0 }, if t > 0.0 { v / (t * t) } else { f64::INFINITY })
                };
                s1 += x;
                s2 += x2;
                s3 += x * x;
                sum_x += x;
                sum_x2 += x * x;
            }
            if m >= 2 {
                s4 += (sum_x * sum_x - sum_x2) / (m * (m - 1)) as f64;
            }
        }
        let n = self.len() as f64;
        let per_value = n * m as f64;
        SideExpectations { e1: s1 / per_value, e2: s2 / per_value, e3: s3 / per_value, e4: s4 / n }
    }
}

/// `E1..E4` for one side of the relay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideExpectations {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

/// Arithmetic-mean estimates of `E1..E4` from `l` fresh Wishart spectra of
/// per-entry variance `1 - e_sq`.
pub fn estimate_expectations(m: usize, e_sq: f64, alpha: f64, l: usize, seed: SeedSpec) -> Result<SideExpectations> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("need at least two samples, got L={l}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    if !(0.0..1.0).contains(&e_sq) {
        return Err(Error::InvalidArgument(format!("e_sq must lie in [0, 1), got {e_sq}")));
    }
    Ok(EigenSample::draw(m, l, seed)?.expectations(e_sq, alpha))
}

/// Both sides' expectations together with the parameters they were taken at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectationSet {
    pub theta: SideExpectations,
    pub lambda: SideExpectations,
    pub samples: usize,
    pub alpha_mmse: f64,
    pub alpha_rzf: f64,
    pub e1_sq: f64,
    pub e2_sq: f64,
    pub m: usize,
}

/// `E{ρ_k⁻²}`, the uniform power-control factor shared by all relays at large `K`.
pub fn rho_inv_sq(exps: &ExpectationSet, cfg: &NetworkConfig) -> f64 {
    let (t, l) = (&exps.theta, &exps.lambda);
    let m = cfg.m as f64;
    cfg.p / cfg.q * t.e3 * l.e2 + (cfg.e1_sq * cfg.p + cfg.sigma1_sq) * m / cfg.q * t.e2 * l.e2
}

/// Per-stream interference power from the off-diagonal entries of the
/// effective channel.
pub fn interference_power(exps: &ExpectationSet, cfg: &NetworkConfig) -> f64 {
    let (t, l) = (&exps.theta, &exps.lambda);
    let m = cfg.m as f64;
    let base = cfg.p * cfg.k as f64 * (m - 1.0) / (m * (m + 1.0) * (m + 1.0));
    base * ((m + 2.0) * t.e3 * l.e3 - t.e4 * l.e3 - t.e3 * l.e4 - m * t.e4 * l.e4)
}

/// Per-stream effective-noise power with power control factored out.
pub fn asymptotic_noise_power(exps: &ExpectationSet, cfg: &NetworkConfig) -> f64 {
    let (t, l) = (&exps.theta, &exps.lambda);
    let k = cfg.k as f64;
    let m = cfg.m as f64;
    (cfg.e1_sq * cfg.p + cfg.sigma1_sq) * k * t.e2 * l.e3
        + cfg.p * k * cfg.e2_sq * t.e3 * l.e2
        + cfg.e2_sq * cfg.sigma1_sq * k * m * t.e2 * l.e2
        + cfg.sigma2_sq * rho_inv_sq(exps, cfg)
}

/// `(M/2)·log₂(1 + (P/M)(K·E1θ·E1λ)² / (I + N))`.
pub fn rate_from_expectations(exps: &ExpectationSet, cfg: &NetworkConfig) -> f64 {
    let m = cfg.m as f64;
    let signal = cfg.p / m * (cfg.k as f64 * exps.theta.e1 * exps.lambda.e1).powi(2);
    let denom = interference_power(exps, cfg) + asymptotic_noise_power(exps, cfg);
    if signal == 0.0 {
        return 0.0;
    }
    m / 2.0 * (1.0 + signal / denom).log2()
}

/// Closed-form RZF regularizer maximizing the asymptotic rate, from the
/// backward-side expectations taken at `α_mmse`.
pub fn alpha_rzf_from_theta(theta: &SideExpectations, cfg: &NetworkConfig) -> Result<f64> {
    let m = cfg.m as f64;
    let k = cfg.k as f64;
    let relay_noise = cfg.e1_sq * cfg.p + cfg.sigma1_sq;
    let numerator = (cfg.p * k * cfg.e2_sq + cfg.sigma2_sq * cfg.p / cfg.q) * theta.e3
        + (cfg.e2_sq * cfg.sigma1_sq * k * m + relay_noise * m * cfg.sigma2_sq / cfg.q) * theta.e2;
    let coeff = cfg.p * k * (m - 1.0) / (m * (m + 1.0) * (m + 1.0));
    let denominator = relay_noise * k * theta.e2 + coeff * (m + 2.0) * theta.e3 - coeff * theta.e4;
    if !(denominator > 0.0) {
        return Err(Error::InvalidRegularizer { denominator });
    }
    Ok(numerator / denominator)
}

type CacheKey = (usize, usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<EigenSample>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<EigenSample>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cached_sample(m: usize, l: usize, seed: SeedSpec) -> Result<Arc<EigenSample>> {
    let key = (m, l, seed.master_seed, seed.stream_id);
    if let Some(s) = cache().lock().expect("eigen-sample cache poisoned").get(&key) {
        return Ok(Arc::clone(s));
    }
    // Drawn outside the lock; a concurrent duplicate draw yields the same sample.
    let sample = Arc::new(EigenSample::draw(m, l, seed)?);
    let mut guard = cache().lock().expect("eigen-sample cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(sample)))
}

/// Backward and forward spectrum samples for one `(M, L, seed)`.
#[derive(Clone, Debug)]
pub struct AsymptoticModel {
    theta: Arc<EigenSample>,
    lambda: Arc<EigenSample>,
}

impl AsymptoticModel {
    /// Cached model. `seed.master_seed` keys the sample; `seed.stream_id` offsets
    /// both side bases.
    pub fn new(m: usize, l: usize, seed: SeedSpec) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidArgument(format!("need at least two samples, got L={l}")));
        }
        let theta = cached_sample(m, l, seed.with_stream(THETA_STREAM_BASE + seed.stream_id))?;
        let lambda = cached_sample(m, l, seed.with_stream(LAMBDA_STREAM_BASE + seed.stream_id))?;
        Ok(Self { theta, lambda })
    }

    pub fn from_samples(theta: EigenSample, lambda: EigenSample) -> Result<Self> {
        if theta.m() != lambda.m() {
            return Err(Error::InvalidArgument("theta and lambda samples differ in M".into()));
        }
        Ok(Self { theta: Arc::new(theta), lambda: Arc::new(lambda) })
    }

    pub fn samples(&self) -> usize {
        self.theta.len().min(self.lambda.len())
    }

    fn check(&self, cfg: &NetworkConfig) -> Result<()> {
        cfg.validate()?;
        if cfg.m != self.theta.m() {
            return Err(Error::InvalidArgument(format!("model sampled for M={}, config has M={}", self.theta.m(), cfg.m)));
        }
        Ok(())
    }

    pub fn theta_expectations(&self, cfg: &NetworkConfig, alpha_mmse: f64) -> SideExpectations {
        self.theta.expectations(cfg.e1_sq, alpha_mmse)
    }

    pub fn expectation_set(&self, cfg: &NetworkConfig, alpha_mmse: f64, alpha_rzf: f64) -> Result<ExpectationSet> {
        self.check(cfg)?;
        for a in [alpha_mmse, alpha_rzf] {
            if !(a >= 0.0) {
                return Err(Error::InvalidArgument(format!("regularizers must be nonnegative, got {a}")));
            }
        }
        Ok(ExpectationSet {
            theta: self.theta.expectations(cfg.e1_sq, alpha_mmse),
            lambda: self.lambda.expectations(cfg.e2_sq, alpha_rzf),
            samples: self.samples(),
            alpha_mmse,
            alpha_rzf,
            e1_sq: cfg.e1_sq,
            e2_sq: cfg.e2_sq,
            m: cfg.m,
        })
    }

    pub fn rate(&self, cfg: &NetworkConfig, alpha_mmse: f64, alpha_rzf: f64) -> Result<f64> {
        Ok(rate_from_expectations(&self.expectation_set(cfg, alpha_mmse, alpha_rzf)?, cfg))
    }

    pub fn alpha_rzf_opt(&self, cfg: &NetworkConfig, alpha_mmse: f64) -> Result<f64> {
        self.check(cfg)?;
        alpha_rzf_from_theta(&self.theta_expectations(cfg, alpha_mmse), cfg)
    }

    /// The uniform power-control factor `ρ = (E{ρ⁻²})^{-1/2}`.
    pub fn uniform_rho(&self, cfg: &NetworkConfig, alpha_mmse: f64, alpha_rzf: f64) -> Result<f64> {
        Ok(rho_inv_sq(&self.expectation_set(cfg, alpha_mmse, alpha_rzf)?, cfg).sqrt().recip())
    }
}

/// Asymptotic rate with `L` sampled spectra per side.
pub fn asymptotic_rate(cfg: &NetworkConfig, alpha_mmse: f64, alpha_rzf: f64, l: usize, seed: SeedSpec) -> Result<f64> {
    AsymptoticModel::new(cfg.m, l, seed)?.rate(cfg, alpha_mmse, alpha_rzf)
}

/// Optimized RZF regularizer for a given MMSE regularizer.
pub fn alpha_rzf_opt(cfg: &NetworkConfig, alpha_mmse: f64, l: usize, seed: SeedSpec) -> Result<f64> {
    AsymptoticModel::new(cfg.m, l, seed)?.alpha_rzf_opt(cfg, alpha_mmse)
}

/// Both optimized regularizers: the closed-form MMSE value and the RZF value
/// derived from it.
pub fn optimized_regularizers(model: &AsymptoticModel, cfg: &NetworkConfig) -> Result<(f64, f64)> {
    let alpha_mmse = crate::beamformer::alpha_mmse_opt(cfg.m, cfg.e1_sq, cfg.p, cfg.sigma1_sq);
    let alpha_rzf = model.alpha_rzf_opt(cfg, alpha_mmse)?;
    Ok((alpha_mmse, alpha_rzf))
}

/// Relative change of the asymptotic rate when the sample size doubles from
/// `l` to `2l`.
pub fn convergence_gap(cfg: &NetworkConfig, alpha_mmse: f64, alpha_rzf: f64, l: usize, seed: SeedSpec) -> Result<f64> {
    let small = asymptotic_rate(cfg, alpha_mmse, alpha_rzf, l, seed)?;
    let large = asymptotic_rate(cfg, alpha_mmse, alpha_rzf, 2 * l, seed)?;
    Ok(((large - small) / large).abs())
}
