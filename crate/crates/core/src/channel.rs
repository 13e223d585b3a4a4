//! Channel realizations under the additive CSI-error model, and the dynamic
//! error-power model driven by training, feedback quantization and delay.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::random_matrix::sample_gaussian_matrix;

/// True and estimated backward/forward channels for all relays of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<CMatrix>,
    pub g: Vec<CMatrix>,
    pub h_hat: Vec<CMatrix>,
    pub g_hat: Vec<CMatrix>,
}

impl ChannelRealization {
    pub fn relays(&self) -> usize {
        self.h_hat.len()
    }
}

/// Draws one realization.
///
/// The estimate carries per-entry variance `1 - e²` and the error matrix is
/// unit-variance and independent of the estimate, so `H = Ĥ + eΩ` has unit
/// per-entry variance. Draw order per relay is `Ĥ, Ω₁, Ĝ, Ω₂`, which makes the
/// first `k` relays of a `K`-relay draw identical to a `k`-relay draw from the
/// same stream.
pub fn generate_realization<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<ChannelRealization> {
    let (m, n) = (cfg.m, cfg.n);
    let e1 = cfg.e1_sq.sqrt();
    let e2 = cfg.e2_sq.sqrt();
    let mut out = ChannelRealization {
        h: Vec::with_capacity(cfg.k),
        g: Vec::with_capacity(cfg.k),
        h_hat: Vec::with_capacity(cfg.k),
        g_hat: Vec::with_capacity(cfg.k),
    };
    for _ in 0..cfg.k {
        let h_hat = sample_gaussian_matrix(n, m, 1.0 - cfg.e1_sq, rng)?;
        let omega1 = sample_gaussian_matrix(n, m, 1.0, rng)?;
        let g_hat = sample_gaussian_matrix(m, n, 1.0 - cfg.e2_sq, rng)?;
        let omega2 = sample_gaussian_matrix(m, n, 1.0, rng)?;
        out.h.push(if e1 == 0.0 { h_hat.clone() } else { &h_hat + omega1.scale(e1) });
        out.g.push(if e2 == 0.0 { g_hat.clone() } else { &g_hat + omega2.scale(e2) });
        out.h_hat.push(h_hat);
        out.g_hat.push(g_hat);
    }
    Ok(out)
}

/// Bessel function of the first kind, order zero.
///
/// Power series for `|x| ≤ 8`; Miller's backward recurrence normalized by
/// `J₀ + 2ΣJ₂ₖ = 1` beyond that.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 8.0 {
        let q = -(ax * ax) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / (k as f64 * k as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        return sum;
    }
    let start = 2 * ((ax as usize + 30 + (50.0 * ax).sqrt() as usize) / 2);
    let (mut next, mut cur) = (0.0f64, 1e-30f64);
    let mut j0 = 0.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}; even orders ≥ 2 feed the normalization.
        let order = k - 1;
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * cur;
        }
        if order == 0 {
            j0 = cur;
            norm += cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    j0 / norm
}

/// Inputs of the dynamic CSI-error model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicErrorParams {
    /// Pilot SNR during training (linear).
    #[serde(default)]
    pub rho_tau: f64,
    /// Training duration in symbols.
    #[serde(default)]
    pub t_tau: f64,
    /// Feedback bits per relay.
    pub feedback_bits: u32,
    /// Maximum Doppler shift in Hz.
    pub doppler_hz: f64,
    /// Feedback delay in seconds.
    pub delay_s: f64,
    /// Training-error power used directly instead of `1/(1 + ρ_τ T_τ / M)`.
    #[serde(default)]
    pub training_error: Option<f64>,
}

/// The three components of the forward-channel error and the resulting
/// powers, before the `e₂² < 1` check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBudget {
    pub training: f64,
    pub quantization: f64,
    pub delay: f64,
}

impl ErrorBudget {
    pub fn e1_sq(&self) -> f64 {
        self.training
    }

    pub fn e2_sq(&self) -> f64 {
        self.training + self.quantization + self.delay
    }
}

impl DynamicErrorParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [("rho_tau", self.rho_tau), ("t_tau", self.t_tau), ("doppler_hz", self.doppler_hz), ("delay_s", self.delay_s)];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        match self.training_error {
            Some(t) if !(0.0..1.0).contains(&t) => Err(Error::InvalidConfig(format!("training_error must lie in [0, 1), got {t}"))),
            None if !(self.rho_tau * self.t_tau > 0.0) => {
                Err(Error::InvalidConfig("rho_tau * t_tau must be positive without a training_error override".into()))
            }
            _ => Ok(()),
        }
    }

    /// Error components for `k` relays with `m` antennas.
    pub fn budget(&self, k: usize, m: usize) -> ErrorBudget {
        let mf = m as f64;
        let training = self.training_error.unwrap_or_else(|| 1.0 / (1.0 + self.rho_tau / mf * self.t_tau));
        let quantization = 2f64.powf(-(self.feedback_bits as f64) / mf);
        let arg = (k as f64 + 1.0) / 2.0 * 2.0 * std::f64::consts::PI * self.doppler_hz * self.delay_s;
        ErrorBudget { training, quantization, delay: 1.0 - bessel_j0(arg) }
    }
}

/// `(e₁², e₂²)` for `k` relays, rejecting budgets with `e₂² ≥ 1`.
pub fn dynamic_error_powers(k: usize, m: usize, params: &DynamicErrorParams) -> Result<(f64, f64)> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidArgument("K and M must be at least 1".into()));
    }
    params.validate()?;
    let b = params.budget(k, m);
    let e2_sq = b.e2_sq();
    if e2_sq >= 1.0 {
        return Err(Error::OutOfModel { e2_sq });
    }
    Ok((b.e1_sq(), e2_sq))
}
