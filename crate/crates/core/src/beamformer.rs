//! Relay beamforming matrices, the closed-form MMSE regularizer and the
//! per-relay power-control factors.
//!
//! Every scheme is an instance of
//!
//! ```text
//! F = Ĝ^H (ĜĜ^H + α_rzf I)⁻¹ (Ĥ^HĤ + α_mmse I)⁻¹ Ĥ^H
//! ```
//!
//! with MF-MF at `(∞, ∞)`, ZF-ZF at `(0, 0)` and MF-RZF at `(∞, 1)`. An
//! infinite regularizer drops the corresponding inverse; the lost `1/α`
//! scale is absorbed by the power-control factor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, hermitian_shifted_inverse, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "MF_MF")]
    MfMf,
    #[serde(rename = "ZF_ZF")]
    ZfZf,
    #[serde(rename = "MF_RZF")]
    MfRzf,
    #[serde(rename = "MMSE_RZF")]
    MmseRzf,
}

impl Scheme {
    pub fn tag(&self) -> &'static str {
        match self {
            Scheme::MfMf => "MF_MF",
            Scheme::ZfZf => "ZF_ZF",
            Scheme::MfRzf => "MF_RZF",
            Scheme::MmseRzf => "MMSE_RZF",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "MF_MF" | "MF" => Ok(Scheme::MfMf),
            "ZF_ZF" | "ZF" => Ok(Scheme::ZfZf),
            "MF_RZF" => Ok(Scheme::MfRzf),
            "MMSE_RZF" => Ok(Scheme::MmseRzf),
            _ => Err(Error::InvalidArgument(format!("unknown beamforming scheme `{s}`"))),
        }
    }
}

/// A scheme together with the regularizers it is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamformerKind {
    pub scheme: Scheme,
    pub alpha_mmse: f64,
    pub alpha_rzf: f64,
}

impl BeamformerKind {
    pub fn mf_mf() -> Self {
        Self { scheme: Scheme::MfMf, alpha_mmse: f64::INFINITY, alpha_rzf: f64::INFINITY }
    }

    pub fn zf_zf() -> Self {
        Self { scheme: Scheme::ZfZf, alpha_mmse: 0.0, alpha_rzf: 0.0 }
    }

    pub fn mf_rzf() -> Self {
        Self { scheme: Scheme::MfRzf, alpha_mmse: f64::INFINITY, alpha_rzf: 1.0 }
    }

    pub fn mmse_rzf(alpha_mmse: f64, alpha_rzf: f64) -> Result<Self> {
        for a in [alpha_mmse, alpha_rzf] {
            if !(a >= 0.0) {
                return Err(Error::InvalidArgument(format!("regularizers must be nonnegative, got {a}")));
            }
        }
        Ok(Self { scheme: Scheme::MmseRzf, alpha_mmse, alpha_rzf })
    }

    /// The fixed kind for the MF/ZF schemes. `MmseRzf` has no fixed
    /// regularizers and yields `None`.
    pub fn fixed(scheme: Scheme) -> Option<Self> {
        match scheme {
            Scheme::MfMf => Some(Self::mf_mf()),
            Scheme::ZfZf => Some(Self::zf_zf()),
            Scheme::MfRzf => Some(Self::mf_rzf()),
            Scheme::MmseRzf => None,
        }
    }
}

/// Closed-form MMSE regularizer `(M+1)(e₁² + σ₁²/P)`.
pub fn alpha_mmse_opt(m: usize, e1_sq: f64, p: f64, sigma1_sq: f64) -> f64 {
    (m as f64 + 1.0) * (e1_sq + sigma1_sq / p)
}

fn regularized_inverse(gram: &CMatrix, alpha: f64) -> Result<Option<CMatrix>> {
    if alpha.is_infinite() {
        Ok(None)
    } else {
        hermitian_shifted_inverse(gram, alpha).map(Some)
    }
}

/// Beamforming matrix for one relay from its estimated channels.
///
/// Fails with [`Error::Degenerate`] when an unregularized Gram matrix is too
/// ill-conditioned to invert.
pub fn build_beamformer(kind: &BeamformerKind, h_hat: &CMatrix, g_hat: &CMatrix) -> Result<CMatrix> {
    if !h_hat.is_square() || !g_hat.is_square() || h_hat.shape() != g_hat.shape() {
        return Err(Error::InvalidArgument(format!(
            "beamformer needs equal square channels, got {:?} and {:?}",
            h_hat.shape(),
            g_hat.shape()
        )));
    }
    let h_adj = h_hat.adjoint();
    let g_adj = g_hat.adjoint();
    let backward = regularized_inverse(&(&h_adj * h_hat), kind.alpha_mmse)?;
    let forward = regularized_inverse(&(g_hat * &g_adj), kind.alpha_rzf)?;
    let receive = match backward {
        Some(inv) => inv * h_adj,
        None => h_adj,
    };
    let precode = match forward {
        Some(inv) => g_adj * inv,
        None => g_adj,
    };
    Ok(precode * receive)
}

/// How relays pick their power-control factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PowerControl {
    /// Causal per-relay factor: the power expectation uses the estimate plus the
    /// analytic error moment `E{ΩΩ^H} = M·I`.
    PerRelay,
    /// Per-relay factor computed with the true backward channel.
    Oracle,
    /// A single factor shared by every relay (the large-`K` approximation).
    Uniform(f64),
}

/// Expected relay transmit power `tr{F(P/M·E[HH^H] + σ₁²I)F^H}` before power
/// control, with `E[HH^H] = ĤĤ^H + e₁²M·I`.
pub fn expected_relay_power(f: &CMatrix, h_hat: &CMatrix, cfg: &NetworkConfig) -> f64 {
    let m = cfg.m as f64;
    cfg.p / m * frobenius_sq(&(f * h_hat)) + (cfg.p * cfg.e1_sq + cfg.sigma1_sq) * frobenius_sq(f)
}

/// Power-control factor `ρ = sqrt(Q / tr{…})`.
///
/// `channel` is the estimate for [`PowerControl::PerRelay`] and the true
/// backward channel for [`PowerControl::Oracle`]; it is ignored in uniform
/// mode.
pub fn power_control_rho(f: &CMatrix, channel: &CMatrix, cfg: &NetworkConfig, mode: PowerControl) -> Result<f64> {
    let trace = match mode {
        PowerControl::Uniform(rho) => {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::InvalidArgument(format!("uniform power-control factor must be positive, got {rho}")));
            }
            return Ok(rho);
        }
        PowerControl::PerRelay => expected_relay_power(f, channel, cfg),
        PowerControl::Oracle => cfg.p / cfg.m as f64 * frobenius_sq(&(f * channel)) + cfg.sigma1_sq * frobenius_sq(f),
    };
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(Error::InvalidArgument(format!("relay power trace must be positive, got {trace}")));
    }
    Ok((cfg.q / trace).sqrt())
}

/// Beamformers and power-control factors for every relay of one realization.
#[derive(Clone, Debug)]
pub struct BeamformerSet {
    pub f: Vec<CMatrix>,
    pub rho: Vec<f64>,
}

pub fn build_beamformer_set(
    kind: &BeamformerKind,
    ch: &ChannelRealization,
    cfg: &NetworkConfig,
    mode: PowerControl,
) -> Result<BeamformerSet> {
    let mut f = Vec::with_capacity(ch.relays());
    let mut rho = Vec::with_capacity(ch.relays());
    for k in 0..ch.relays() {
        let fk = build_beamformer(kind, &ch.h_hat[k], &ch.g_hat[k])?;
        let channel = if mode == PowerControl::Oracle { &ch.h[k] } else { &ch.h_hat[k] };
        rho.push(power_control_rho(&fk, channel, cfg, mode)?);
        f.push(fk);
    }
    Ok(BeamformerSet { f, rho })
}
