//! Network configuration, decibel conversion and the seeding contract.
//!
//! All powers and noise variances are kept linear. Decibels only appear at
//! the CLI and config-file boundary.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random stream handed to every sampling routine.
pub type Stream = ChaCha20Rng;

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Dimensions, powers, noise and CSI-error levels of one network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Antennas at source and destination.
    pub m: usize,
    /// Antennas per relay.
    pub n: usize,
    /// Number of relays.
    pub k: usize,
    /// Source transmit power.
    pub p: f64,
    /// Per-relay transmit power.
    pub q: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    /// Backward-channel CSI error power.
    pub e1_sq: f64,
    /// Forward-channel CSI error power.
    pub e2_sq: f64,
}

impl NetworkConfig {
    /// Builds and validates a configuration.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        n: usize,
        k: usize,
        p: f64,
        q: f64,
        sigma1_sq: f64,
        sigma2_sq: f64,
        e1_sq: f64,
        e2_sq: f64,
    ) -> Result<Self> {
        let cfg = Self { m, n, k, p, q, sigma1_sq, sigma2_sq, e1_sq, e2_sq };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Square network (`M = N`) with unit noise powers, where PNR and QNR in dB
    /// set the source and relay powers.
    pub fn from_snr_db(m: usize, k: usize, pnr_db: f64, qnr_db: f64, e1_sq: f64, e2_sq: f64) -> Result<Self> {
        Self::new(m, m, k, db_to_linear(pnr_db), db_to_linear(qnr_db), 1.0, 1.0, e1_sq, e2_sq)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.k == 0 {
            return bad(format!("M and K must be positive (M={}, K={})", self.m, self.k));
        }
        if self.n < self.m {
            return bad(format!("relay antennas N={} fewer than source antennas M={}", self.n, self.m));
        }
        if self.n != self.m {
            return bad(format!("only square relays are supported (M={}, N={})", self.m, self.n));
        }
        if !(self.p.is_finite() && self.p > 0.0) || !(self.q.is_finite() && self.q > 0.0) {
            return bad(format!("P and Q must be finite and positive (P={}, Q={})", self.p, self.q));
        }
        for (name, v) in [("sigma1_sq", self.sigma1_sq), ("sigma2_sq", self.sigma2_sq)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and nonnegative, got {v}"));
            }
        }
        for (name, v) in [("e1_sq", self.e1_sq), ("e2_sq", self.e2_sq)] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1), got {v}"));
            }
        }
        Ok(())
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_errors(mut self, e1_sq: f64, e2_sq: f64) -> Self {
        self.e1_sq = e1_sq;
        self.e2_sq = e2_sq;
        self
    }

    /// `P/σ₁²` in dB (infinite when the relay is noiseless).
    pub fn pnr_db(&self) -> f64 {
        linear_to_db(self.p / self.sigma1_sq)
    }

    /// `Q/σ₂²` in dB.
    pub fn qnr_db(&self) -> f64 {
        linear_to_db(self.q / self.sigma2_sq)
    }
}

/// Identifies one independent random stream: a master seed plus a stream
/// index (one index per Monte Carlo trial).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub const fn with_stream(self, stream_id: u64) -> Self {
        Self { master_seed: self.master_seed, stream_id }
    }

    /// ChaCha20 keyed by the master seed, positioned on the stream selected by
    /// `stream_id`. Pure function of the pair, so it does not matter which
    /// thread derives it.
    pub fn derive_stream(&self) -> Stream {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

pub fn derive_stream(seed: SeedSpec) -> Stream {
    seed.derive_stream()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rayon::prelude::*;

    fn draws(seed: SeedSpec) -> Vec<u64> {
        let mut rng = derive_stream(seed);
        (0..100).map(|_| rng.random()).collect()
    }

    #[test]
    fn decibel_points() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(-10.0) - 0.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn decibel_product_is_sum(a in -60.0f64..60.0, b in -60.0f64..60.0) {
            let lhs = db_to_linear(a) * db_to_linear(b);
            let rhs = db_to_linear(a + b);
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        assert_eq!(draws(SeedSpec::new(42, 0)), draws(SeedSpec::new(42, 0)));
        assert_ne!(draws(SeedSpec::new(42, 0)), draws(SeedSpec::new(42, 1)));
        assert_ne!(draws(SeedSpec::new(42, 0)), draws(SeedSpec::new(43, 0)));
    }

    #[test]
    fn stream_independent_of_thread_count() {
        let reference = draws(SeedSpec::new(42, 7));
        for threads in [1, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got: Vec<Vec<u64>> =
                pool.install(|| (0..8).into_par_iter().map(|_| draws(SeedSpec::new(42, 7))).collect());
            assert!(got.iter().all(|d| *d == reference));
        }
    }

    #[test]
    fn rejects_invalid_configs() {
        assert!(NetworkConfig::new(4, 3, 2, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(NetworkConfig::new(4, 4, 2, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(NetworkConfig::new(4, 4, 2, 1.0, 1.0, 1.0, 1.0, 0.0, 1.2).is_err());
        assert!(NetworkConfig::new(4, 4, 2, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(NetworkConfig::new(4, 4, 2, 1.0, 1.0, -1.0, 1.0, 0.0, 0.0).is_err());
        assert!(NetworkConfig::new(4, 4, 0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        let cfg = NetworkConfig::from_snr_db(4, 3, 10.0, 10.0, 0.01, 0.01).unwrap();
        assert!((cfg.p - 10.0).abs() < 1e-12);
        assert!((cfg.pnr_db() - 10.0).abs() < 1e-12);
    }
}
