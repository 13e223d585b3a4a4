//! Monte-Carlo oracles for the Haar moment identities and the eigenvalue
//! lemmas, shared by the `verify` subcommand and the acceptance suite.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::config::SeedSpec;
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::random_matrix::{gram_eigenvalues, lemma3_snr, mu, nu, sample_gaussian_matrix, sample_haar_unitary, Lemma3Coefficients};

const CHUNK: usize = 4096;

/// Sample mean with its standard error and the value it should match.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub expected: f64,
}

impl Estimate {
    pub fn z_score(&self) -> f64 {
        (self.mean - self.expected) / self.stderr
    }

    pub fn relative_error(&self) -> f64 {
        ((self.mean - self.expected) / self.expected).abs()
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, o: Self) -> Self {
        Self { n: self.n + o.n, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    fn estimate(&self, expected: f64) -> Estimate {
        let mean = self.sum / self.n;
        let var = (self.sum_sq - self.n * mean * mean) / (self.n - 1.0);
        Estimate { mean, stderr: (var.max(0.0) / self.n).sqrt(), expected }
    }
}

/// Runs `f` over `samples` draws split into fixed chunks with their own
/// streams and sums the per-chunk moments in chunk order.
fn chunked<const K: usize>(samples: usize, seed: SeedSpec, f: impl Fn(&mut crate::Stream) -> [f64; K] + Sync) -> [Moments; K] {
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<[Moments; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.with_stream(seed.stream_id + c as u64).derive_stream();
            let mut acc = [Moments::default(); K];
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                for (a, v) in acc.iter_mut().zip(f(&mut rng)) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    parts.into_iter().fold([Moments::default(); K], |acc, p| std::array::from_fn(|i| acc[i].merge(p[i])))
}

/// Fourth moments of Haar unitaries: `E|Q_ik|⁴`, `E|Q_ik|²|Q_lk|²` for
/// `i ≠ l`, and `E{Q_il Q*_ml Q*_ir Q_mr}` for `i ≠ m`, `l ≠ r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HaarMoments {
    pub same_entry: Estimate,
    pub same_column: Estimate,
    pub cross: Estimate,
}

/// Each sample contributes its average over all valid index combinations.
pub fn haar_fourth_moments(m: usize, samples: usize, seed: SeedSpec) -> HaarMoments {
    assert!(m >= 2, "need M ≥ 2");
    let [a, b, c] = chunked(samples, seed, |rng| {
        let q = sample_haar_unitary(m, rng).expect("M ≥ 1");
        let p = q.map(|z| z.norm_sqr());
        let (mut s4, mut s22, mut cross) = (0.0, 0.0, 0.0);
        for k in 0..m {
            for i in 0..m {
                s4 += p[(i, k)] * p[(i, k)];
                for l in 0..m {
                    if l != i {
                        s22 += p[(i, k)] * p[(l, k)];
                    }
                }
            }
        }
        for i in 0..m {
            for mm in 0..m {
                if mm == i {
                    continue;
                }
                // Σ_{l≠r} Q_il Q*_ml Q*_ir Q_mr = |Σ_l Q_il Q*_ml|² − Σ_l |Q_il|²|Q_ml|²
                let inner: Complex64 = (0..m).map(|l| q[(i, l)] * q[(mm, l)].conj()).sum();
                let diag: f64 = (0..m).map(|l| p[(i, l)] * p[(mm, l)]).sum();
                cross += inner.norm_sqr() - diag;
            }
        }
        let mf = m as f64;
        [s4 / (mf * mf), s22 / (mf * mf * (mf - 1.0)), cross / (mf * (mf - 1.0) * mf * (mf - 1.0))]
    });
    let mf = m as f64;
    HaarMoments {
        same_entry: a.estimate(2.0 / (mf * (mf + 1.0))),
        same_column: b.estimate(1.0 / (mf * (mf + 1.0))),
        cross: c.estimate(-1.0 / ((mf - 1.0) * mf * (mf + 1.0))),
    }
}

/// Diagonal second moment and off-diagonal power of `QΛQ^H` for Haar `Q`,
/// each sample averaged over all diagonal entries and all off-diagonal pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatedMoments {
    pub diagonal: Estimate,
    pub off_diagonal: Estimate,
}

pub fn rotated_moments(lambdas: &[f64], samples: usize, seed: SeedSpec) -> Result<RotatedMoments> {
    let m = lambdas.len();
    let expected = (mu(lambdas)?, nu(lambdas)?);
    let lam = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m, lambdas.iter().map(|&l| Complex64::new(l, 0.0))));
    let [d, o] = chunked(samples, seed, |rng| {
        let q = sample_haar_unitary(m, rng).expect("M ≥ 1");
        let a = &q * &lam * q.adjoint();
        let mut diag = 0.0;
        let mut off = 0.0;
        for i in 0..m {
            diag += a[(i, i)].re * a[(i, i)].re;
            for j in 0..m {
                if i != j {
                    off += a[(i, j)].norm_sqr();
                }
            }
        }
        [diag / m as f64, off / (m * (m - 1)) as f64]
    });
    Ok(RotatedMoments { diagonal: d.estimate(expected.0), off_diagonal: o.estimate(expected.1) })
}

/// Grid search of the regularized SNR ratio against `α = C/D`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma3Trial {
    pub coeffs: Lemma3Coefficients,
    pub lambdas: Vec<f64>,
    pub grid_maximizer: f64,
    pub claimed: f64,
}

pub fn grid_maximizer(coeffs: &Lemma3Coefficients, lambdas: &[f64], hi: f64, step: f64) -> Result<f64> {
    let steps = (hi / step).round() as usize;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let a = i as f64 * step;
        let v = lemma3_snr(a, coeffs, lambdas)?;
        if v > best.1 {
            best = (a, v);
        }
    }
    Ok(best.0)
}

/// `draws` random coefficient sets (`A, B, E ∈ [0, 2)`, `C ∈ [0.1, 2)`,
/// `D ∈ [0.5, 3)`) with Wishart eigenvalues, searched over `α ∈ [0, 10]`.
pub fn lemma3_trials(m: usize, draws: usize, step: f64, seed: SeedSpec) -> Result<Vec<Lemma3Trial>> {
    let mut rng = seed.derive_stream();
    (0..draws)
        .map(|_| {
            let coeffs = Lemma3Coefficients {
                a: rng.random_range(0.0..2.0),
                b: rng.random_range(0.0..2.0),
                c: rng.random_range(0.1..2.0),
                d: rng.random_range(0.5..3.0),
                e: rng.random_range(0.0..2.0),
            };
            let lambdas = gram_eigenvalues(&sample_gaussian_matrix(m, m, 1.0, &mut rng)?);
            let grid_maximizer = grid_maximizer(&coeffs, &lambdas, 10.0, step)?;
            Ok(Lemma3Trial { claimed: coeffs.maximizer(), coeffs, lambdas, grid_maximizer })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_moments_small_run() {
        let r = haar_fourth_moments(4, 50_000, SeedSpec::new(1, 0));
        for e in [r.same_entry, r.same_column, r.cross] {
            assert!(e.z_score().abs() < 4.0, "{e:?}");
        }
    }

    #[test]
    fn chunking_is_thread_independent() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| haar_fourth_moments(3, 10_000, SeedSpec::new(2, 0)));
        let b = haar_fourth_moments(3, 10_000, SeedSpec::new(2, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn rotated_moments_of_identity_are_exact() {
        let r = rotated_moments(&[2.0; 4], 100, SeedSpec::new(3, 0)).unwrap();
        assert!((r.diagonal.mean - 4.0).abs() < 1e-12 && r.off_diagonal.mean < 1e-24);
    }
}
