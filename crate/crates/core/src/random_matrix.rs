//! Gaussian and Haar sampling, Hermitian eigendecomposition, and the
//! closed-form Haar moment functions used by the beamformer analysis.

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, householder_qr, CMatrix};

/// I.i.d. circularly-symmetric complex Gaussian entries with the given
/// per-entry variance. Entries are filled in column-major order.
pub fn sample_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> Result<CMatrix> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::InvalidArgument(format!("variance must be finite and nonnegative, got {variance}")));
    }
    let scale = (variance / 2.0).sqrt();
    Ok(CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(scale * re, scale * im)
    }))
}

/// Haar-distributed `m × m` unitary.
///
/// Orthonormalizes a Gaussian matrix and fixes the phases so that `R` has a
/// positive diagonal; without that correction the result is unitary but not
/// Haar.
pub fn sample_haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<CMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("Haar dimension must be at least 1".into()));
    }
    let z = sample_gaussian_matrix(m, m, 1.0, rng)?;
    let (q, _) = householder_qr(&z);
    Ok(q)
}

#[derive(Clone, Debug)]
pub struct EigDecomposition {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl EigDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        scaled * self.eigenvectors.adjoint()
    }
}

fn lexicographic(a: nalgebra::DVectorView<'_, Complex64>, b: nalgebra::DVectorView<'_, Complex64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Eigendecomposition of a Hermitian matrix (symmetrized first).
///
/// Eigenvalues come out descending, ties broken by lexicographic order of the
/// eigenvectors. Each eigenvector is rotated so its first non-negligible
/// entry is real and positive. Eigenvalues in `[-1e-12, 0)` are clamped to 0.
pub fn eig_hermitian(a: &CMatrix) -> Result<EigDecomposition> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidArgument(format!("eig_hermitian needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    let eig = hermitian_part(a).symmetric_eigen();
    let mut vectors = eig.eigenvectors;
    for j in 0..n {
        let mut col = vectors.column_mut(j);
        if let Some(lead) = col.iter().copied().find(|z| z.norm() > 1e-12) {
            let phase = lead.conj() / lead.norm();
            col.iter_mut().for_each(|z| *z *= phase);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .total_cmp(&eig.eigenvalues[i])
            .then_with(|| lexicographic(vectors.column(i), vectors.column(j)))
    });
    let eigenvalues = order
        .iter()
        .map(|&i| {
            let l = eig.eigenvalues[i];
            if (-1e-12..0.0).contains(&l) { 0.0 } else { l }
        })
        .collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, col| vectors[(r, order[col])]);
    Ok(EigDecomposition { eigenvalues, eigenvectors })
}

/// Eigenvalues of `H H^H`, descending, clamped at zero.
pub fn gram_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let gram = hermitian_part(&(h * h.adjoint()));
    let mut vals: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|&l| l.max(0.0)).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// `E{(QΛQ^H)²_{m,m}}` for Haar `Q`.
pub fn mu(lambdas: &[f64]) -> Result<f64> {
    let m = lambdas.len();
    if m == 0 {
        return Err(Error::InvalidArgument("mu needs at least one eigenvalue".into()));
    }
    let sum: f64 = lambdas.iter().sum();
    let sum_sq: f64 = lambdas.iter().map(|l| l * l).sum();
    let mf = m as f64;
    Ok((sum * sum + sum_sq) / (mf * (mf + 1.0)))
}

/// `E{|(QΛQ^H)_{m,j}|²}`, `m ≠ j`, for Haar `Q`.
pub fn nu(lambdas: &[f64]) -> Result<f64> {
    let m = lambdas.len();
    if m < 2 {
        return Err(Error::InvalidArgument("nu needs at least two eigenvalues".into()));
    }
    let sum: f64 = lambdas.iter().sum();
    let sum_sq: f64 = lambdas.iter().map(|l| l * l).sum();
    let mf = m as f64;
    Ok(sum_sq / ((mf - 1.0) * (mf + 1.0)) - sum * sum / ((mf - 1.0) * mf * (mf + 1.0)))
}

/// Coefficients of the ratio maximized by `α = C/D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma3Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl Lemma3Coefficients {
    pub fn maximizer(&self) -> f64 {
        self.c / self.d
    }
}

/// Evaluates the regularized SNR ratio
///
/// ```text
///          A (Σ λ/(λ+α))² + B Σ λ²/(λ+α)²
/// SNR(α) = ------------------------------------------------
///          Σ [ C λ/(λ+α)² + D λ²/(λ+α)² + E (λ/(λ+α))² ]
/// ```
pub fn lemma3_snr(alpha: f64, coeffs: &Lemma3Coefficients, lambdas: &[f64]) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut den = 0.0;
    for &l in lambdas {
        let t = l + alpha;
        let ratio = l / t;
        s1 += ratio;
        s2 += ratio * ratio;
        den += coeffs.c * l / (t * t) + coeffs.d * l * l / (t * t) + coeffs.e * ratio * ratio;
    }
    if !(den > 0.0) {
        return Err(Error::InvalidArgument(format!("degenerate coefficients: denominator {den}")));
    }
    Ok((coeffs.a * s1 * s1 + coeffs.b * s2) / den)
}
