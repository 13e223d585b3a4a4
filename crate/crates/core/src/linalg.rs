//! Small dense complex linear-algebra helpers shared by the sampling,
//! beamforming and receiver code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Condition number above which a Gram matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius_sq(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    frobenius_sq(a).sqrt()
}

pub fn trace_re(a: &CMatrix) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// `(A + A^H)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Householder QR of a matrix with at least as many rows as columns.
///
/// Returns a unitary `Q` (rows × rows) and upper-triangular `R` (rows × cols)
/// whose diagonal is real and nonnegative. Entries below the diagonal of `R`
/// are set to exactly zero.
pub fn householder_qr(a: &CMatrix) -> (CMatrix, CMatrix) {
    let (rows, cols) = a.shape();
    assert!(rows >= cols, "householder_qr needs rows >= cols");
    let mut r = a.clone();
    let mut q = identity(rows);

    for j in 0..cols.min(rows.saturating_sub(1)) {
        let x = r.view((j, j), (rows - j, 1)).clone_owned();
        let norm_x = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { c(1.0) };
        let alpha = -phase * norm_x;
        let mut v: DVector<Complex64> = DVector::from_iterator(rows - j, x.iter().copied());
        v[0] -= alpha;
        let v_norm = v.norm();
        if v_norm == 0.0 {
            continue;
        }
        v /= c(v_norm);

        // R[j.., :] -= 2 v (v^H R[j.., :])
        let mut block = r.rows_mut(j, rows - j);
        let w = v.adjoint() * &block;
        block -= (&v * w).scale(2.0);
        // Q[:, j..] -= 2 (Q[:, j..] v) v^H
        let mut qblock = q.columns_mut(j, rows - j);
        let u = &qblock * &v;
        qblock -= (u * v.adjoint()).scale(2.0);
    }

    for j in 0..cols {
        for i in (j + 1)..rows {
            r[(i, j)] = c(0.0);
        }
        let d = r[(j, j)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            // Q D and D^H R keep the product unchanged.
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
            for k in 0..cols {
                r[(j, k)] *= phase.conj();
            }
            r[(j, j)] = c(mag);
        }
    }
    (q, r)
}

/// `(A + shift·I)⁻¹` for a Hermitian positive-semidefinite `A`, computed from
/// its eigendecomposition. Fails with [`Error::Degenerate`] when the shifted
/// matrix has condition number above [`MAX_CONDITION`].
pub fn hermitian_shifted_inverse(a: &CMatrix, shift: f64) -> Result<CMatrix> {
    let n = a.nrows();
    let eig = hermitian_part(a).symmetric_eigen();
    let shifted: Vec<f64> = eig.eigenvalues.iter().map(|&l| l + shift).collect();
    let max = shifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = shifted.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || max / min > MAX_CONDITION {
        let cond = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(Error::Degenerate { cond });
    }
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for j in 0..n {
        let inv = c(1.0 / shifted[j]);
        for i in 0..n {
            scaled[(i, j)] *= inv;
        }
    }
    Ok(scaled * u.adjoint())
}
