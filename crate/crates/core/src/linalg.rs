//! Small dense helpers on top of nalgebra for complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{FactorError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Hermitian part `(M + M^*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::NAN)
}

/// The positive definite square root `sqrt(M)` of a Hermitian positive
/// semidefinite matrix.
pub fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let eig = hermitian_part(m).symmetric_eigen();
    let roots = CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| c(l.max(0.0).sqrt())),
    );
    let q = &eig.eigenvectors;
    q * CMatrix::from_diagonal(&roots) * q.adjoint()
}

pub fn inverse(m: &CMatrix, what: &str) -> Result<CMatrix> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        .ok_or_else(|| FactorError::Breakdown(format!("{what} is singular")))
}

/// Constant unitary `M^{-1} sqrt(M M^*)` that makes `M W` Hermitian positive definite.
pub fn polar_right(m: &CMatrix, what: &str) -> Result<CMatrix> {
    Ok(inverse(m, what)? * hermitian_sqrt(&(m * m.adjoint())))
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `max |m_ij|`
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `Q, R` with `M = Q R`, `Q` unitary and `R` upper triangular with a
/// nonnegative real diagonal.
pub fn qr_positive(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for k in 0..r.nrows().min(r.ncols()) {
        let d = r[(k, k)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            // Q R = (Q diag(phase)) (diag(conj phase) R)
            for i in 0..q.nrows() {
                q[(i, k)] *= phase;
            }
            for j in 0..r.ncols() {
                r[(k, j)] *= phase.conj();
            }
        }
    }
    (q, r)
}

/// Determinant by LU with partial pivoting.
pub fn det(m: &CMatrix) -> Complex64 {
    m.clone().lu().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0), Complex64::new(0.5, 1.0), c(-1.0), c(3.0)]);
        let h = &a * a.adjoint();
        let s = hermitian_sqrt(&h);
        assert!((&s * &s - &h).norm() < 1e-12);
        assert!(min_hermitian_eigenvalue(&s) > 0.0);
    }

    #[test]
    fn qr_has_positive_diagonal() {
        let a = CMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 1.0), c(2.0), c(-1.0), Complex64::new(3.0, -1.0)]);
        let (q, r) = qr_positive(&a);
        assert!((&q * &r - &a).norm() < 1e-12);
        assert!((q.adjoint() * &q - CMatrix::identity(2, 2)).norm() < 1e-12);
        for k in 0..2 {
            assert!(r[(k, k)].re > 0.0 && r[(k, k)].im.abs() < 1e-14);
        }
        assert!(r[(1, 0)].norm() < 1e-14);
    }
}
