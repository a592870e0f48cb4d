//! Displacement structure of `Delta` under the upper shift `Z`.
//!
//! Every `Theta_i` depends only on `k + l`, so `Z Theta_i = Theta_i Z^*` and
//! `Theta_i Theta_i^* - Z Theta_i Theta_i^* Z^* = Lambda_i Lambda_i^*` with
//! `Lambda_i` the first column of `Theta_i`. With `I - Z Z^* = E E^*` this gives
//! `Delta - Z Delta Z^* = A A^*` for `A = [Lambda_1, ..., Lambda_{m-1}, E]`.
//!
//! [`structured_solve`] runs a Schur-type recursion on the generator to get a
//! Cholesky factor of `Delta` in `O(m N^2)` operations.

use num_complex::Complex64;

use crate::completion::CompletionSystem;
use crate::error::{FactorError, Result};
use crate::linalg::{c, CMatrix, CVector};

/// `(N + 1) x m` generator `A` of `Delta - Z Delta Z^*`. `Z` is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementGenerator {
    pub a: CMatrix,
}

impl DisplacementGenerator {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Number of generator columns (`m`).
    pub fn rank_bound(&self) -> usize {
        self.a.ncols()
    }

    /// `A A^*`
    pub fn product(&self) -> CMatrix {
        &self.a * self.a.adjoint()
    }
}

pub fn generators(sys: &CompletionSystem) -> DisplacementGenerator {
    let n = sys.dim();
    let m = sys.theta.len() + 1;
    let mut a = CMatrix::zeros(n, m);
    for (i, theta) in sys.theta.iter().enumerate() {
        a.set_column(i, &theta.column(0));
    }
    a[(n - 1, m - 1)] = c(1.0);
    DisplacementGenerator { a }
}

/// `R_Z(Delta) = Delta - Z Delta Z^*`, i.e. `Delta[i][j] - Delta[i+1][j+1]`.
pub fn apply_rz(delta: &CMatrix) -> Result<CMatrix> {
    let n = delta.nrows();
    if delta.ncols() != n {
        return Err(FactorError::NotSquare(n, delta.ncols()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        if i + 1 < n && j + 1 < n {
            delta[(i, j)] - delta[(i + 1, j + 1)]
        } else {
            delta[(i, j)]
        }
    }))
}

/// `max |R_Z(Delta) - A A^*| / max |Delta|`
pub fn generator_defect(sys: &CompletionSystem) -> f64 {
    let rz = apply_rz(&sys.delta).expect("Delta is square");
    let diff = rz - generators(sys).product();
    let scale = sys.delta.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

/// Lower triangular `L` with `P Delta P = L L^*`, where `P` reverses indices.
///
/// After reversal the shift is lower, so at step `k` the first column of the
/// Schur complement is `G g_0^*` with `g_0` the top row of the current
/// generator `G`. Rotating `g_0` onto `(delta, 0, ..., 0)` makes column 0 of
/// `G` the next column of `L`; shifting that column down one row yields the
/// generator of the next Schur complement.
pub fn schur_cholesky(gen: &DisplacementGenerator) -> Result<CMatrix> {
    let n = gen.dim();
    let m = gen.rank_bound();
    let mut g = CMatrix::from_fn(n, m, |i, j| gen.a[(n - 1 - i, j)]);
    let scale = gen.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut l = CMatrix::zeros(n, n);
    for k in 0..n {
        for j in 1..m {
            let a = g[(k, 0)];
            let b = g[(k, j)];
            if b == c(0.0) {
                continue;
            }
            let r = a.norm().hypot(b.norm());
            let (p, q) = (a.conj() / r, b / r);
            for i in k..n {
                let (x, y) = (g[(i, 0)], g[(i, j)]);
                g[(i, 0)] = x * p + y * q.conj();
                g[(i, j)] = y * a / r - x * q;
            }
        }
        let d = g[(k, 0)];
        if !(d.norm() > 1e-12 * scale) {
            return Err(FactorError::Breakdown(format!(
                "structured solve pivot {k} vanished ({:.3e})",
                d.norm()
            )));
        }
        // Rotate the phase so the pivot is real positive.
        let phase = d.conj() / d.norm();
        for i in k..n {
            g[(i, 0)] *= phase;
            l[(i, k)] = g[(i, 0)];
        }
        for i in (k + 1..n).rev() {
            g[(i, 0)] = g[(i - 1, 0)];
        }
    }
    Ok(l)
}

/// Solves `Delta y = rhs` for every right-hand side using the generator alone.
pub fn structured_solve(gen: &DisplacementGenerator, rhs: &[CVector]) -> Result<Vec<CVector>> {
    let n = gen.dim();
    if let Some(bad) = rhs.iter().find(|r| r.len() != n) {
        return Err(FactorError::Dimension(format!(
            "right-hand side of length {} for a system of size {n}",
            bad.len()
        )));
    }
    let l = schur_cholesky(gen)?;
    Ok(rhs
        .iter()
        .map(|r| {
            // P Delta P (P y) = P r
            let pr = CVector::from_fn(n, |i, _| r[n - 1 - i]);
            let z = forward(&l, &pr);
            let w = backward(&l, &z);
            CVector::from_fn(n, |i, _| w[n - 1 - i])
        })
        .collect())
}

fn forward(l: &CMatrix, b: &CVector) -> CVector {
    let n = b.len();
    let mut x = CVector::zeros(n);
    for i in 0..n {
        let mut acc: Complex64 = b[i];
        for k in 0..i {
            acc -= l[(i, k)] * x[k];
        }
        x[i] = acc / l[(i, i)];
    }
    x
}

/// Solves `L^* x = b`.
fn backward(l: &CMatrix, b: &CVector) -> CVector {
    let n = b.len();
    let mut x = CVector::zeros(n);
    for i in (0..n).rev() {
        let mut acc: Complex64 = b[i];
        for k in i + 1..n {
            acc -= l[(k, i)].conj() * x[k];
        }
        x[i] = acc / l[(i, i)].conj();
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::{build_system, CompletionInput};
    use crate::laurent::LaurentPoly;

    fn sys_for(zeta: Vec<LaurentPoly>, f: LaurentPoly, n: usize) -> CompletionSystem {
        build_system(&CompletionInput::new(zeta, f, n).unwrap()).unwrap()
    }

    #[test]
    fn zero_theta_generator_is_last_unit_vector() {
        let sys = sys_for(vec![LaurentPoly::zero()], LaurentPoly::one(), 3);
        let gen = generators(&sys);
        let mut e = CMatrix::zeros(4, 2);
        e[(3, 1)] = c(1.0);
        assert_eq!(gen.a, e);
        assert_eq!(apply_rz(&sys.delta).unwrap(), gen.product());
    }

    #[test]
    fn two_by_two_swap() {
        let sys = sys_for(vec![LaurentPoly::monomial(c(1.0), -1)], LaurentPoly::one(), 1);
        let gen = generators(&sys);
        assert_eq!(gen.a.column(0).iter().copied().collect::<Vec<_>>(), vec![c(0.0), c(1.0)]);
        let expect = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(2.0)]);
        assert_eq!(gen.product(), expect);
        assert_eq!(apply_rz(&sys.delta).unwrap(), expect);
        let y = structured_solve(&gen, &[CVector::from_element(2, c(1.0))]).unwrap();
        assert!((y[0][0] - c(0.5)).norm() < 1e-15 && (y[0][1] - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn identity_solve() {
        let sys = sys_for(vec![LaurentPoly::zero()], LaurentPoly::one(), 4);
        let mut e = CVector::zeros(5);
        e[0] = c(1.0);
        let y = structured_solve(&generators(&sys), &[e.clone()]).unwrap();
        assert!((&y[0] - e).norm() < 1e-15);
    }

    #[test]
    fn rz_of_identity() {
        let rz = apply_rz(&CMatrix::identity(3, 3)).unwrap();
        let mut e = CMatrix::zeros(3, 3);
        e[(2, 2)] = c(1.0);
        assert_eq!(rz, e);
        assert!(apply_rz(&CMatrix::zeros(2, 3)).is_err());
    }
}
