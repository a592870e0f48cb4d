//! Unitary completion of a row-augmented identity.
//!
//! Given `F(t)` equal to the identity except for its last row
//! `(zeta_1, ..., zeta_{m-1}, f+)`, with `zeta_i` supported on `[-N, N]` and
//! `f+` causal of degree `N` with `f+(0) > 0`, this module builds a polynomial
//! matrix `U_F` with
//!
//! * `U_F(t)` unitary with determinant one on the circle,
//! * rows `1..m-1` causal in `[0, N]` and row `m` anticausal in `[-N, 0]`,
//! * `F U_F` causal and `(F U_F)(0)` Hermitian positive definite.
//!
//! The construction solves `m` linear systems sharing one Hermitian positive
//! definite matrix `Delta = sum_i Theta_i Theta_i^* + I`, assembles the solution
//! columns into `V(t)`, and turns `V` unitary with two constant right factors.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::displacement::{generators, structured_solve};
use crate::error::{FactorError, Result};
use crate::grid::{eval_on, CircleGrid};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::linalg::{self, c, CMatrix, CVector};

/// Linear solver used for the `Delta` systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Dense,
    Structured,
}

/// The last row of `F^(N)` together with `N`.
#[derive(Clone, Debug)]
pub struct CompletionInput {
    order: usize,
    zeta: Vec<LaurentPoly>,
    f_plus: LaurentPoly,
}

impl CompletionInput {
    /// Checks the window constraints exactly: `zeta_i` in `[-N, N]`, `f+` in
    /// `[0, N]` with a real positive constant term.
    pub fn new(zeta: Vec<LaurentPoly>, f_plus: LaurentPoly, order: usize) -> Result<Self> {
        if zeta.is_empty() {
            return Err(FactorError::InvalidInput("completion needs m >= 2".into()));
        }
        let n = order as i64;
        for (i, z) in zeta.iter().enumerate() {
            let z = z.trim(0.0);
            if !z.is_zero() && (z.n_min() < -n || z.n_max() > n) {
                return Err(FactorError::InvalidInput(format!(
                    "zeta_{} has window [{}, {}] outside [-{n}, {n}]",
                    i + 1,
                    z.n_min(),
                    z.n_max()
                )));
            }
        }
        let f = f_plus.trim(0.0);
        if f.n_min() < 0 || f.n_max() > n {
            return Err(FactorError::InvalidInput(format!(
                "f+ has window [{}, {}] outside [0, {n}]",
                f.n_min(),
                f.n_max()
            )));
        }
        let d0 = f_plus.coeff(0);
        if !(d0.re > 0.0) || d0.im.abs() > 1e-10 * d0.re {
            return Err(FactorError::InvalidInput(format!(
                "f+(0) = {d0} must be real and positive"
            )));
        }
        Ok(Self {
            order,
            zeta: zeta.into_iter().map(|z| z.restrict(-n, n)).collect(),
            f_plus: f_plus.restrict(0, n),
        })
    }

    /// Applies `P_N` to `zeta` and keeps powers `0..=N` of `f+` before validating.
    pub fn truncated(zeta: &[LaurentPoly], f_plus: &LaurentPoly, order: usize) -> Result<Self> {
        let n = order as i64;
        Self::new(
            zeta.iter().map(|z| z.project_window(order)).collect(),
            f_plus.clip(0, n),
            order,
        )
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Matrix size `m`.
    pub fn size(&self) -> usize {
        self.zeta.len() + 1
    }

    pub fn zeta(&self) -> &[LaurentPoly] {
        &self.zeta
    }

    pub fn f_plus(&self) -> &LaurentPoly {
        &self.f_plus
    }

    /// `F^(N)(t)`: identity with last row `(zeta, f+)`.
    pub fn row_augmented_identity(&self) -> LaurentMatrix {
        let m = self.size();
        let mut f = LaurentMatrix::identity(m);
        for (j, z) in self.zeta.iter().enumerate() {
            f.set(m - 1, j, z.clone());
        }
        f.set(m - 1, m - 1, self.f_plus.clone());
        f
    }
}

/// Matrices of the block systems for one completion step.
#[derive(Clone, Debug)]
pub struct CompletionSystem {
    /// Coefficients `d_0..d_N` of `f+`.
    pub d: Vec<Complex64>,
    /// Power series coefficients `b_0..b_N` of `1 / f+`.
    pub b: Vec<Complex64>,
    /// `gamma[i][n] = c_{-n}(zeta_i)` for `n = 0..=N`.
    pub gamma: Vec<Vec<Complex64>>,
    /// `Theta_i = D^{-1} Gamma_i`
    pub theta: Vec<CMatrix>,
    /// `sum_i Theta_i Theta_i^* + I`
    pub delta: CMatrix,
}

impl CompletionSystem {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Upper triangular Toeplitz matrix with first row `d`.
    pub fn d_matrix(&self) -> CMatrix {
        upper_toeplitz(&self.d)
    }

    /// Upper triangular Toeplitz matrix with first row `b`, the inverse of `D`.
    pub fn d_inv_matrix(&self) -> CMatrix {
        upper_toeplitz(&self.b)
    }

    /// Hankel matrix `Gamma_i[k, l] = gamma_{i, k + l}`, zero for `k + l > N`.
    pub fn gamma_matrix(&self, i: usize) -> CMatrix {
        hankel(&self.gamma[i])
    }
}

fn upper_toeplitz(first_row: &[Complex64]) -> CMatrix {
    let n = first_row.len();
    CMatrix::from_fn(n, n, |k, l| if l >= k { first_row[l - k] } else { c(0.0) })
}

fn hankel(seq: &[Complex64]) -> CMatrix {
    let n = seq.len();
    CMatrix::from_fn(n, n, |k, l| if k + l < n { seq[k + l] } else { c(0.0) })
}

/// Power series coefficients `b_0..b_N` of `1 / f` from those of `f`.
pub fn reciprocal_series(d: &[Complex64]) -> Vec<Complex64> {
    let n = d.len();
    let mut b = vec![c(0.0); n];
    let inv_d0 = c(1.0) / d[0];
    b[0] = inv_d0;
    for k in 1..n {
        let acc: Complex64 = (1..=k).map(|j| d[j] * b[k - j]).sum();
        b[k] = -inv_d0 * acc;
    }
    b
}

/// Closed form `Theta[k, l] = sum_{n=0}^{N-(k+l)} b_n gamma_{k+l+n}` (zero for `k + l > N`).
pub fn theta_closed_form(b: &[Complex64], gamma: &[Complex64]) -> CMatrix {
    let size = b.len();
    let big_n = size - 1;
    CMatrix::from_fn(size, size, |k, l| {
        if k + l > big_n {
            c(0.0)
        } else {
            (0..=big_n - (k + l)).map(|n| b[n] * gamma[k + l + n]).sum()
        }
    })
}

pub fn build_system(input: &CompletionInput) -> Result<CompletionSystem> {
    let big_n = input.order as i64;
    let d: Vec<Complex64> = (0..=big_n).map(|n| input.f_plus.coeff(n)).collect();
    if !(d[0].re > 0.0) {
        return Err(FactorError::InvalidInput(format!("d_0 = {} must be positive", d[0])));
    }
    let b = reciprocal_series(&d);
    // zeta_i(t) = sum_n gamma_{in} t^{-n}
    let gamma: Vec<Vec<Complex64>> = input
        .zeta
        .iter()
        .map(|z| (0..=big_n).map(|n| z.coeff(-n)).collect())
        .collect();
    let d_inv = upper_toeplitz(&b);
    let theta: Vec<CMatrix> = gamma.iter().map(|g| &d_inv * hankel(g)).collect();
    let size = d.len();
    let mut delta = CMatrix::identity(size, size);
    for t in &theta {
        delta += t * t.adjoint();
    }
    Ok(CompletionSystem {
        d,
        b,
        gamma,
        theta,
        delta,
    })
}

/// Solutions `X_i^j` of the `m` block systems and the matrix `V(t)` they define.
#[derive(Clone, Debug)]
pub struct SolutionBundle {
    /// `x[j][i]` is the coefficient vector `X_i^{j}` (0-based).
    pub x: Vec<Vec<CVector>>,
    /// Rows `1..m-1` hold `v+_ij`; row `m` holds `conj(v+_mj)`.
    pub v: LaurentMatrix,
    /// `C = (V^*(1) V(1))^T`, the constant Gram matrix of the columns of `V`.
    pub gram: CMatrix,
    /// True when the structured solver broke down and the dense path was used.
    pub used_dense_fallback: bool,
}

/// Right-hand sides `D^{-1} Gamma_j conj(D^{-1}) 1` for `j = 1..m`, with
/// `Gamma_m = conj(D)`.
fn right_hand_sides(sys: &CompletionSystem) -> Vec<CVector> {
    let size = sys.dim();
    let mut conj_dinv_e0 = CVector::zeros(size);
    conj_dinv_e0[0] = sys.b[0].conj();
    let mut out: Vec<CVector> = sys.theta.iter().map(|t| t * &conj_dinv_e0).collect();
    let mut last = CVector::zeros(size);
    last[0] = sys.b[0];
    out.push(last);
    out
}

fn dense_solve(delta: &CMatrix, rhs: &[CVector]) -> Result<Vec<CVector>> {
    let chol = Cholesky::new(delta.clone())
        .ok_or_else(|| FactorError::Breakdown("Delta is not positive definite".into()))?;
    Ok(rhs.iter().map(|r| chol.solve(r)).collect())
}

pub fn solve_columns(sys: &CompletionSystem, input: &CompletionInput, solver: SolverKind) -> Result<SolutionBundle> {
    let m = input.size();
    let rhs = right_hand_sides(sys);
    let mut used_dense_fallback = false;
    // y_j = conj(X_m^j)
    let ys = match solver {
        SolverKind::Dense => dense_solve(&sys.delta, &rhs)?,
        SolverKind::Structured => match structured_solve(&generators(sys), &rhs) {
            Ok(ys) => ys,
            Err(_) => {
                used_dense_fallback = true;
                dense_solve(&sys.delta, &rhs)?
            }
        },
    };

    let size = sys.dim();
    let mut x = Vec::with_capacity(m);
    for (j, y) in ys.iter().enumerate() {
        let mut col = Vec::with_capacity(m);
        for i in 0..m - 1 {
            // X_i = conj(D^{-1}) conj(Gamma_i) conj(X_m) - delta_ij conj(D^{-1}) 1
            let mut xi = sys.theta[i].map(|z| z.conj()) * y;
            if i == j {
                xi[0] -= sys.b[0].conj();
            }
            col.push(xi);
        }
        col.push(y.map(|z| z.conj()));
        x.push(col);
    }

    let v = LaurentMatrix::from_fn(m, m, |i, j| {
        let p = LaurentPoly::new(0, x[j][i].iter().copied().collect());
        if i == m - 1 {
            p.conj_reflect()
        } else {
            p
        }
    });
    debug_assert_eq!(x[0][0].len(), size);
    let v1 = v.eval(c(1.0));
    let gram = (v1.adjoint() * &v1).transpose();
    Ok(SolutionBundle {
        x,
        v,
        gram,
        used_dense_fallback,
    })
}

/// `U = V V(1)^{-1}`, then `U_F = U (FU(0))^{-1} sqrt(FU(0) FU(0)^*)`.
pub fn unitarize(bundle: &SolutionBundle, input: &CompletionInput) -> Result<LaurentMatrix> {
    let v1 = bundle.v.eval(c(1.0));
    let u = bundle.v.mul_constant(&linalg::inverse(&v1, "V(1)")?);
    let fu = input.row_augmented_identity().try_mul(&u)?;
    let fu0 = fu.coefficient(0);
    let correction = linalg::polar_right(&fu0, "(F U)(0)")?;
    Ok(u.mul_constant(&correction))
}

/// Result of one completion together with the quantities worth reporting.
#[derive(Clone, Debug)]
pub struct Completion {
    pub unitary: LaurentMatrix,
    pub delta_min_eigenvalue: f64,
    pub delta_condition: f64,
    pub used_dense_fallback: bool,
}

/// Builds and solves the systems, then unitarizes.
pub fn unitary_completion(input: &CompletionInput, solver: SolverKind) -> Result<Completion> {
    let sys = build_system(input)?;
    let bundle = solve_columns(&sys, input, solver)?;
    let unitary = unitarize(&bundle, input)?;
    let ev = linalg::hermitian_eigenvalues(&sys.delta);
    let lo = ev.first().copied().unwrap_or(1.0);
    let hi = ev.last().copied().unwrap_or(1.0);
    Ok(Completion {
        unitary,
        delta_min_eigenvalue: lo,
        delta_condition: hi / lo,
        used_dense_fallback: bundle.used_dense_fallback,
    })
}

/// Numerical checks of the completion properties.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct CompletionDefects {
    /// `max_k max_ij |(U U^* - I)(t_k)|`
    pub unitarity: f64,
    /// `max_k |det U(t_k) - 1|`
    pub determinant: f64,
    /// Coefficient mass of rows `1..m-1` outside `[0, N]` plus row `m` outside `[-N, 0]`.
    pub structure: f64,
    /// Negative-power coefficient mass of `F U`.
    pub negative_mass: f64,
    /// Smallest eigenvalue of the Hermitian part of `(F U)(0)`.
    pub min_eig_at_zero: f64,
    /// Hermitian defect `|(F U)(0) - (F U)(0)^*|_max`.
    pub hermitian_at_zero: f64,
    /// Largest negative-power mass among the `m` conditions for every modified column.
    pub membership: f64,
}

pub fn completion_defects(input: &CompletionInput, u: &LaurentMatrix, grid_size: usize) -> Result<CompletionDefects> {
    let m = input.size();
    let n = input.order as i64;
    let grid = CircleGrid::new(grid_size)?;
    let samples = eval_on(&grid, u);
    let mut unitarity: f64 = 0.0;
    let mut determinant: f64 = 0.0;
    for k in 0..grid.size() {
        let at = samples.at(k);
        unitarity = unitarity.max(linalg::max_abs(&(&at * at.adjoint() - CMatrix::identity(m, m))));
        determinant = determinant.max((linalg::det(&at) - c(1.0)).norm());
    }
    let mut structure = 0.0;
    for i in 0..m {
        for j in 0..m {
            let e = u.get(i, j);
            structure += if i + 1 < m { e.mass_outside(0, n) } else { e.mass_outside(-n, 0) };
        }
    }
    let fu = input.row_augmented_identity().try_mul(u)?;
    let fu0 = fu.coefficient(0);
    Ok(CompletionDefects {
        unitarity,
        determinant,
        structure,
        negative_mass: fu.negative_mass(),
        min_eig_at_zero: linalg::min_hermitian_eigenvalue(&fu0),
        hermitian_at_zero: linalg::max_abs(&(&fu0 - fu0.adjoint())),
        membership: membership_defect(input, u),
    })
}

/// For each column of `u`, form the modified column `x` (last entry
/// conjugated on the circle) and evaluate the negative-power mass of
/// `zeta_i x_m - f conj(x_i)` for `i < m` and of
/// `sum_i zeta_i x_i + f conj(x_m)`.
pub fn membership_defect(input: &CompletionInput, u: &LaurentMatrix) -> f64 {
    let m = input.size();
    let f = &input.f_plus;
    let mut worst: f64 = 0.0;
    for j in 0..m {
        let x: Vec<LaurentPoly> = (0..m)
            .map(|i| {
                if i + 1 < m {
                    u.get(i, j).clone()
                } else {
                    u.get(i, j).conj_reflect()
                }
            })
            .collect();
        let xm = &x[m - 1];
        let mut last = f * &xm.conj_reflect();
        for (zeta, xi) in input.zeta.iter().zip(&x[..m - 1]) {
            let cond = &(zeta * xm) - &(f * &xi.conj_reflect());
            worst = worst.max(cond.negative_mass());
            last = &last + &(zeta * xi);
        }
        worst = worst.max(last.negative_mass());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn simple_input() -> CompletionInput {
        // m = 2, N = 1, f = 1, zeta_1 = 1/t
        CompletionInput::new(vec![LaurentPoly::monomial(c(1.0), -1)], LaurentPoly::one(), 1).unwrap()
    }

    #[test]
    fn hand_computed_system() {
        let sys = build_system(&simple_input()).unwrap();
        let i2 = CMatrix::identity(2, 2);
        let swap = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert_eq!(sys.d_matrix(), i2);
        assert_eq!(sys.gamma_matrix(0), swap);
        assert_eq!(sys.theta[0], swap);
        assert_eq!(sys.delta, i2 * c(2.0));
    }

    #[test]
    fn zero_zeta_gives_identity() {
        for m in 2..=4 {
            let input = CompletionInput::new(vec![LaurentPoly::zero(); m - 1], LaurentPoly::one(), 3).unwrap();
            let sys = build_system(&input).unwrap();
            assert_eq!(sys.delta, CMatrix::identity(4, 4));
            assert!(sys.theta.iter().all(|t| t.iter().all(|z| *z == c(0.0))));
            let bundle = solve_columns(&sys, &input, SolverKind::Dense).unwrap();
            // column j < m solves with right-hand side 1 in equation j: X_j = -1 at power 0
            let mut expect = LaurentMatrix::identity(m).map(|p| p.scale(c(-1.0)));
            expect.set(m - 1, m - 1, LaurentPoly::one());
            assert!(bundle.v.approx_eq(&expect, 1e-15));
            let u = unitarize(&bundle, &input).unwrap();
            assert!(u.approx_eq(&LaurentMatrix::identity(m), 1e-14));
        }
    }

    #[test]
    fn scalar_order_zero_closed_form() {
        // m = 2, N = 0, f = d0, zeta = g: Delta = 1 + |g/d0|^2
        let d0 = 1.5;
        let g = cx(0.4, -0.7);
        let input = CompletionInput::new(vec![LaurentPoly::constant(g)], LaurentPoly::from_real(0, &[d0]), 0).unwrap();
        let sys = build_system(&input).unwrap();
        let delta = 1.0 + (g / d0).norm_sqr();
        assert!((sys.delta[(0, 0)] - c(delta)).norm() < 1e-15);
        let bundle = solve_columns(&sys, &input, SolverKind::Dense).unwrap();
        // column 1: y = (g/d0)(1/d0)/delta, x_2 = conj(y), x_1 = conj(g/d0) y - 1/d0
        let theta = g / d0;
        let y1 = theta * (1.0 / d0) / delta;
        let x11 = theta.conj() * y1 - 1.0 / d0;
        // column 2: y = (1/d0)/delta, x_1 = conj(theta) y
        let y2 = c(1.0 / d0 / delta);
        let x12 = theta.conj() * y2;
        assert!((bundle.v.get(0, 0).coeff(0) - x11).norm() < 1e-15);
        assert!((bundle.v.get(1, 0).coeff(0) - y1).norm() < 1e-15);
        assert!((bundle.v.get(0, 1).coeff(0) - x12).norm() < 1e-15);
        assert!((bundle.v.get(1, 1).coeff(0) - y2).norm() < 1e-15);
        let u = unitary_completion(&input, SolverKind::Dense).unwrap().unitary;
        let d = completion_defects(&input, &u, 16).unwrap();
        assert!(d.unitarity < 1e-14 && d.determinant < 1e-14 && d.min_eig_at_zero > 0.0);
    }

    #[test]
    fn rejects_bad_windows() {
        let z = LaurentPoly::monomial(c(1.0), -3);
        assert!(CompletionInput::new(vec![z.clone()], LaurentPoly::one(), 2).is_err());
        assert!(CompletionInput::truncated(&[z], &LaurentPoly::one(), 2).is_ok());
        assert!(CompletionInput::new(vec![LaurentPoly::zero()], LaurentPoly::from_real(0, &[-1.0]), 2).is_err());
        assert!(CompletionInput::new(vec![LaurentPoly::zero()], LaurentPoly::from_real(-1, &[1.0, 1.0]), 2).is_err());
        assert!(CompletionInput::new(vec![], LaurentPoly::one(), 2).is_err());
    }

    #[test]
    fn reciprocal_series_inverts() {
        let d = vec![c(2.0), cx(1.0, 1.0), c(-0.5), c(0.25)];
        let b = reciprocal_series(&d);
        let prod = upper_toeplitz(&d) * upper_toeplitz(&b);
        assert!((prod - CMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn gamma_uses_negated_index() {
        // zeta = 2/t + 5t: gamma_1 = c_{-1} = 2, gamma_{-1} is never read
        let zeta = LaurentPoly::new(-1, vec![c(2.0), c(0.0), c(5.0)]);
        let input = CompletionInput::new(vec![zeta], LaurentPoly::one(), 1).unwrap();
        let sys = build_system(&input).unwrap();
        assert_eq!(sys.gamma[0], vec![c(0.0), c(2.0)]);
    }
}
