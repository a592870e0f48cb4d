//! Lower-triangular pre-factorization `S = M M^*` with outer diagonal entries,
//! and the row solve that produces the off-diagonal part of a row.

use num_complex::Complex64;

use crate::error::{FactorError, Result};
use crate::grid::{eval_on, CircleGrid};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::linalg::{self, CMatrix, CVector};
use crate::scalar::{diagonal_factors, ScalarFactorParams};

/// Lower triangular `M` with `M M^* ~ S` and its diagonal `f+_m`.
#[derive(Clone, Debug)]
pub struct TriangularFactor {
    pub m: LaurentMatrix,
    pub diag_factors: Vec<LaurentPoly>,
    /// Grid points where a leading block was regularized.
    pub clamped_points: usize,
}

/// Solution of `Mprev(t) (zeta_1, ..., zeta_{m-1})^*(t) = s_col(t)` on the grid.
#[derive(Clone, Debug)]
pub struct ZetaRow {
    pub zeta: Vec<LaurentPoly>,
    /// Grid points where `Mprev` was numerically singular and the solve fell
    /// back to a regularized least-squares step.
    pub clamped_points: usize,
}

/// Solves for the row `zeta` pointwise on an `L`-point grid and returns its
/// Fourier coefficients in `[-n_trunc, n_trunc]`.
pub fn solve_zeta_row(
    mprev: &LaurentMatrix,
    s_col: &[LaurentPoly],
    grid_size: usize,
    n_trunc: usize,
    clamp_floor: f64,
) -> Result<ZetaRow> {
    let grid = CircleGrid::new(grid_size)?;
    solve_zeta_row_on(&grid, mprev, s_col, n_trunc, clamp_floor)
}

pub(crate) fn solve_zeta_row_on(
    grid: &CircleGrid,
    mprev: &LaurentMatrix,
    s_col: &[LaurentPoly],
    n_trunc: usize,
    clamp_floor: f64,
) -> Result<ZetaRow> {
    let k = mprev.rows();
    if !mprev.is_square() || s_col.len() != k {
        return Err(FactorError::Dimension(format!(
            "row solve needs a square block matching {} right-hand sides",
            s_col.len()
        )));
    }
    if 2 * n_trunc + 1 > grid.size() {
        return Err(FactorError::WindowTooLarge {
            lo: -(n_trunc as i64),
            hi: n_trunc as i64,
            size: grid.size(),
        });
    }
    let l = grid.size();
    let m_samples = eval_on(grid, mprev);
    let rhs_samples: Vec<Vec<Complex64>> = s_col.iter().map(|p| grid.samples(p)).collect();

    let mut dets = Vec::with_capacity(l);
    let mut blocks = Vec::with_capacity(l);
    for i in 0..l {
        let b = m_samples.at(i);
        dets.push(linalg::det(&b).norm());
        blocks.push(b);
    }
    let det_floor = clamp_floor * dets.iter().copied().fold(0.0, f64::max);

    let mut zeta_samples = vec![vec![Complex64::new(0.0, 0.0); l]; k];
    let mut clamped = 0;
    for i in 0..l {
        let b = &blocks[i];
        let rhs = CVector::from_iterator(k, rhs_samples.iter().map(|v| v[i]));
        let y = if dets[i] > det_floor {
            b.clone().lu().solve(&rhs)
        } else {
            None
        };
        let y = match y {
            Some(y) => y,
            None => {
                clamped += 1;
                regularized_solve(b, &rhs, clamp_floor)
            }
        };
        for j in 0..k {
            zeta_samples[j][i] = y[j].conj();
        }
    }

    let n = n_trunc as i64;
    let zeta = zeta_samples
        .iter()
        .map(|v| grid.coefficients(v, -n, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ZetaRow {
        zeta,
        clamped_points: clamped,
    })
}

fn regularized_solve(b: &CMatrix, rhs: &CVector, clamp_floor: f64) -> CVector {
    let k = b.nrows();
    let gram = b.adjoint() * b;
    let scale = linalg::max_abs(&gram).max(f64::MIN_POSITIVE);
    let reg = gram + CMatrix::identity(k, k) * Complex64::new(clamp_floor * scale, 0.0);
    reg.lu()
        .solve(&(b.adjoint() * rhs))
        .unwrap_or_else(|| CVector::zeros(k))
}

/// `S = M M^*` with `M` lower triangular, diagonal from [`diagonal_factors`]
/// and each row's off-diagonal part from [`solve_zeta_row`] against the
/// leading block of the rows above. Off-diagonal entries are kept in
/// `[-out_degree, out_degree]`.
pub fn triangular_factor(s: &LaurentMatrix, p: &ScalarFactorParams) -> Result<TriangularFactor> {
    let diag = diagonal_factors(s, p)?;
    let r = s.rows();
    let grid = CircleGrid::new(p.grid_size)?;
    let mut m = LaurentMatrix::zeros(r, r);
    for (i, f) in diag.iter().enumerate() {
        m.set(i, i, f.clone());
    }
    let mut clamped = 0;
    for i in 1..r {
        let block = m.leading(i);
        let col: Vec<LaurentPoly> = (0..i).map(|j| s.get(j, i).clone()).collect();
        let row = solve_zeta_row_on(&grid, &block, &col, p.out_degree, p.clamp_floor)?;
        clamped += row.clamped_points;
        for (j, xi) in row.zeta.into_iter().enumerate() {
            m.set(i, j, xi);
        }
    }
    Ok(TriangularFactor {
        m,
        diag_factors: diag,
        clamped_points: clamped,
    })
}
