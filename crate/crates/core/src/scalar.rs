//! Canonical scalar spectral factors via the cepstrum.
//!
//! For a positive density `s` on the circle the outer factor is
//! `exp(c_0/2 + sum_{n>0} c_n t^n)` where `c_n` are the Fourier coefficients of
//! `log s`. Everything is done on one `L`-point grid: sample, log, FFT, keep
//! the analytic half, exponentiate pointwise, FFT back and truncate.

use num_complex::Complex64;

use crate::error::{FactorError, Result};
use crate::grid::{eval_on, CircleGrid};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::linalg::{self, CMatrix};

/// Relative tolerance on the imaginary part of density samples.
const REAL_TOL: f64 = 1e-8;
/// Relative tolerance on negative density samples.
const NEGATIVE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScalarFactorParams {
    /// Number of grid points `L`, a power of two.
    pub grid_size: usize,
    /// Highest power kept in the returned factor; must be below `L/2`.
    pub out_degree: usize,
    /// Samples below `clamp_floor * max` are raised to that level before the log.
    pub clamp_floor: f64,
}

impl Default for ScalarFactorParams {
    fn default() -> Self {
        Self {
            grid_size: 4096,
            out_degree: 16,
            clamp_floor: 1e-12,
        }
    }
}

impl ScalarFactorParams {
    /// Defaults with `out_degree = 4 * (degree + 1)` for a density of the given degree.
    pub fn for_degree(degree: usize) -> Self {
        Self {
            out_degree: 4 * (degree + 1),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size == 0 || !self.grid_size.is_power_of_two() {
            return Err(FactorError::GridSize(self.grid_size));
        }
        if self.out_degree >= self.grid_size / 2 {
            return Err(FactorError::InvalidInput(format!(
                "out_degree {} must be below half the grid size {}",
                self.out_degree, self.grid_size
            )));
        }
        if !(self.clamp_floor > 0.0 && self.clamp_floor < 1.0) {
            return Err(FactorError::InvalidInput(format!(
                "clamp floor {} must lie in (0, 1)",
                self.clamp_floor
            )));
        }
        Ok(())
    }
}

/// A nonnegative scalar density, given either by its Laurent coefficients
/// (hermitian symmetric) or by real samples on the `L`-point grid.
#[derive(Clone, Debug)]
pub enum ScalarDensity {
    Poly(LaurentPoly),
    Samples(Vec<f64>),
}

/// Canonical outer factor `f+` with `|f+|^2 ~ s` and `f+(0) > 0`, truncated to
/// powers `0..=out_degree`.
pub fn scalar_spectral_factor(s: &ScalarDensity, p: &ScalarFactorParams) -> Result<LaurentPoly> {
    p.validate()?;
    let grid = CircleGrid::new(p.grid_size)?;
    let samples = match s {
        ScalarDensity::Poly(poly) => real_samples(&grid.samples(poly))?,
        ScalarDensity::Samples(v) => {
            if v.len() != p.grid_size {
                return Err(FactorError::Dimension(format!(
                    "{} samples for a grid of {}",
                    v.len(),
                    p.grid_size
                )));
            }
            v.clone()
        }
    };
    factor_samples(&grid, &samples, p.out_degree, p.clamp_floor)
}

pub(crate) fn real_samples(values: &[Complex64]) -> Result<Vec<f64>> {
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let worst_im = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst_im > REAL_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(FactorError::NonReal(worst_im));
    }
    Ok(values.iter().map(|z| z.re).collect())
}

pub(crate) fn factor_samples(
    grid: &CircleGrid,
    samples: &[f64],
    out_degree: usize,
    clamp_floor: f64,
) -> Result<LaurentPoly> {
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return Err(FactorError::ZeroDensity);
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -NEGATIVE_TOL * max {
        return Err(FactorError::Negative(min));
    }
    let floor = clamp_floor * max;
    let logs: Vec<Complex64> = samples
        .iter()
        .map(|&v| Complex64::new(v.max(floor).ln(), 0.0))
        .collect();

    let half = (grid.size() / 2) as i64;
    let cepstrum = grid.coefficients(&logs, 0, half - 1)?;
    let mut analytic = cepstrum.coeffs().to_vec();
    analytic[0] *= 0.5;
    let analytic = LaurentPoly::new(0, analytic);

    let values: Vec<Complex64> = grid.samples(&analytic).into_iter().map(|z| z.exp()).collect();
    grid.coefficients(&values, 0, out_degree as i64)
}

/// Real values of the leading principal minors `det S_m(t_k)`, `m = 1..=r`.
pub(crate) fn leading_minor_samples(grid: &CircleGrid, s: &LaurentMatrix) -> Result<Vec<Vec<f64>>> {
    let r = s.rows();
    let samples = eval_on(grid, s);
    let mut minors = vec![Vec::with_capacity(grid.size()); r];
    for k in 0..grid.size() {
        let at: CMatrix = samples.at(k);
        for (m, out) in minors.iter_mut().enumerate() {
            let block = at.view((0, 0), (m + 1, m + 1)).into_owned();
            out.push(linalg::det(&block));
        }
    }
    minors.iter().map(|v| real_samples(v)).collect()
}

/// Diagonal factors `f+_m = (det S_m)+ / (det S_{m-1})+`, each obtained by
/// factoring the pointwise quotient of consecutive leading minors.
pub fn diagonal_factors(s: &LaurentMatrix, p: &ScalarFactorParams) -> Result<Vec<LaurentPoly>> {
    diagonal_factors_with_degrees(s, p, &vec![p.out_degree; s.rows()])
}

pub(crate) fn diagonal_factors_with_degrees(
    s: &LaurentMatrix,
    p: &ScalarFactorParams,
    degrees: &[usize],
) -> Result<Vec<LaurentPoly>> {
    p.validate()?;
    if !s.is_square() {
        return Err(FactorError::NotSquare(s.rows(), s.cols()));
    }
    let grid = CircleGrid::new(p.grid_size)?;
    let minors = leading_minor_samples(&grid, s)?;
    let mut out = Vec::with_capacity(s.rows());
    for m in 0..s.rows() {
        let ratio: Vec<f64> = if m == 0 {
            minors[0].clone()
        } else {
            let prev = &minors[m - 1];
            let prev_floor = p.clamp_floor * prev.iter().copied().fold(0.0, f64::max);
            minors[m]
                .iter()
                .zip(prev)
                .map(|(&num, &den)| num / den.max(prev_floor))
                .collect()
        };
        let degree = degrees[m].min(p.grid_size / 2 - 1);
        out.push(factor_samples(&grid, &ratio, degree, p.clamp_floor)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn params(out_degree: usize) -> ScalarFactorParams {
        ScalarFactorParams {
            out_degree,
            ..ScalarFactorParams::default()
        }
    }

    #[test]
    fn constant_density() {
        let f = scalar_spectral_factor(&ScalarDensity::Poly(LaurentPoly::from_real(0, &[4.0])), &params(8)).unwrap();
        assert!(f.approx_eq(&LaurentPoly::from_real(0, &[2.0]), 1e-13));
    }

    #[test]
    fn first_order_outer_factor() {
        // |1 + 0.5 t|^2 by convolution
        let g = LaurentPoly::from_real(0, &[1.0, 0.5]);
        let s = &g * &g.conj_reflect();
        assert!(s.approx_eq(&LaurentPoly::from_real(-1, &[0.5, 1.25, 0.5]), 0.0));
        let f = scalar_spectral_factor(&ScalarDensity::Poly(s), &params(40)).unwrap();
        assert!(f.approx_eq(&g, 1e-12), "{f}");
    }

    #[test]
    fn boundary_zero_converges_slowly() {
        let s = LaurentPoly::from_real(-1, &[1.0, 2.0, 1.0]);
        let target = LaurentPoly::from_real(0, &[1.0, 1.0]);
        let coarse = scalar_spectral_factor(&ScalarDensity::Poly(s.clone()), &params(32)).unwrap();
        let fine = scalar_spectral_factor(
            &ScalarDensity::Poly(s),
            &ScalarFactorParams {
                grid_size: 1 << 16,
                out_degree: 32,
                clamp_floor: 1e-12,
            },
        )
        .unwrap();
        let e_coarse = coarse.max_diff(&target);
        let e_fine = fine.max_diff(&target);
        assert!(e_coarse < 1e-2, "{e_coarse}");
        assert!(e_fine < e_coarse, "{e_fine} vs {e_coarse}");
    }

    #[test]
    fn rejects_bad_densities() {
        let neg = LaurentPoly::from_real(-1, &[1.0, 0.0, 1.0]); // 2 cos
        assert!(matches!(
            scalar_spectral_factor(&ScalarDensity::Poly(neg), &params(4)),
            Err(FactorError::Negative(_))
        ));
        let odd = LaurentPoly::from_real(0, &[1.0, 0.5]);
        assert!(matches!(
            scalar_spectral_factor(&ScalarDensity::Poly(odd), &params(4)),
            Err(FactorError::NonReal(_))
        ));
        assert!(matches!(
            scalar_spectral_factor(&ScalarDensity::Samples(vec![0.0; 4096]), &params(4)),
            Err(FactorError::ZeroDensity)
        ));
        assert!(params(2048).validate().is_err());
    }

    #[test]
    fn diagonal_of_diag_matrix() {
        let s = LaurentMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => LaurentPoly::from_real(0, &[4.0]),
            (1, 1) => LaurentPoly::from_real(0, &[9.0]),
            _ => LaurentPoly::zero(),
        });
        let d = diagonal_factors(&s, &params(4)).unwrap();
        assert!(d[0].approx_eq(&LaurentPoly::from_real(0, &[2.0]), 1e-12));
        assert!(d[1].approx_eq(&LaurentPoly::from_real(0, &[3.0]), 1e-12));
    }

    #[test]
    fn first_diagonal_factor_of_known_density() {
        // a^2 + b^2 = 6, ab = 2, a > b > 0
        let a = (10f64.sqrt() + 2f64.sqrt()) / 2.0;
        let b = (10f64.sqrt() - 2f64.sqrt()) / 2.0;
        assert!((a * a + b * b - 6.0).abs() < 1e-14 && (a * b - 2.0).abs() < 1e-14);
        let d = diagonal_factors(&fixtures::known_factor_density(), &params(16)).unwrap();
        assert!(d[0].approx_eq(&LaurentPoly::from_real(0, &[a, b]), 1e-10), "{}", d[0]);
        assert!((a - 2.28825).abs() < 1e-5 && (b - 0.87403).abs() < 1e-5);
    }

    #[test]
    fn triangular_round_trip_diagonal() {
        // lower triangular causal A with outer diagonal entries positive at 0
        let a = LaurentMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => LaurentPoly::from_real(0, &[2.0, 0.5]),
            (1, 1) => LaurentPoly::from_real(0, &[3.0, -1.0, 0.25]),
            (2, 2) => LaurentPoly::from_real(0, &[1.5, 0.3]),
            (i, j) if i > j => LaurentPoly::from_real(0, &[1.0, -2.0]),
            _ => LaurentPoly::zero(),
        });
        let s = &a * &a.adjoint();
        let d = diagonal_factors(&s, &params(24)).unwrap();
        for (m, dm) in d.iter().enumerate() {
            assert!(dm.approx_eq(a.get(m, m), 1e-10), "m = {m}: {dm}");
        }
    }
}
