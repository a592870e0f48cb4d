//! Samples on the equispaced grid `t_k = exp(2 pi i k / L)` and the FFT pair
//! linking them with Laurent coefficients.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{FactorError, Result};
use crate::laurent::{LaurentMatrix, LaurentPoly};

/// Forward and inverse plans for one grid size.
#[derive(Clone)]
pub struct CircleGrid {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CircleGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleGrid").field("size", &self.size).finish()
    }
}

impl CircleGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_power_of_two() {
            return Err(FactorError::GridSize(size));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn point(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / self.size as f64)
    }

    /// Values of `p` at every grid point. Exact for any window (aliased powers
    /// coincide on the grid).
    pub fn samples(&self, p: &LaurentPoly) -> Vec<Complex64> {
        let l = self.size as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (k, c) in p.coeffs().iter().enumerate() {
            let n = p.n_min() + k as i64;
            buf[n.rem_euclid(l) as usize] += c;
        }
        // sum_n c_n e^{+2 pi i k n / L} is the unnormalized inverse DFT.
        self.inverse.process(&mut buf);
        buf
    }

    /// Fourier coefficients with powers in `[lo, hi]` from grid values.
    pub fn coefficients(&self, values: &[Complex64], lo: i64, hi: i64) -> Result<LaurentPoly> {
        if values.len() != self.size {
            return Err(FactorError::Dimension(format!(
                "{} samples for a grid of {}",
                values.len(),
                self.size
            )));
        }
        if hi < lo || hi - lo + 1 > self.size as i64 {
            return Err(FactorError::WindowTooLarge {
                lo,
                hi,
                size: self.size,
            });
        }
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        let l = self.size as i64;
        Ok(LaurentPoly::new(
            lo,
            (lo..=hi).map(|n| buf[n.rem_euclid(l) as usize] * scale).collect(),
        ))
    }

    /// Coefficients over `[-(L/2 - 1), L/2]`, every power the grid can resolve.
    pub fn full_coefficients(&self, values: &[Complex64]) -> Result<LaurentPoly> {
        let half = (self.size / 2) as i64;
        self.coefficients(values, -half + 1, half)
    }
}

/// Per-entry samples of a matrix function on the `L`-point grid.
#[derive(Clone, Debug)]
pub struct GridSamples {
    pub size: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries, each holding `size` samples.
    pub values: Vec<Vec<Complex64>>,
}

impl GridSamples {
    /// Matrix value at grid point `k`.
    pub fn at(&self, k: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.values[i * self.cols + j][k])
    }

    pub fn entry(&self, i: usize, j: usize) -> &[Complex64] {
        &self.values[i * self.cols + j]
    }
}

/// Samples every entry of `a` on the `L`-point grid.
pub fn eval_grid(a: &LaurentMatrix, size: usize) -> Result<GridSamples> {
    let grid = CircleGrid::new(size)?;
    Ok(eval_on(&grid, a))
}

pub(crate) fn eval_on(grid: &CircleGrid, a: &LaurentMatrix) -> GridSamples {
    GridSamples {
        size: grid.size(),
        rows: a.rows(),
        cols: a.cols(),
        values: a.entries().iter().map(|p| grid.samples(p)).collect(),
    }
}

/// Inverse of [`eval_grid`] for a window of at most `L` powers.
pub fn coeffs_from_grid(g: &GridSamples, window: (i64, i64)) -> Result<LaurentMatrix> {
    let grid = CircleGrid::new(g.size)?;
    let entries = g
        .values
        .iter()
        .map(|v| grid.coefficients(v, window.0, window.1))
        .collect::<Result<Vec<_>>>()?;
    LaurentMatrix::new(g.rows, g.cols, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_matrix_samples() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]).map(|x| Complex64::new(x, 0.0));
        let g = eval_grid(&LaurentMatrix::constant(&m), 8).unwrap();
        for k in 0..8 {
            assert!((g.at(k) - &m).norm() < 1e-14);
        }
    }

    #[test]
    fn monomial_samples_are_roots_of_unity() {
        let t = LaurentMatrix::new(1, 1, vec![LaurentPoly::monomial(Complex64::new(1.0, 0.0), 1)]).unwrap();
        let g = eval_grid(&t, 8).unwrap();
        for k in 0..8 {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 8.0);
            assert!((g.entry(0, 0)[k] - w).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(CircleGrid::new(12), Err(FactorError::GridSize(12))));
        let g = eval_grid(&LaurentMatrix::identity(1), 8).unwrap();
        assert!(matches!(
            coeffs_from_grid(&g, (-4, 4)),
            Err(FactorError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn negative_powers_round_trip() {
        let p = LaurentPoly::new(-3, (0..7).map(|k| Complex64::new(k as f64, -(k as f64))).collect());
        let grid = CircleGrid::new(16).unwrap();
        let back = grid.coefficients(&grid.samples(&p), -3, 3).unwrap();
        assert!(back.approx_eq(&p, 1e-13));
    }
}
