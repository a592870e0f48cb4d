//! Laurent polynomials and matrices of Laurent polynomials over the unit circle.
//!
//! A [`LaurentPoly`] stores a dense run of complex coefficients starting at an
//! arbitrary (possibly negative) power of `t`. Everything in the factorization
//! pipeline is phrased in terms of these two types: densities, triangular
//! factors, unitary completions and the final causal factor.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FactorError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Trigonometric polynomial `sum_n c_n t^n` with `n` in `[n_min, n_min + len - 1]`.
#[derive(Clone, Debug)]
pub struct LaurentPoly {
    n_min: i64,
    coeffs: Vec<Complex64>,
}

impl LaurentPoly {
    /// Builds a polynomial whose first coefficient multiplies `t^n_min`.
    ///
    /// An empty coefficient list is stored as the zero polynomial.
    pub fn new(n_min: i64, coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        Self { n_min, coeffs }
    }

    pub fn from_real(n_min: i64, coeffs: &[f64]) -> Self {
        Self::new(n_min, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self {
            n_min: 0,
            coeffs: vec![ZERO],
        }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            n_min: 0,
            coeffs: vec![c],
        }
    }

    /// `c * t^power`
    pub fn monomial(c: Complex64, power: i64) -> Self {
        Self {
            n_min: power,
            coeffs: vec![c],
        }
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `t^n`, zero outside the stored window.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let idx = n - self.n_min;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops leading and trailing coefficients with modulus `<= tol`.
    pub fn trim(&self, tol: f64) -> Self {
        let keep = |c: &Complex64| c.norm() > tol;
        let Some(first) = self.coeffs.iter().position(keep) else {
            return Self::zero();
        };
        let last = self.coeffs.iter().rposition(keep).unwrap_or(first);
        Self {
            n_min: self.n_min + first as i64,
            coeffs: self.coeffs[first..=last].to_vec(),
        }
    }

    /// Equality modulo zero padding, coefficientwise within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let lo = self.n_min.min(other.n_min);
        let hi = self.n_max().max(other.n_max());
        (lo..=hi).all(|n| (self.coeff(n) - other.coeff(n)).norm() <= tol)
    }

    /// Largest coefficientwise difference over the union window.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let lo = self.n_min.min(other.n_min);
        let hi = self.n_max().max(other.n_max());
        (lo..=hi)
            .map(|n| (self.coeff(n) - other.coeff(n)).norm())
            .fold(0.0, f64::max)
    }

    /// Re-expresses the polynomial over `[lo, hi]`, zero padding or cutting as needed.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        if hi < lo {
            return Self::zero();
        }
        Self::new(lo, (lo..=hi).map(|n| self.coeff(n)).collect())
    }

    /// `P+`: powers `>= 0`.
    pub fn project_plus(&self) -> Self {
        self.clip(0, i64::MAX)
    }

    /// `P-`: powers `<= 0`. Index zero is kept by both projections.
    pub fn project_minus(&self) -> Self {
        self.clip(i64::MIN, 0)
    }

    /// `P_N`: powers with `|n| <= n`.
    pub fn project_window(&self, n: usize) -> Self {
        let n = n as i64;
        self.clip(-n, n)
    }

    /// Keeps the stored coefficients with power in `[lo, hi]`.
    pub fn clip(&self, lo: i64, hi: i64) -> Self {
        let lo = lo.max(self.n_min);
        let hi = hi.min(self.n_max());
        if hi < lo {
            return Self::zero();
        }
        self.restrict(lo, hi)
    }

    /// Sum of `|c_n|` over powers outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: i64, hi: i64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let n = self.n_min + *k as i64;
                n < lo || n > hi
            })
            .map(|(_, c)| c.norm())
            .sum()
    }

    /// Sum of `|c_n|` over negative powers.
    pub fn negative_mass(&self) -> f64 {
        self.mass_outside(0, i64::MAX)
    }

    /// The function `conj(a(t))` on the circle: coefficient of `t^n` is `conj(c_{-n})`.
    pub fn conj_reflect(&self) -> Self {
        Self {
            n_min: -self.n_max(),
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n_min: self.n_min,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Shifts all powers by `k` (multiplication by `t^k`).
    pub fn shift(&self, k: i64) -> Self {
        Self {
            n_min: self.n_min + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Horner evaluation at any nonzero complex point.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc * t.powi(self.n_min as i32)
    }

    /// Quotient of an exact polynomial division, computed as a power series from
    /// the lowest nonzero coefficient of `divisor`. The remainder is discarded.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self> {
        let scale = self.max_abs().max(divisor.max_abs());
        let num = self.trim(1e-14 * scale);
        let den = divisor.trim(1e-14 * divisor.max_abs());
        if den.is_zero() {
            return Err(FactorError::Breakdown("division by the zero polynomial".into()));
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let len = num.coeffs.len() as i64 - den.coeffs.len() as i64 + 1;
        if len <= 0 {
            return Ok(Self::zero());
        }
        let len = len as usize;
        let d0 = den.coeffs[0];
        let mut rem = num.coeffs.clone();
        let mut q = vec![ZERO; len];
        for k in 0..len {
            let qk = rem[k] / d0;
            q[k] = qk;
            for (j, dj) in den.coeffs.iter().enumerate() {
                if k + j < rem.len() {
                    rem[k + j] -= qk * dj;
                }
            }
        }
        Ok(Self::new(num.n_min - den.n_min, q))
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let lo = self.n_min.min(other.n_min);
        let hi = self.n_max().max(other.n_max());
        Self::new(
            lo,
            (lo..=hi).map(|n| self.coeff(n) + other.coeff(n) * sign).collect(),
        )
    }
}

impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 0.0)
    }
}

impl Default for LaurentPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)t^{}", c.re, c.im, self.n_min + k as i64)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        LaurentPoly::new(self.n_min + rhs.n_min, out)
    }
}

/// Row-major `rows x cols` matrix with Laurent polynomial entries.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<LaurentPoly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(FactorError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> LaurentPoly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| LaurentPoly::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { LaurentPoly::one() } else { LaurentPoly::zero() })
    }

    /// Constant matrix function.
    pub fn constant(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| LaurentPoly::constant(m[(i, j)]))
    }

    /// Builds `sum_k C_k t^(lo + k)` from a list of coefficient matrices.
    pub fn from_coefficient_matrices(lo: i64, mats: &[DMatrix<Complex64>]) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(FactorError::Dimension("no coefficient matrices".into()));
        };
        let (rows, cols) = first.shape();
        if mats.iter().any(|m| m.shape() != (rows, cols)) {
            return Err(FactorError::Dimension("coefficient matrices differ in shape".into()));
        }
        Ok(Self::from_fn(rows, cols, |i, j| {
            LaurentPoly::new(lo, mats.iter().map(|m| m[(i, j)]).collect())
        }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: LaurentPoly) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Union of the entry windows.
    pub fn window(&self) -> (i64, i64) {
        let lo = self.entries.iter().map(LaurentPoly::n_min).min().unwrap_or(0);
        let hi = self.entries.iter().map(LaurentPoly::n_max).max().unwrap_or(0);
        (lo, hi)
    }

    /// Pointwise conjugate transpose on the circle.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj_reflect())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Upper-left `m x m` block.
    pub fn leading(&self, m: usize) -> Self {
        Self::from_fn(m, m, |i, j| self.get(i, j).clone())
    }

    /// `diag(self, I_k)`.
    pub fn embed(&self, size: usize) -> Self {
        Self::from_fn(size, size, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j).clone()
            } else if i == j {
                LaurentPoly::one()
            } else {
                LaurentPoly::zero()
            }
        })
    }

    /// Coefficient matrix of `t^n`.
    pub fn coefficient(&self, n: i64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).coeff(n))
    }

    pub fn eval(&self, t: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(t))
    }

    pub fn trim(&self, tol: f64) -> Self {
        self.map(|p| p.trim(tol))
    }

    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        self.map(|p| p.restrict(lo, hi))
    }

    pub fn clip(&self, lo: i64, hi: i64) -> Self {
        self.map(|p| p.clip(lo, hi))
    }

    pub fn project_plus(&self) -> Self {
        self.map(LaurentPoly::project_plus)
    }

    pub fn project_window(&self, n: usize) -> Self {
        self.map(|p| p.project_window(n))
    }

    pub fn mass_outside(&self, lo: i64, hi: i64) -> f64 {
        self.entries.iter().map(|p| p.mass_outside(lo, hi)).sum()
    }

    pub fn negative_mass(&self) -> f64 {
        self.entries.iter().map(LaurentPoly::negative_mass).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(LaurentPoly::max_abs).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    /// `(i,j)` at power `n` equals `conj((j,i)` at power `-n)`, within `tol`.
    pub fn is_hermitian_on_circle(&self, tol: f64) -> bool {
        self.is_square() && self.approx_eq(&self.adjoint(), tol)
    }

    /// Right-multiplies by a constant matrix.
    pub fn mul_constant(&self, c: &DMatrix<Complex64>) -> Self {
        let (lo, hi) = self.window();
        let mats: Vec<_> = (lo..=hi).map(|n| self.coefficient(n) * c).collect();
        Self::from_coefficient_matrices(lo, &mats).expect("non-empty window")
    }

    /// Left-multiplies by a constant matrix.
    pub fn premul_constant(&self, c: &DMatrix<Complex64>) -> Self {
        let (lo, hi) = self.window();
        let mats: Vec<_> = (lo..=hi).map(|n| c * self.coefficient(n)).collect();
        Self::from_coefficient_matrices(lo, &mats).expect("non-empty window")
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(FactorError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = LaurentPoly::zero();
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = rhs.get(k, j);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = &acc + &(a * b);
            }
            acc
        }))
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(FactorError::Dimension("shape mismatch in subtraction".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j)))
    }

    /// Exact determinant as a Laurent polynomial.
    pub fn det(&self) -> Result<LaurentPoly> {
        det_laurent(self)
    }
}

impl Mul for &LaurentMatrix {
    type Output = LaurentMatrix;
    fn mul(self, rhs: &LaurentMatrix) -> LaurentMatrix {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }
}

/// Determinant by cofactor expansion for `r <= 4`, fraction-free elimination above.
pub fn det_laurent(a: &LaurentMatrix) -> Result<LaurentPoly> {
    if !a.is_square() {
        return Err(FactorError::NotSquare(a.rows(), a.cols()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(LaurentPoly::one());
    }
    if n <= 4 {
        let cols: Vec<usize> = (0..n).collect();
        Ok(cofactor(a, 0, &cols))
    } else {
        bareiss(a)
    }
}

fn cofactor(a: &LaurentMatrix, row: usize, cols: &[usize]) -> LaurentPoly {
    if cols.len() == 1 {
        return a.get(row, cols[0]).clone();
    }
    let mut acc = LaurentPoly::zero();
    for (k, &c) in cols.iter().enumerate() {
        let entry = a.get(row, c);
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = entry * &cofactor(a, row + 1, &rest);
        acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

fn bareiss(a: &LaurentMatrix) -> Result<LaurentPoly> {
    let n = a.rows();
    let mut m: Vec<Vec<LaurentPoly>> = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).clone()).collect())
        .collect();
    let mut sign = 1.0;
    let mut prev = LaurentPoly::one();
    for k in 0..n - 1 {
        let pivot = (k..n)
            .max_by(|&x, &y| m[x][k].max_abs().total_cmp(&m[y][k].max_abs()))
            .expect("non-empty range");
        if m[pivot][k].max_abs() == 0.0 {
            return Ok(LaurentPoly::zero());
        }
        if pivot != k {
            m.swap(pivot, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(m[n - 1][n - 1].scale(Complex64::new(sign, 0.0)))
}

/// Mean absolute coefficient of `candidate * candidate^* - s`, taken over every
/// entry and every power of the union window.
pub fn residual_metric(candidate: &LaurentMatrix, s: &LaurentMatrix) -> Result<f64> {
    let product = candidate.try_mul(&candidate.adjoint())?;
    let err = product.try_sub(s)?;
    let (lo, hi) = err.window();
    let count = (err.rows() * err.cols()) as f64 * (hi - lo + 1) as f64;
    let total: f64 = err
        .entries()
        .iter()
        .flat_map(|p| p.coeffs().iter())
        .map(|c| c.norm())
        .sum();
    Ok(total / count)
}
