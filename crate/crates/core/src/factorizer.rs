//! Step-by-step matrix spectral factorization.
//!
//! Starting from the scalar factor of `s_11`, each step `m = 2..r` appends a
//! row `(zeta, f+_m)` to the current causal block, truncates it to order
//! `N_m`, and multiplies by the unitary completion of that row. The result is
//! a causal `S+` with `S+ (S+)^* ~ S` (left side) or `(S+)^* S+ ~ S` (right side).

use serde::{Deserialize, Serialize};

use crate::completion::{completion_defects, unitary_completion, CompletionInput, SolverKind};
use crate::error::{FactorError, Result};
use crate::grid::CircleGrid;
use crate::laurent::{residual_metric, LaurentMatrix, LaurentPoly};
use crate::linalg::{self, CMatrix};
use crate::scalar::{diagonal_factors_with_degrees, ScalarFactorParams};
use crate::triangular::solve_zeta_row_on;

/// Grid used for the per-step unitarity and determinant checks.
const CHECK_GRID: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orders {
    /// One `N` for every step.
    Single(usize),
    /// `N_2, ..., N_r`.
    PerStep(Vec<usize>),
}

impl Orders {
    /// The `r - 1` per-step orders.
    pub fn resolve(&self, r: usize) -> Result<Vec<usize>> {
        let steps = r.saturating_sub(1);
        let out = match self {
            Orders::Single(n) => vec![*n; steps],
            Orders::PerStep(v) => {
                if v.len() != steps {
                    return Err(FactorError::InvalidInput(format!(
                        "{} orders given for a {r}x{r} density, expected {steps}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        if out.contains(&0) {
            return Err(FactorError::InvalidInput("orders must be positive".into()));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `S = S+ (S+)^*`
    #[default]
    Left,
    /// `S = (S+)^* S+`
    Right,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Value at `z = 0` Hermitian positive definite.
    #[default]
    Center,
    /// Highest-degree coefficient upper triangular with positive diagonal.
    HighestUpper,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationConfig {
    pub orders: Orders,
    pub scalar: ScalarFactorParams,
    pub side: Side,
    pub normalization: Normalization,
    pub solver: SolverKind,
}

impl FactorizationConfig {
    pub fn with_order(n: usize) -> Self {
        Self {
            orders: Orders::Single(n),
            ..Self::default()
        }
    }
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        Self {
            orders: Orders::Single(32),
            scalar: ScalarFactorParams::default(),
            side: Side::Left,
            normalization: Normalization::Center,
            solver: SolverKind::Dense,
        }
    }
}

/// Checks recorded after one completion step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub m: usize,
    pub order: usize,
    pub delta_condition: f64,
    pub delta_min_eigenvalue: f64,
    pub unitarity_defect: f64,
    pub det_defect: f64,
    pub completion_negative_mass: f64,
    pub membership_defect: f64,
    /// Residual of the leading `m x m` block against `S_m`.
    pub step_residual: f64,
    /// Negative-power mass dropped when projecting the new block.
    pub dropped_negative_mass: f64,
    /// Grid points where the row solve was regularized.
    pub clamped_points: usize,
    pub dense_fallback: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Mean absolute coefficient of the reconstruction error.
    pub residual: f64,
    /// Largest unitarity defect over all completion steps.
    pub unitarity_defect: f64,
    /// Largest `|det U - 1|` over all completion steps.
    pub det_defect: f64,
    /// `max |c_n(det S+) - c_n(prod f+_m)|` before normalization.
    pub det_product_defect: f64,
    /// Smallest eigenvalue of the Hermitian part of `S+(0)`.
    pub min_eig_at_zero: f64,
    /// Coefficient mass beyond the output window that was discarded.
    pub truncated_mass: f64,
    /// Negative-power mass of the returned factor.
    pub negative_mass: f64,
    pub per_step: Vec<StepDiagnostics>,
}

#[derive(Clone, Debug)]
pub struct FactorizationResult {
    pub factor: LaurentMatrix,
    pub diagnostics: Diagnostics,
}

fn validate_density(s: &LaurentMatrix) -> Result<()> {
    if !s.is_square() {
        return Err(FactorError::NotSquare(s.rows(), s.cols()));
    }
    if s.rows() == 0 {
        return Err(FactorError::Dimension("empty density".into()));
    }
    let defect = s.max_diff(&s.adjoint());
    if defect > 1e-10 * s.max_abs().max(1.0) {
        return Err(FactorError::NotHermitian(defect));
    }
    Ok(())
}

pub fn factorize(s: &LaurentMatrix, cfg: &FactorizationConfig) -> Result<FactorizationResult> {
    validate_density(s)?;
    match cfg.side {
        Side::Left => {
            let raw = factorize_left_raw(s, cfg)?;
            finish(s, raw, cfg, Side::Left, s.window().1)
        }
        Side::Right => {
            let mut raw = factorize_left_raw(&s.transpose(), cfg)?;
            raw.factor = raw.factor.transpose();
            finish(s, raw, cfg, Side::Right, s.window().1)
        }
    }
}

struct RawFactor {
    factor: LaurentMatrix,
    diag_product: LaurentPoly,
    diagnostics: Diagnostics,
}

/// Left factor without normalization.
///
/// Only the input of each completion is truncated to `N_m`. The block itself
/// is multiplied by the completion of the truncated row, so the causal tail
/// of `f+_m` is carried along instead of being cut at `N_m`. Coefficients are
/// kept in a working window of `2 (N_2 + ... + N_r)` powers: every later step
/// lowers powers by at most its own `N`, so nothing beyond that window can
/// reach the output window `[0, N_2 + ... + N_r]`.
fn factorize_left_raw(s: &LaurentMatrix, cfg: &FactorizationConfig) -> Result<RawFactor> {
    let r = s.rows();
    let orders = cfg.orders.resolve(r)?;
    cfg.scalar.validate()?;
    let grid = CircleGrid::new(cfg.scalar.grid_size)?;
    let full = if r == 1 {
        cfg.scalar.out_degree
    } else {
        (2 * orders.iter().sum::<usize>()).min(cfg.scalar.grid_size / 2 - 1)
    };
    let fs: Vec<LaurentPoly> = diagonal_factors_with_degrees(s, &cfg.scalar, &vec![full; r])?
        .iter()
        .map(trim_relative)
        .collect();
    if let Some(&n) = orders.iter().find(|&&n| n > full) {
        return Err(FactorError::WindowTooLarge {
            lo: -(n as i64),
            hi: n as i64,
            size: cfg.scalar.grid_size,
        });
    }

    let mut block = LaurentMatrix::new(1, 1, vec![fs[0].clone()])?;
    let mut diag = Diagnostics::default();
    for m in 2..=r {
        let n = orders[m - 2];
        let col: Vec<LaurentPoly> = (0..m - 1).map(|j| s.get(j, m - 1).clone()).collect();
        let row = solve_zeta_row_on(&grid, &block, &col, full, cfg.scalar.clamp_floor)?;
        let zeta: Vec<LaurentPoly> = row.zeta.iter().map(trim_relative).collect();
        let input = CompletionInput::truncated(&zeta, &fs[m - 1], n)?;
        let comp = unitary_completion(&input, cfg.solver)?;
        let defects = completion_defects(&input, &comp.unitary, CHECK_GRID)?;

        let mut lower = block.embed(m);
        for (j, z) in zeta.into_iter().enumerate() {
            lower.set(m - 1, j, z);
        }
        lower.set(m - 1, m - 1, fs[m - 1].clone());
        let next = lower.try_mul(&comp.unitary)?;
        let dropped = next.negative_mass();
        block = next.clip(0, full as i64).map(trim_relative);

        diag.unitarity_defect = diag.unitarity_defect.max(defects.unitarity);
        diag.det_defect = diag.det_defect.max(defects.determinant);
        diag.per_step.push(StepDiagnostics {
            m,
            order: n,
            delta_condition: comp.delta_condition,
            delta_min_eigenvalue: comp.delta_min_eigenvalue,
            unitarity_defect: defects.unitarity,
            det_defect: defects.determinant,
            completion_negative_mass: defects.negative_mass,
            membership_defect: defects.membership,
            step_residual: residual_metric(&block.project_plus(), &s.leading(m))?,
            dropped_negative_mass: dropped,
            clamped_points: row.clamped_points,
            dense_fallback: comp.used_dense_fallback,
        });
    }

    let hi: i64 = if r == 1 {
        cfg.scalar.out_degree as i64
    } else {
        orders.iter().sum::<usize>() as i64
    };
    diag.truncated_mass = block.mass_outside(0, hi);
    let factor = block.clip(0, hi);
    let diag_product = fs.iter().fold(LaurentPoly::one(), |acc, f| (&acc * &f.clip(0, hi)).clip(0, hi));
    Ok(RawFactor {
        factor,
        diag_product,
        diagnostics: diag,
    })
}

/// Drops end coefficients below `1e-17` of the largest one.
fn trim_relative(p: &LaurentPoly) -> LaurentPoly {
    p.trim(1e-17 * p.max_abs())
}

fn finish(
    s: &LaurentMatrix,
    raw: RawFactor,
    cfg: &FactorizationConfig,
    side: Side,
    anchor_degree: i64,
) -> Result<FactorizationResult> {
    let RawFactor {
        factor,
        diag_product,
        mut diagnostics,
    } = raw;
    let (_, hi) = factor.window();
    let det = factor.det()?.clip(0, hi);
    diagnostics.det_product_defect = det.max_diff(&diag_product);
    let factor = canonicalize_at(&factor, cfg.normalization, side, anchor_degree)?;
    diagnostics.residual = match side {
        Side::Left => residual_metric(&factor, s)?,
        Side::Right => residual_metric(&factor.adjoint(), s)?,
    };
    diagnostics.min_eig_at_zero = linalg::min_hermitian_eigenvalue(&factor.coefficient(0));
    diagnostics.negative_mass = factor.negative_mass();
    Ok(FactorizationResult { factor, diagnostics })
}

/// Applies the constant unitary that puts `factor` in the requested form.
///
/// The highest degree is the largest power whose coefficient exceeds
/// `1e-8` times the largest coefficient. Use [`canonicalize_at`] when the
/// degree is known in advance.
pub fn canonicalize(factor: &LaurentMatrix, mode: Normalization, side: Side) -> Result<LaurentMatrix> {
    let scale = factor.max_abs();
    let (lo, hi) = factor.window();
    let top = (lo..=hi)
        .rev()
        .find(|&n| linalg::max_abs(&factor.coefficient(n)) > 1e-8 * scale)
        .unwrap_or(lo);
    canonicalize_at(factor, mode, side, top)
}

/// As [`canonicalize`], with the highest-degree anchor given explicitly.
pub fn canonicalize_at(factor: &LaurentMatrix, mode: Normalization, side: Side, top: i64) -> Result<LaurentMatrix> {
    match mode {
        Normalization::None => Ok(factor.clone()),
        Normalization::Center => match side {
            Side::Left => center_left(factor),
            // Same operation on the transpose, so right on S mirrors left on S^T exactly.
            Side::Right => Ok(center_left(&factor.transpose())?.transpose()),
        },
        Normalization::HighestUpper => {
            let a = factor.coefficient(top);
            check_anchor(&a, "highest-upper")?;
            let w = match side {
                // W A upper triangular: W = Q^* for A = Q R.
                Side::Right => linalg::qr_positive(&a).0.adjoint(),
                // A W upper triangular: A W = U with U U^* = A A^*.
                Side::Left => {
                    let u = upper_cholesky(&(&a * a.adjoint()))?;
                    linalg::inverse(&a, "highest-upper")? * u
                }
            };
            Ok(match side {
                Side::Right => factor.premul_constant(&w),
                Side::Left => factor.mul_constant(&w),
            })
        }
    }
}

fn check_anchor(a: &CMatrix, mode: &'static str) -> Result<()> {
    let sv = linalg::singular_values(a);
    let (hi, lo) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
    if !(lo > 1e-12 * hi) {
        return Err(FactorError::SingularAnchor(mode));
    }
    Ok(())
}

fn center_left(factor: &LaurentMatrix) -> Result<LaurentMatrix> {
    let a0 = factor.coefficient(0);
    check_anchor(&a0, "center")?;
    Ok(factor.mul_constant(&linalg::polar_right(&a0, "center")?))
}

/// Upper triangular `U` with positive diagonal and `U U^* = h`.
fn upper_cholesky(h: &CMatrix) -> Result<CMatrix> {
    let n = h.nrows();
    let rev = |m: &CMatrix| CMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)]);
    let l = nalgebra::Cholesky::new(rev(h))
        .ok_or_else(|| FactorError::Breakdown("anchor Gram matrix is not positive definite".into()))?
        .l();
    Ok(rev(&l))
}

/// Residuals of [`factorize`] at each order in `orders`.
pub fn convergence_sweep(s: &LaurentMatrix, cfg: &FactorizationConfig, orders: &[usize]) -> Result<Vec<(usize, f64)>> {
    orders
        .iter()
        .map(|&n| {
            let run = FactorizationConfig {
                orders: Orders::Single(n),
                ..cfg.clone()
            };
            Ok((n, factorize(s, &run)?.diagnostics.residual))
        })
        .collect()
}

/// Like [`convergence_sweep`], with the scalar accuracy tightened together
/// with the order.
pub fn convergence_sweep_paired(
    s: &LaurentMatrix,
    cfg: &FactorizationConfig,
    runs: &[(usize, ScalarFactorParams)],
) -> Result<Vec<(usize, f64)>> {
    runs.iter()
        .map(|(n, scalar)| {
            let run = FactorizationConfig {
                orders: Orders::Single(*n),
                scalar: *scalar,
                ..cfg.clone()
            };
            Ok((*n, factorize(s, &run)?.diagnostics.residual))
        })
        .collect()
}
