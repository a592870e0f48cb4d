//! Browser bindings for the demo page in `www/`. Every function returns a JSON
//! string; failures come back as `{"error": "..."}`.

use num_complex::Complex64;
use serde::Serialize;
use spectral_factor::{
    convergence_sweep, factorize, fixtures, scalar_spectral_factor, FactorizationConfig, LaurentMatrix, LaurentPoly,
    Normalization, Orders, ScalarDensity, ScalarFactorParams, Side, SolverKind,
};
use wasm_bindgen::prelude::*;

/// Points used when sampling curves for plotting.
const PLOT_POINTS: usize = 256;

#[derive(Serialize)]
struct KnownFactor {
    order: usize,
    /// Coefficient matrices of powers 0 and 1, row-major, real parts.
    coefficients: [[f64; 4]; 2],
    /// Largest absolute deviation from the exact factor.
    max_error: f64,
    residual: f64,
    /// Largest coefficient at powers 2 and above.
    tail: f64,
}

#[derive(Serialize)]
struct SweepPoint {
    order: usize,
    residual: f64,
}

#[derive(Serialize)]
struct ScalarResult {
    coefficients: Vec<f64>,
    /// Density and `|f+|^2` on `PLOT_POINTS` equispaced angles.
    density: Vec<f64>,
    reconstructed: Vec<f64>,
    max_error: f64,
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("plain data serializes"),
        Err(e) => serde_json::json!({ "error": e }).to_string(),
    }
}

fn known_config(order: usize, grid_log2: u32) -> Result<FactorizationConfig, String> {
    if !(8..=20).contains(&grid_log2) {
        return Err(format!("grid exponent {grid_log2} outside 8..=20"));
    }
    Ok(FactorizationConfig {
        orders: Orders::Single(order),
        scalar: ScalarFactorParams {
            grid_size: 1 << grid_log2,
            out_degree: order,
            clamp_floor: 1e-12,
        },
        side: Side::Right,
        normalization: Normalization::HighestUpper,
        solver: SolverKind::Dense,
    })
}

/// Right factor of the 2x2 example density with highest-upper normalization.
#[wasm_bindgen]
pub fn factor_known(order: usize, grid_log2: u32) -> String {
    to_json((|| {
        let cfg = known_config(order, grid_log2)?;
        let res = factorize(&fixtures::known_factor_density(), &cfg).map_err(|e| e.to_string())?;
        let exact = fixtures::known_right_factor_coefficients();
        let mut coefficients = [[0.0; 4]; 2];
        let mut max_error = 0.0f64;
        for (n, row) in coefficients.iter_mut().enumerate() {
            let c = res.factor.coefficient(n as i64);
            for (k, v) in row.iter_mut().enumerate() {
                let z = c[(k / 2, k % 2)];
                *v = z.re;
                max_error = max_error.max((z - exact[n][k]).norm());
            }
        }
        Ok(KnownFactor {
            order,
            coefficients,
            max_error,
            residual: res.diagnostics.residual,
            tail: res.factor.clip(2, res.factor.window().1.max(2)).max_abs(),
        })
    })())
}

/// Residual of the example factorization for `order = from, from + step, ..., <= to`.
#[wasm_bindgen]
pub fn sweep_known(from: usize, to: usize, step: usize, grid_log2: u32) -> String {
    to_json((|| {
        if step == 0 || from == 0 || from > to || (to - from) / step >= 64 {
            return Err("need 0 < from <= to, step > 0 and at most 64 points".to_string());
        }
        let orders: Vec<usize> = (from..=to).step_by(step).collect();
        let cfg = known_config(to, grid_log2)?;
        let sweep = convergence_sweep(&fixtures::known_factor_density(), &cfg, &orders).map_err(|e| e.to_string())?;
        Ok(sweep
            .into_iter()
            .map(|(order, residual)| SweepPoint { order, residual })
            .collect::<Vec<_>>())
    })())
}

/// Outer factor of the symmetric density `c_0 + sum_k c_k (t^k + t^-k)`, with
/// `c_0, c_1, ...` given as a comma or space separated list.
#[wasm_bindgen]
pub fn scalar_factor(coefficients: &str, out_degree: usize) -> String {
    to_json((|| {
        let c: Vec<f64> = coefficients
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
            .collect::<Result<_, _>>()?;
        if c.is_empty() {
            return Err("no coefficients".to_string());
        }
        let d = c.len() - 1;
        let mirrored: Vec<f64> = c.iter().rev().chain(c.iter().skip(1)).copied().collect();
        let density = LaurentPoly::from_real(-(d as i64), &mirrored);
        let params = ScalarFactorParams {
            grid_size: 4096,
            out_degree,
            clamp_floor: 1e-12,
        };
        let f = scalar_spectral_factor(&ScalarDensity::Poly(density.clone()), &params).map_err(|e| e.to_string())?;
        let at = |k: usize| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / PLOT_POINTS as f64);
        let dens: Vec<f64> = (0..PLOT_POINTS).map(|k| density.eval(at(k)).re).collect();
        let recon: Vec<f64> = (0..PLOT_POINTS).map(|k| f.eval(at(k)).norm_sqr()).collect();
        let max_error = dens.iter().zip(&recon).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok(ScalarResult {
            coefficients: (0..=out_degree as i64).map(|n| f.coeff(n).re).collect(),
            density: dens,
            reconstructed: recon,
            max_error,
        })
    })())
}

/// The example density as a list of `(entry, coefficients of t^-1, 1, t)`.
#[wasm_bindgen]
pub fn known_density() -> String {
    let s: LaurentMatrix = fixtures::known_factor_density();
    let entries: Vec<Vec<f64>> = s.entries().iter().map(|p| (-1..=1).map(|n| p.coeff(n).re).collect()).collect();
    serde_json::to_string(&entries).expect("plain data serializes")
}
