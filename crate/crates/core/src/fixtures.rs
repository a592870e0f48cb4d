//! Test densities: a 2x2 matrix with a known polynomial factor and random
//! round-trip densities `A A^*` built from causal polynomial matrices.

use num_complex::Complex64;
use rand::Rng;

use crate::laurent::{LaurentMatrix, LaurentPoly};

/// Causal right factor `R(t) = [[2 + t, 7 + 5t], [1, 3 + t]]` with
/// `R^* R = known_factor_density()`. Its constant term is `[[2, 7], [1, 3]]`
/// and its linear term `[[1, 5], [0, 1]]` is upper triangular with positive
/// diagonal. `R^T` is the left factor of the transposed density.
pub fn known_right_factor() -> LaurentMatrix {
    LaurentMatrix::new(
        2,
        2,
        vec![
            LaurentPoly::from_real(0, &[2.0, 1.0]),
            LaurentPoly::from_real(0, &[7.0, 5.0]),
            LaurentPoly::from_real(0, &[1.0]),
            LaurentPoly::from_real(0, &[3.0, 1.0]),
        ],
    )
    .expect("2x2")
}

/// Right factor coefficient matrices (power 0, power 1) of [`known_factor_density`].
pub fn known_right_factor_coefficients() -> [[f64; 4]; 2] {
    [[2.0, 7.0, 1.0, 3.0], [1.0, 5.0, 0.0, 1.0]]
}

/// The density
/// `[[2/t + 6 + 2t, 7/t + 22 + 11t], [11/t + 22 + 7t, 38/t + 84 + 38t]]`,
/// whose determinant `-t^-2 + 2 - t^2` has double zeros at `t = 1` and `t = -1`.
pub fn known_factor_density() -> LaurentMatrix {
    LaurentMatrix::new(
        2,
        2,
        vec![
            LaurentPoly::from_real(-1, &[2.0, 6.0, 2.0]),
            LaurentPoly::from_real(-1, &[7.0, 22.0, 11.0]),
            LaurentPoly::from_real(-1, &[11.0, 22.0, 7.0]),
            LaurentPoly::from_real(-1, &[38.0, 84.0, 38.0]),
        ],
    )
    .expect("2x2")
}

/// `r x r` causal polynomial matrix of the given degree with integer
/// coefficients drawn uniformly from `[-bound, bound]`.
pub fn random_causal_matrix<R: Rng + ?Sized>(rng: &mut R, r: usize, degree: usize, bound: i32) -> LaurentMatrix {
    LaurentMatrix::from_fn(r, r, |_, _| {
        let coeffs = (0..=degree)
            .map(|_| Complex64::new(rng.random_range(-bound..=bound) as f64, 0.0))
            .collect();
        LaurentPoly::new(0, coeffs)
    })
}

/// `A A^*` for a random causal `A`; returns the density and `A`.
pub fn random_round_trip_density<R: Rng + ?Sized>(
    rng: &mut R,
    r: usize,
    degree: usize,
    bound: i32,
) -> (LaurentMatrix, LaurentMatrix) {
    loop {
        let a = random_causal_matrix(rng, r, degree, bound);
        // Reject identically singular draws; they are not spectral densities.
        let det = a.det().expect("square");
        if det.max_abs() > 0.5 {
            let s = &a * &a.adjoint();
            return (s, a);
        }
    }
}
