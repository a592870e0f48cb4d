use nalgebra::Cholesky;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_factor::completion::{build_system, CompletionInput, CompletionSystem};
use spectral_factor::displacement::{apply_rz, generator_defect, generators, structured_solve};
use spectral_factor::linalg::{singular_values, CMatrix, CVector};
use spectral_factor::LaurentPoly;

fn random_system(rng: &mut impl Rng, m: usize, n: usize) -> CompletionSystem {
    let n_i = n as i64;
    let zeta = (0..m - 1)
        .map(|_| {
            LaurentPoly::new(
                -n_i,
                (0..=2 * n)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            )
        })
        .collect();
    let root = Complex64::from_polar(rng.random_range(1.5..3.0), rng.random_range(0.0..std::f64::consts::TAU));
    // f must fit in [0, N]; at N = 0 only its constant term is allowed.
    let mut f_coeffs = vec![Complex64::new(2.0, 0.0), -2.0 / root];
    f_coeffs.truncate(n.min(1) + 1);
    let f = LaurentPoly::new(0, f_coeffs);
    build_system(&CompletionInput::new(zeta, f, n).unwrap()).unwrap()
}

fn random_rhs(rng: &mut impl Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn rel_err(a: &CVector, b: &CVector) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

#[test]
fn generator_reproduces_displacement_m4_n16() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sys = random_system(&mut rng, 4, 16);
    assert!(generator_defect(&sys) <= 1e-12);
}

#[test]
fn displacement_rank_is_at_most_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in 2..=5 {
        let sys = random_system(&mut rng, m, 20);
        let sv = singular_values(&apply_rz(&sys.delta).unwrap());
        assert!(sv[m..].iter().all(|s| *s <= 1e-10 * sv[0]), "m = {m}: {:?}", &sv[..m + 1]);
    }
}

#[test]
fn structured_matches_dense_up_to_256() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (m, n) in [(2, 8), (3, 33), (6, 64), (4, 128), (6, 256)] {
        let sys = random_system(&mut rng, m, n);
        let rhs: Vec<CVector> = (0..m).map(|_| random_rhs(&mut rng, n + 1)).collect();
        let fast = structured_solve(&generators(&sys), &rhs).unwrap();
        let chol = Cholesky::new(sys.delta.clone()).unwrap();
        for (r, y) in rhs.iter().zip(&fast) {
            let e = rel_err(y, &chol.solve(r));
            assert!(e <= 1e-8, "m = {m}, N = {n}: relative error {e:.2e}");
        }
    }
}

#[test]
fn structured_rejects_wrong_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sys = random_system(&mut rng, 2, 4);
    assert!(structured_solve(&generators(&sys), &[CVector::zeros(3)]).is_err());
}

#[test]
fn inconsistent_generator_breaks_down() {
    // A zero generator describes Delta = 0, which has no Cholesky factor.
    let gen = spectral_factor::displacement::DisplacementGenerator { a: CMatrix::zeros(4, 2) };
    assert!(structured_solve(&gen, &[CVector::zeros(4)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rz_is_linear(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let b = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let lhs = apply_rz(&(&a + &b)).unwrap();
        let rhs = apply_rz(&a).unwrap() + apply_rz(&b).unwrap();
        prop_assert!((lhs - rhs).iter().all(|z| z.norm() <= 1e-15));
    }

    #[test]
    fn structured_equals_dense(seed in any::<u64>(), m in 2usize..7, n in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, m, n);
        prop_assert!(generator_defect(&sys) <= 1e-10);
        let rhs = random_rhs(&mut rng, n + 1);
        let fast = structured_solve(&generators(&sys), std::slice::from_ref(&rhs)).unwrap();
        let dense = Cholesky::new(sys.delta.clone()).unwrap().solve(&rhs);
        prop_assert!(rel_err(&fast[0], &dense) <= 1e-8);
    }
}
