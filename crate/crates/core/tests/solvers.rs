use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use sparsecorr::dictionaries::*;
use sparsecorr::guarantees::classical;
use sparsecorr::signals::*;
use sparsecorr::solvers::*;
use sparsecorr::Error;

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

#[test]
fn pseudo_inverse_examples() {
    let z = DVector::from_vec(vec![c(1.0), c(-2.0), c(0.5), c(3.0)]);
    let r = pinv_solve(&DMatrix::<C>::identity(4, 4), &z).unwrap();
    assert!((r.solution - &z).norm() < 1e-14);

    let f = build_dft::<C>(8).unwrap();
    let sub = f.matrix().columns(0, 3).into_owned();
    let z = sub.column(0) + sub.column(1) + sub.column(2);
    let r = pinv_solve(&sub, &z).unwrap();
    assert!((r.solution - DVector::from_element(3, c(1.0))).norm() < 1e-10);
    assert!(r.residual_norm <= 1e-9 * z.norm());

    let mut dup = DMatrix::<C>::zeros(4, 2);
    dup[(0, 0)] = c(1.0);
    dup[(0, 1)] = c(1.0);
    assert!(matches!(pinv_solve(&dup, &z.rows(0, 4).into_owned()), Err(Error::Singular(_))));
}

#[test]
fn omp_examples() {
    let z = DVector::from_vec(vec![c(0.0), c(3.0), c(0.0), c(0.0)]);
    let r = omp(&DMatrix::<C>::identity(4, 4), &z, 1).unwrap();
    assert_eq!(r.solution, z);

    let f = build_dft::<C>(8).unwrap();
    let mut x = DVector::<C>::zeros(8);
    x[5] = C::new(0.3, -1.2);
    let r = omp(f.matrix(), &(f.matrix() * &x), 1).unwrap();
    assert!((r.solution - x).norm() < 1e-12);

    let r = omp(f.matrix(), &DVector::zeros(8), 3).unwrap();
    assert_eq!(r.iterations, 0);
    assert_eq!(r.solution, DVector::zeros(8));
    assert!(omp(f.matrix(), &DVector::zeros(8), 9).is_err());
}

#[test]
fn bp_examples() {
    let opts = BpOptions::default();
    let z = DVector::from_vec(vec![c(0.2), c(-1.0), c(4.0), c(0.0)]);
    let r = basis_pursuit(&DMatrix::<C>::identity(4, 4), &z, &opts).unwrap();
    assert!(r.converged);
    assert!((r.solution - &z).norm() < 1e-8);

    let mut d = DMatrix::<C>::zeros(2, 4);
    for (i, j) in [(0, 0), (1, 1), (0, 2), (1, 3)] {
        d[(i, j)] = c(1.0);
    }
    let z = DVector::from_vec(vec![c(1.0), c(0.0)]);
    let r = basis_pursuit(&d, &z, &opts).unwrap();
    assert!(r.converged);
    assert!((l1_norm(&r.solution) - 1.0).abs() < 1e-7);

    let f = build_dft::<C>(8).unwrap();
    let mut x = DVector::<C>::zeros(8);
    x[2] = c(-0.7);
    let r = basis_pursuit(f.matrix(), &(f.matrix() * &x), &opts).unwrap();
    assert!((r.solution - x).norm() < 1e-6);
}

#[test]
fn bp_rejects_measurements_outside_the_range() {
    let mut d = DMatrix::<C>::zeros(3, 2);
    d[(0, 0)] = c(1.0);
    d[(1, 1)] = c(1.0);
    let z = DVector::from_vec(vec![c(0.0), c(0.0), c(1.0)]);
    assert!(matches!(
        basis_pursuit(&d, &z, &BpOptions::default()),
        Err(Error::Infeasible { .. })
    ));
}

#[test]
fn brute_force_examples() {
    let f = build_dft::<C>(8).unwrap();
    let r = brute_force_p0(f.matrix(), &DVector::zeros(8), 2).unwrap();
    assert_eq!(r.sparsity, 0);
    assert!(r.unique);

    let mut d = DMatrix::<C>::zeros(2, 4);
    for (i, j) in [(0, 0), (1, 1), (0, 2), (1, 3)] {
        d[(i, j)] = c(1.0);
    }
    let r = brute_force_p0(&d, &DVector::from_vec(vec![c(1.0), c(0.0)]), 2).unwrap();
    assert_eq!(r.sparsity, 1);
    assert!(!r.unique);

    let mut x = DVector::<C>::zeros(8);
    x[1] = c(1.0);
    x[6] = c(-2.0);
    let r = brute_force_p0(f.matrix(), &(f.matrix() * &x), 3).unwrap();
    assert!((r.solution - x).norm() < 1e-9);
    assert!(r.unique);

    assert!(matches!(
        brute_force_p0(&DMatrix::<C>::identity(40, 40), &DVector::zeros(40), 20),
        Err(Error::GuardExceeded { .. })
    ));
    let i2 = DMatrix::<C>::identity(2, 2);
    let mut z = DVector::zeros(2);
    z[0] = c(1.0);
    z[1] = c(1.0);
    assert!(matches!(brute_force_p0(&i2, &z, 1), Err(Error::NotFound { max_k: 1 })));
}

#[test]
fn p0_ne_examples() {
    let f = build_dft::<C>(4).unwrap();
    let i = build_identity::<C>(4).unwrap();
    let mut x = DVector::<C>::zeros(4);
    x[3] = c(1.5);
    let mut e = DVector::<C>::zeros(4);
    e[1] = c(-0.5);
    let z = f.matrix() * &x + i.matrix() * &e;

    let plain = brute_force_p0(f.matrix(), &(f.matrix() * &x), 2).unwrap();
    let zero_ne = brute_force_p0_ne(f.matrix(), i.matrix(), &(f.matrix() * &x), 0, 2).unwrap();
    assert_eq!(zero_ne.solution_x, plain.solution);
    assert_eq!(zero_ne.unique, plain.unique);

    let r = brute_force_p0_ne(f.matrix(), i.matrix(), &z, 1, 2).unwrap();
    assert!((r.solution_x - &x).norm() < 1e-9);
    assert!((r.solution_e - &e).norm() < 1e-9);
    assert_eq!(r.error_support, vec![1]);
}

#[test]
fn comb_pair_is_ambiguous_under_p0_ne() {
    let m = 16;
    let f = build_dft::<C>(m).unwrap();
    let i = build_identity::<C>(m).unwrap();
    let c8 = comb::<C>(m, 8).unwrap().into_dense();
    let c4 = comb::<C>(m, 4).unwrap().into_dense();
    // x = comb(8), e = -comb(8) and x' = comb(8) - comb(4), e' = comb(4) - comb(8).
    let z = f.matrix() * &c8 - i.matrix() * &c8;
    let x2 = &c8 - &c4;
    let z2 = f.matrix() * &x2 + i.matrix() * (&c4 - &c8);
    assert!((&z - &z2).norm() < 1e-12);
    let r = brute_force_p0_ne(f.matrix(), i.matrix(), &z, 2, 2).unwrap();
    assert_eq!(r.sparsity, 2);
    assert!(!r.unique);
}

#[test]
fn binomial_values() {
    assert_eq!(binomial(5, 2), 10);
    assert_eq!(binomial(64, 0), 1);
    assert_eq!(binomial(3, 4), 0);
    assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
}

// Instances inside the classical threshold on small concatenations.
#[test]
fn solvers_agree_where_the_classical_threshold_holds() {
    let mut checked = 0;
    for m in [8usize, 16] {
        let d = concat(&build_dft::<C>(m).unwrap(), &build_identity::<C>(m).unwrap()).unwrap();
        let mu = coherence(&d);
        let kmax = (1..=m).take_while(|&k| classical(k, mu).satisfied).last().unwrap();
        for trial in 0..250u64 {
            let mut rng = rng_from_seed(derive_seed(m as u64, &[trial]));
            let k = rng.random_range(1..=kmax);
            let x = random_sparse::<C, _>(&mut rng, 2 * m, k, Amplitudes::ComplexGaussian)
                .unwrap()
                .into_dense();
            let z = d.matrix() * &x;
            let tol = 1e-6 * x.norm();
            if m == 8 {
                let p0 = brute_force_p0(d.matrix(), &z, k).unwrap();
                assert!(p0.unique && (p0.solution - &x).norm() < tol);
            }
            let bp = basis_pursuit(d.matrix(), &z, &BpOptions::default()).unwrap();
            assert!((bp.solution - &x).norm() < tol, "bp m={m} trial {trial}");
            let om = omp(d.matrix(), &z, k).unwrap();
            assert!((om.solution - &x).norm() < tol, "omp m={m} trial {trial}");
            checked += 1;
        }
    }
    assert_eq!(checked, 500);
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<C> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(rows, cols, |_, _| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn omp_residuals_decrease_and_stay_orthogonal(rows in 3usize..9, extra in 0usize..8, k in 1usize..4, seed in any::<u64>()) {
        let cols = rows + extra;
        let d = random_matrix(rows, cols, seed);
        let z = random_matrix(rows, 1, seed ^ 3).column(0).into_owned();
        let k = k.min(rows);
        let (rep, path) = omp_path(&d, &z, k).unwrap();
        for w in path.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let r = &z - &d * &rep.solution;
        for j in 0..cols {
            if rep.solution[j] != C::new(0.0, 0.0) {
                prop_assert!(d.column(j).dotc(&r).norm() < 1e-10);
            }
        }
        prop_assert!(rep.solution.iter().filter(|v| v.norm() > 0.0).count() <= k);
    }

    #[test]
    fn bp_value_never_exceeds_a_feasible_point(rows in 3usize..7, extra in 1usize..7, k in 1usize..4, seed in any::<u64>()) {
        let cols = rows + extra;
        let d = random_matrix(rows, cols, seed);
        let mut rng = rng_from_seed(seed);
        let x = random_sparse::<C, _>(&mut rng, cols, k.min(cols), Amplitudes::ComplexGaussian).unwrap().into_dense();
        let z = &d * &x;
        let r = basis_pursuit(&d, &z, &BpOptions::default()).unwrap();
        prop_assert!(r.converged);
        prop_assert!(l1_norm(&r.solution) <= l1_norm(&x) + 1e-6);
        prop_assert!((&d * &r.solution - &z).norm() <= 1e-9 * z.norm().max(1.0));
    }

    #[test]
    fn least_squares_reproduces_range_members(rows in 2usize..10, cols in 1usize..6, seed in any::<u64>()) {
        prop_assume!(cols <= rows);
        let d = random_matrix(rows, cols, seed);
        let s = random_matrix(cols, 1, seed ^ 9).column(0).into_owned();
        let z = &d * &s;
        let r = pinv_solve(&d, &z).unwrap();
        prop_assert!((r.solution - s).norm() < 1e-8);
        prop_assert!(r.residual_norm <= 1e-9 * z.norm().max(1.0));
    }
}
