mod common;

use common::*;
use fracstab::approx::{rational_approximation, verify_approximation};
use fracstab::charpoly::char_poly;
use fracstab::general::{analyze_general, delta_lower_bound, delta_numeric, GeneralVerdict, OmegaGrid};
use fracstab::matrix::{CoefMatrix, Matrix};
use fracstab::order::{reduce_orders, OrderVector};
use fracstab::pseudospectrum::sigma_min_shifted;
use fracstab::spectrum::{analyze_rational, backward_residual, poly_roots, principal_arg, Verdict, DEFAULT_TOL};
use fracstab::system::SystemSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

#[test]
fn char_poly_matches_interpolation() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.random_range(1..=4);
        let spec = random_rational_system(&mut rng, n, 5);
        let reduced = reduce_orders(spec.orders()).unwrap();
        let cp = char_poly(spec.matrix(), &reduced).unwrap();
        let oracle = interpolated_char_poly(spec.matrix().as_exact().unwrap(), cp.exponents());
        assert_eq!(cp.exact().unwrap(), &oracle[..]);
    }
}

#[test]
fn companion_identity_at_random_points() {
    // det(z I - B) equals the characteristic polynomial at random points.
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..20 {
        let n = rng.random_range(2..=4);
        let spec = random_rational_system(&mut rng, n, 4);
        let reduced = reduce_orders(spec.orders()).unwrap();
        let cp = char_poly(spec.matrix(), &reduced).unwrap();
        let b = fracstab::spectrum::build_companion(&cp).unwrap().to_dmatrix();
        let d = b.nrows();
        for _ in 0..5 {
            let z = Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let m = DMatrix::<Complex64>::from_fn(d, d, |i, j| {
                let diag = if i == j { z } else { Complex64::new(0.0, 0.0) };
                diag - b[(i, j)]
            });
            let lhs = m.determinant();
            let rhs = cp.eval(z);
            let scale = cp.to_f64().iter().enumerate().map(|(k, c)| c.abs() * z.norm().powi(k as i32)).sum::<f64>();
            assert!((lhs - rhs).norm() <= 1e-10 * scale, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn sigma_min_matches_inverse_norm() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..50 {
        let n = rng.random_range(1..=5);
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
        let alphas: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let s = sigma_min_shifted(&a, &alphas, z);
        let o = sigma_min_by_inverse(&a, &alphas, z);
        assert!((s - o).abs() <= 1e-10 * o.max(1e-3), "{s} vs {o}");
    }
}

#[test]
fn sampled_unit_vectors_bound_sigma_min() {
    // ||M v|| >= sigma_min for every unit vector v.
    let mut rng = StdRng::seed_from_u64(14);
    let spec = ex1_rational();
    let alphas = ex1_irrational();
    let a = spec.a_f64();
    for _ in 0..20 {
        let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let s = sigma_min_shifted(a, &alphas, z);
        let m = fracstab::pseudospectrum::shifted_matrix(a, &alphas, z);
        for _ in 0..200 {
            let v: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let v = nalgebra::DVector::from_iterator(4, v.into_iter().map(|c| c / norm));
            assert!((&m * v).norm() >= s * (1.0 - 1e-12));
        }
    }
}

#[test]
fn roots_inside_principal_sector_are_spectral_points() {
    // lambda with |arg| < pi/m maps to z = lambda^m with z^alpha_i = lambda^p_i,
    // so sigma_min vanishes at z.
    let mut rng = StdRng::seed_from_u64(15);
    let mut checked = 0;
    while checked < 15 {
        let n = rng.random_range(1..=3);
        let spec = random_rational_system(&mut rng, n, 4);
        if spec.matrix().is_singular() {
            continue;
        }
        let reduced = reduce_orders(spec.orders()).unwrap();
        let m = reduced.m.to_string().parse::<i32>().unwrap();
        let cp = char_poly(spec.matrix(), &reduced).unwrap();
        let roots = poly_roots(&cp).unwrap().roots;
        let alphas = spec.orders().values();
        for r in roots {
            if r.norm() > 1e-6 && principal_arg(r).abs() < 0.9 * std::f64::consts::PI / m as f64 {
                let z = r.powi(m);
                let s = sigma_min_shifted(spec.a_f64(), &alphas, z);
                let scale = spec.a_f64().frobenius_norm() + z.norm();
                assert!(s < 1e-8 * scale, "sigma_min({z}) = {s}");
                checked += 1;
            }
        }
    }
}

#[test]
fn root_residuals_are_small() {
    let mut rng = StdRng::seed_from_u64(16);
    for _ in 0..40 {
        let n = rng.random_range(1..=5);
        let spec = random_rational_system(&mut rng, n, 6);
        let reduced = reduce_orders(spec.orders()).unwrap();
        let cp = char_poly(spec.matrix(), &reduced).unwrap();
        let coeffs = cp.to_f64();
        let set = poly_roots(&cp).unwrap();
        assert_eq!(set.roots.len(), cp.degree());
        for z in set.roots {
            assert!(backward_residual(&coeffs, z) <= 1e-10);
        }
    }
}

#[test]
fn general_path_agrees_with_rational_path() {
    // Rational orders given as floats map back to themselves.
    let mut rng = StdRng::seed_from_u64(17);
    let mut compared = 0;
    while compared < 10 {
        let n = rng.random_range(1..=3);
        let a = random_dissipative(&mut rng, n);
        let orders = random_orders(&mut rng, n, 4);
        let exact = SystemSpec::new(CoefMatrix::from_float(a).unwrap(), orders.clone()).unwrap();
        let real = exact.with_orders(orders.to_real()).unwrap();
        let g = match analyze_general(&real, None, DEFAULT_TOL) {
            Ok(g) => g,
            Err(fracstab::Error::SingularMatrix) => continue,
            Err(e) => panic!("{e}"),
        };
        let r = analyze_rational(&exact, DEFAULT_TOL).unwrap();
        assert_eq!(g.approx.as_ref().unwrap().beta, orders);
        assert_eq!(g.verdict, GeneralVerdict::from(r.verdict));
        compared += 1;
    }
}

#[test]
fn example_5_1_is_stable() {
    let spec = ex1_rational().with_orders(OrderVector::from_reals(&ex1_irrational()).unwrap()).unwrap();
    let g = analyze_general(&spec, None, DEFAULT_TOL).unwrap();
    assert_eq!(g.verdict, GeneralVerdict::Stable);
    assert!((g.lambda_min - 0.204).abs() < 1e-3);
    assert_eq!(g.eps, Some(0.1));
}

#[test]
fn numeric_delta_dominates_the_bound() {
    let mut rng = StdRng::seed_from_u64(18);
    for _ in 0..10 {
        let n = rng.random_range(1..=4);
        let a = random_dissipative(&mut rng, n);
        let alphas: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let bound = delta_lower_bound(&a).unwrap();
        let est = delta_numeric(&a, &alphas, OmegaGrid::default());
        assert!(est.value >= bound * (1.0 - 1e-9), "{} < {bound}", est.value);
    }
}

#[test]
fn small_perturbations_keep_stability() {
    let spec = ex1_rational();
    let a = spec.a_f64().clone();
    let alphas = spec.orders().values();
    let delta = delta_numeric(&a, &alphas, OmegaGrid::default()).value;
    let mut rng = StdRng::seed_from_u64(19);
    for _ in 0..20 {
        let e = Matrix::from_fn(4, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = e.to_dmatrix().singular_values().max();
        let scale = rng.random_range(0.1..0.95) * delta / norm;
        let perturbed = Matrix::from_fn(4, 4, |i, j| a[(i, j)] + scale * e[(i, j)]);
        let p = SystemSpec::new(CoefMatrix::from_float(perturbed).unwrap(), spec.orders().clone()).unwrap();
        assert_eq!(analyze_rational(&p, DEFAULT_TOL).unwrap().verdict, Verdict::Stable);
    }
}

#[test]
fn random_rational_approximations_verify() {
    let mut rng = StdRng::seed_from_u64(20);
    let mut done = 0;
    while done < 100 {
        let n = rng.random_range(1..=5);
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let alphas: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let eps = rng.random_range(0.01..0.2);
        let coef = CoefMatrix::from_float(a.clone()).unwrap();
        let approx = match rational_approximation(&coef, &OrderVector::from_reals(&alphas).unwrap(), eps) {
            Ok(x) => x,
            Err(fracstab::Error::SingularMatrix) => continue,
            Err(e) => panic!("{e}"),
        };
        let c = &approx.constants;
        assert!(verify_approximation(&a, &alphas, &approx.beta.values(), eps, c.r, c.ln_rho));
        done += 1;
    }
}
