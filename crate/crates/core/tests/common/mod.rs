#![allow(dead_code)]

use std::path::PathBuf;

use fracstab::matrix::{CoefMatrix, Matrix};
use fracstab::order::{ratio, OrderVector, Rational};
use fracstab::system::SystemSpec;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::Rng;

pub fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn ex1_rows() -> Vec<Vec<f64>> {
    vec![
        vec![-0.5, -0.2, -0.15, 0.25],
        vec![0.15, -0.4, 0.2, -0.15],
        vec![0.25, 0.15, -0.6, 0.3],
        vec![0.2, -0.1, -0.1, -0.3],
    ]
}

pub fn ex1_irrational() -> Vec<f64> {
    let s13 = 13f64.sqrt();
    let s33 = 33f64.sqrt();
    vec![
        128.0 / (71.0 * s13),
        64.0 / (71.0 * s13),
        90.0 / (47.0 * s33),
        45.0 / (47.0 * s33),
    ]
}

pub fn ex1_rational() -> SystemSpec {
    SystemSpec::from_decimal_rows(&ex1_rows(), &[(1, 2), (1, 4), (1, 3), (1, 6)]).unwrap()
}

pub fn ex63() -> SystemSpec {
    SystemSpec::from_decimal_rows(
        &[vec![-3.0, 0.0, 1.5], vec![-0.5, 0.0, 0.5], vec![6.0, -1.0, -3.0]],
        &[(2, 5), (3, 10), (1, 2)],
    )
    .unwrap()
}

pub fn ex64() -> SystemSpec {
    SystemSpec::from_decimal_rows(
        &[vec![-1.0, 1.0, 0.0], vec![0.25, -2.0, 1.0], vec![-2.0, 0.0, 1.0]],
        &[(1, 2), (2, 5), (3, 10)],
    )
    .unwrap()
}

/// Determinant by plain Gaussian elimination over the rationals.
pub fn gauss_det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(pivot) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if pivot != c {
            m.swap(pivot, c);
            det = -det;
        }
        let p = m[c][c].clone();
        det *= &p;
        for r in c + 1..n {
            let f = &m[r][c] / &p;
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                let delta = &f * &m[c][k];
                m[r][k] -= delta;
            }
        }
    }
    det
}

/// Coefficients of `det(diag(s^p_i) - A)` from exact values at
/// `s = 0, 1, ..., d` and Newton interpolation.
pub fn interpolated_char_poly(a: &Matrix<Rational>, p: &[usize]) -> Vec<Rational> {
    let n = a.rows();
    let d: usize = p.iter().sum();
    let nodes: Vec<Rational> = (0..=d).map(|k| Rational::from_integer(BigInt::from(k))).collect();
    let mut values: Vec<Rational> = nodes
        .iter()
        .map(|s| {
            let rows = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let diag = if i == j { pow(s, p[i]) } else { Rational::zero() };
                            diag - &a.row(i)[j]
                        })
                        .collect()
                })
                .collect();
            gauss_det(rows)
        })
        .collect();
    // Divided differences in place.
    for level in 1..=d {
        for k in (level..=d).rev() {
            values[k] = (&values[k] - &values[k - 1]) / (&nodes[k] - &nodes[k - level]);
        }
    }
    // Expand the Newton form into monomial coefficients.
    let mut coeffs = vec![Rational::zero(); d + 1];
    for k in (0..=d).rev() {
        // coeffs <- coeffs * (s - nodes[k]) + values[k]
        let mut next = vec![Rational::zero(); d + 1];
        for j in 0..d {
            next[j + 1] += &coeffs[j];
            next[j] -= &coeffs[j] * &nodes[k];
        }
        next[0] += &values[k];
        coeffs = next;
    }
    coeffs
}

fn pow(s: &Rational, e: usize) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * s)
}

/// Random rational matrix with entries `k / den`, `|k| <= 9`, `den <= 4`.
pub fn random_rational_matrix(rng: &mut StdRng, n: usize) -> Matrix<Rational> {
    Matrix::from_fn(n, n, |_, _| ratio(rng.random_range(-9..=9), rng.random_range(1..=4)))
}

/// Random order vector `q / m` with `m <= max_den`.
pub fn random_orders(rng: &mut StdRng, n: usize, max_den: i64) -> OrderVector {
    let fr: Vec<(i64, i64)> = (0..n)
        .map(|_| {
            let m = rng.random_range(1..=max_den);
            (rng.random_range(1..=m), m)
        })
        .collect();
    OrderVector::from_fractions(&fr).unwrap()
}

pub fn random_rational_system(rng: &mut StdRng, n: usize, max_den: i64) -> SystemSpec {
    let a = CoefMatrix::from_exact(random_rational_matrix(rng, n)).unwrap();
    SystemSpec::new(a, random_orders(rng, n, max_den)).unwrap()
}

/// Random matrix with `-(A + A^T)` positive definite: a negative definite
/// symmetric part plus a skew part.
pub fn random_dissipative(rng: &mut StdRng, n: usize) -> Matrix<f64> {
    let g = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let k = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let shift = rng.random_range(0.2..1.0);
    Matrix::from_fn(n, n, |i, j| {
        let mut gg = 0.0;
        for l in 0..n {
            gg += g.row(l)[i] * g.row(l)[j];
        }
        let skew = k.row(i)[j] - k.row(j)[i];
        -(gg + if i == j { shift } else { 0.0 }) / 2.0 + skew / 2.0
    })
}

/// Strictly row diagonally dominant matrix with negative diagonal.
pub fn random_dominant(rng: &mut StdRng, n: usize) -> Matrix<f64> {
    let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    for (i, row) in rows.iter_mut().enumerate() {
        let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum();
        row[i] = -(off + rng.random_range(0.01..0.5));
    }
    Matrix::from_rows(rows).unwrap()
}

/// `1 / ||M^{-1}||_2` with `M = diag(z^alpha) - A`, from an explicit inverse
/// and the symmetric eigenvalues of the real embedding of `M^{-H} M^{-1}`.
pub fn sigma_min_by_inverse(a: &Matrix<f64>, alphas: &[f64], z: num_complex::Complex64) -> f64 {
    use nalgebra::{DMatrix, SymmetricEigen};
    use num_complex::Complex64;
    let n = a.rows();
    let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let shift = if i == j {
            if z == Complex64::new(0.0, 0.0) {
                Complex64::new(0.0, 0.0)
            } else {
                (z.ln() * alphas[i]).exp()
            }
        } else {
            Complex64::new(0.0, 0.0)
        };
        shift - a.row(i)[j]
    });
    let Some(inv) = m.try_inverse() else {
        return 0.0;
    };
    let h = inv.adjoint() * &inv;
    let emb = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let v = h[(i % n, j % n)];
        match (bi, bj) {
            (0, 0) | (1, 1) => v.re,
            (0, 1) => -v.im,
            _ => v.im,
        }
    });
    let lmax = SymmetricEigen::new(emb).eigenvalues.iter().copied().fold(0.0, f64::max);
    1.0 / lmax.sqrt()
}
