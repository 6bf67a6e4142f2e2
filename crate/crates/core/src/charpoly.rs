//! Coefficients of `det(diag(s^p_1, ..., s^p_n) - A)` as a polynomial in `s`.
//!
//! Choosing the powers `s^{p_i}` on a subset `S` of the diagonal and the
//! constant `-A` part elsewhere contributes `(-1)^(n-|S|) det A_(S)` to the
//! coefficient of `s^(sum of p_i over S)`, where `A_(S)` is `A` with the rows
//! and columns in `S` deleted. Distinct subsets with equal exponent sums
//! collide and their contributions add.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{det_exact, det_float, CoefMatrix};
use crate::order::{rational_to_f64, Rational, ReducedOrders};

/// Largest dimension accepted by the `2^n` subset enumeration.
pub const DEFAULT_MAX_STATES: usize = 20;
/// Largest polynomial degree `p_1 + ... + p_n` accepted by default.
pub const DEFAULT_MAX_DEGREE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_degree: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_states: DEFAULT_MAX_STATES,
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

/// A real number carried exactly when the input allowed it.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(v) => *v,
        }
    }
}

/// Polynomial coefficients `b_0, ..., b_d` in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::Exact(c) => c.len(),
            Coefficients::Float(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Coefficients::Exact(c) => c.iter().map(rational_to_f64).collect(),
            Coefficients::Float(c) => c.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharPoly {
    coeffs: Coefficients,
    gamma: Rational,
    p: Vec<usize>,
}

impl CharPoly {
    /// Wrap an arbitrary coefficient vector (ascending powers).
    pub fn from_coefficients(coeffs: Coefficients, gamma: Rational, p: Vec<usize>) -> Self {
        Self { coeffs, gamma, p }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        match &self.coeffs {
            Coefficients::Exact(c) => Some(c),
            Coefficients::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.to_f64()
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    pub fn exponents(&self) -> &[usize] {
        &self.p
    }

    pub fn is_monic(&self) -> bool {
        match &self.coeffs {
            Coefficients::Exact(c) => c.last().is_some_and(|v| v.is_one()),
            Coefficients::Float(c) => c.last().is_some_and(|&v| v == 1.0),
        }
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.to_f64()
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &b| acc * s + b)
    }
}

/// Determinant of `A` with the `removed` rows and columns deleted.
///
/// Indices are zero-based; removing everything yields the empty determinant 1.
pub fn principal_minor(a: &CoefMatrix, removed: &[usize]) -> Scalar {
    let n = a.n();
    let keep: Vec<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
    match a.as_exact() {
        Some(exact) => Scalar::Exact(det_exact(&exact.principal(&keep))),
        None => Scalar::Float(det_float(&a.as_f64().principal(&keep))),
    }
}

/// Every subset of `0..n` as a bit mask, ordered by size and then
/// lexicographically by member list.
pub fn ordered_subsets(n: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    masks.sort_by_cached_key(|&mask| (mask.count_ones(), members(mask, n)));
    masks
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

pub fn char_poly(a: &CoefMatrix, reduced: &ReducedOrders) -> Result<CharPoly> {
    char_poly_with(a, reduced, Limits::default())
}

pub fn char_poly_with(a: &CoefMatrix, reduced: &ReducedOrders, limits: Limits) -> Result<CharPoly> {
    let n = a.n();
    if reduced.p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: reduced.p.len(),
        });
    }
    if n > limits.max_states.min(31) {
        return Err(Error::TooManyStates {
            n,
            max: limits.max_states.min(31),
        });
    }
    let p = reduced.exponents(limits.max_degree)?;
    let degree: usize = p.iter().sum();
    let subsets = ordered_subsets(n);
    let full = (1u32 << n) - 1;

    // Mask bits mark the diagonal positions that contribute s^{p_i}.
    let terms: Vec<(usize, Scalar)> = subsets
        .par_iter()
        .map(|&mask| {
            let chosen = members(mask, n);
            let k: usize = chosen.iter().map(|&i| p[i]).sum();
            let minor = if mask == full {
                match a {
                    CoefMatrix::Exact { .. } => Scalar::Exact(Rational::one()),
                    CoefMatrix::Float(_) => Scalar::Float(1.0),
                }
            } else {
                principal_minor(a, &chosen)
            };
            let negate = (n - chosen.len()) % 2 == 1;
            let value = match minor {
                Scalar::Exact(r) => Scalar::Exact(if negate { -r } else { r }),
                Scalar::Float(v) => Scalar::Float(if negate { -v } else { v }),
            };
            (k, value)
        })
        .collect();

    let coeffs = match a {
        CoefMatrix::Exact { .. } => {
            let mut b = vec![Rational::zero(); degree + 1];
            for (k, value) in terms {
                if let Scalar::Exact(r) = value {
                    b[k] += r;
                }
            }
            Coefficients::Exact(b)
        }
        CoefMatrix::Float(_) => {
            let mut b = vec![0.0; degree + 1];
            for (k, value) in terms {
                if let Scalar::Float(v) = value {
                    b[k] += v;
                }
            }
            Coefficients::Float(b)
        }
    };
    Ok(CharPoly {
        coeffs,
        gamma: reduced.gamma.clone(),
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::order::{ratio, reduce_orders, OrderVector};

    pub(crate) fn ex1() -> CoefMatrix {
        CoefMatrix::from_decimal_rows(&[
            vec![-0.5, -0.2, -0.15, 0.25],
            vec![0.15, -0.4, 0.2, -0.15],
            vec![0.25, 0.15, -0.6, 0.3],
            vec![0.2, -0.1, -0.1, -0.3],
        ])
        .unwrap()
    }

    fn exact_minor(a: &CoefMatrix, removed: &[usize]) -> Rational {
        match principal_minor(a, removed) {
            Scalar::Exact(r) => r,
            Scalar::Float(_) => panic!("expected exact minor"),
        }
    }

    #[test]
    fn minors_of_example_matrix() {
        let a = ex1();
        assert_eq!(exact_minor(&a, &[3]), ratio(-1211, 8000));
        assert_eq!(exact_minor(&a, &[0, 1, 2, 3]), Rational::one());
        // b6 collects the subsets {1} and {3,4} (one-based).
        let b6 = -exact_minor(&a, &[0]) + exact_minor(&a, &[2, 3]);
        assert_eq!(b6, ratio(1199, 4000));
    }

    #[test]
    fn scalar_case() {
        let a = CoefMatrix::from_decimal_rows(&[vec![-2.5]]).unwrap();
        let reduced = reduce_orders(&OrderVector::from_fractions(&[(3, 4)]).unwrap()).unwrap();
        let cp = char_poly(&a, &reduced).unwrap();
        let b = cp.exact().unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b[0], ratio(5, 2));
        assert!(b[1].is_zero() && b[2].is_zero());
        assert!(b[3].is_one());
    }

    #[test]
    fn subsets_are_ordered_by_size_then_lexicographically() {
        assert_eq!(ordered_subsets(3), vec![0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]);
    }

    #[test]
    fn enforces_limits() {
        let n = 21;
        let a = CoefMatrix::from_float(Matrix::identity(n)).unwrap();
        let orders = OrderVector::from_fractions(&vec![(1, 2); n]).unwrap();
        let reduced = reduce_orders(&orders).unwrap();
        assert!(matches!(char_poly(&a, &reduced), Err(Error::TooManyStates { n: 21, .. })));

        let a = ex1();
        let orders = OrderVector::from_fractions(&[(1, 1), (1, 1), (1, 1)]).unwrap();
        let reduced = reduce_orders(&orders).unwrap();
        assert!(matches!(char_poly(&a, &reduced), Err(Error::DimensionMismatch { .. })));

        let orders = OrderVector::from_fractions(&[(1, 997), (1, 991), (1, 983), (1, 977)]).unwrap();
        let reduced = reduce_orders(&orders).unwrap();
        assert!(matches!(char_poly(&ex1(), &reduced), Err(Error::DegreeTooLarge { .. })));
    }

    #[test]
    fn float_matrix_gives_float_coefficients() {
        let a = CoefMatrix::from_float(ex1().as_f64().clone()).unwrap();
        let reduced = reduce_orders(&OrderVector::from_fractions(&[(1, 2), (1, 4), (1, 3), (1, 6)]).unwrap()).unwrap();
        let float = char_poly(&a, &reduced).unwrap().to_f64();
        let exact = char_poly(&ex1(), &reduced).unwrap().to_f64();
        for (f, e) in float.iter().zip(&exact) {
            assert!((f - e).abs() < 1e-14);
        }
    }
}
