//! Dense square matrices over exact rationals and `f64`, with the two
//! determinant routes used by the coefficient computation.

use std::ops::Index;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::order::{rational_from_shortest_decimal, rational_to_f64, Rational};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Principal submatrix keeping the listed rows and columns (in order).
    pub fn principal(&self, keep: &[usize]) -> Self {
        Self::from_fn(keep.len(), keep.len(), |i, j| self[(keep[i], keep[j])].clone())
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl Matrix<f64> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `r_i(A)`: absolute off-diagonal row sum.
    pub fn off_diagonal_row_sum(&self, i: usize) -> f64 {
        (0..self.cols).filter(|&j| j != i).map(|j| self[(i, j)].abs()).sum()
    }

    /// `r_i(A^T)`: absolute off-diagonal column sum.
    pub fn off_diagonal_col_sum(&self, j: usize) -> f64 {
        (0..self.rows).filter(|&i| i != j).map(|i| self[(i, j)].abs()).sum()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Determinant of an exact rational matrix by fraction-free elimination.
///
/// Each row is first scaled to integers; the Bareiss recurrence then keeps
/// every intermediate value integral, so the result is exact.
pub fn det_exact(m: &Matrix<Rational>) -> Rational {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let row = m.row(i);
        let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        a.push(row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect());
        scale *= lcm;
    }
    let det = bareiss(&mut a);
    Rational::new(det, scale)
}

/// In-place Bareiss elimination over the integers; returns the determinant.
fn bareiss(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let value = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = value;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Determinant by LU factorisation with partial pivoting.
pub fn det_float(m: &Matrix<f64>) -> f64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a = m.data.clone();
    let mut det = 1.0;
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&x, &y| a[x * n + k].abs().total_cmp(&a[y * n + k].abs()))
            .unwrap();
        let pivot = a[pivot_row * n + k];
        if pivot == 0.0 {
            return 0.0;
        }
        if pivot_row != k {
            for j in 0..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        det *= pivot;
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            if factor != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
            }
        }
    }
    det
}

/// Coefficient matrix of a system, exact when every entry was given exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefMatrix {
    Exact {
        exact: Matrix<Rational>,
        float: Matrix<f64>,
    },
    Float(Matrix<f64>),
}

impl CoefMatrix {
    pub fn from_exact(exact: Matrix<Rational>) -> Result<Self> {
        check_square(exact.rows(), exact.cols())?;
        let float = exact.map(rational_to_f64);
        Ok(CoefMatrix::Exact { exact, float })
    }

    pub fn from_float(float: Matrix<f64>) -> Result<Self> {
        check_square(float.rows(), float.cols())?;
        for i in 0..float.rows() {
            for j in 0..float.cols() {
                if !float[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(CoefMatrix::Float(float))
    }

    /// Rows of `f64` read as the decimals they print as, giving an exact matrix.
    pub fn from_decimal_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let mut exact_rows = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let mut exact_row = Vec::with_capacity(row.len());
            for (j, &v) in row.iter().enumerate() {
                exact_row.push(rational_from_shortest_decimal(v).ok_or(Error::NonFinite { row: i, col: j })?);
            }
            exact_rows.push(exact_row);
        }
        Self::from_exact(Matrix::from_rows(exact_rows)?)
    }

    pub fn n(&self) -> usize {
        self.as_f64().rows()
    }

    pub fn as_f64(&self) -> &Matrix<f64> {
        match self {
            CoefMatrix::Exact { float, .. } => float,
            CoefMatrix::Float(float) => float,
        }
    }

    pub fn as_exact(&self) -> Option<&Matrix<Rational>> {
        match self {
            CoefMatrix::Exact { exact, .. } => Some(exact),
            CoefMatrix::Float(_) => None,
        }
    }

    /// `true` when `det A` is zero (exactly, or to rounding for float input).
    pub fn is_singular(&self) -> bool {
        match self {
            CoefMatrix::Exact { exact, .. } => det_exact(exact).is_zero(),
            CoefMatrix::Float(a) => {
                let n = a.rows() as i32;
                let scale = a.frobenius_norm().max(f64::MIN_POSITIVE).powi(n);
                det_float(a).abs() <= 64.0 * f64::EPSILON * scale
            }
        }
    }

    pub fn det_f64(&self) -> f64 {
        match self {
            CoefMatrix::Exact { exact, .. } => rational_to_f64(&det_exact(exact)),
            CoefMatrix::Float(a) => det_float(a),
        }
    }
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols || rows == 0 {
        return Err(Error::NotSquare { rows, cols });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::ratio;
    use proptest::prelude::*;

    fn exact(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| ratio(v, 1)).collect()).collect()).unwrap()
    }

    /// Cofactor expansion along the first row.
    fn det_cofactor(m: &Matrix<Rational>) -> Rational {
        let n = m.rows();
        if n == 0 {
            return Rational::one();
        }
        let mut total = Rational::zero();
        for j in 0..n {
            let keep_cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let minor = Matrix::from_fn(n - 1, n - 1, |r, c| m[(r + 1, keep_cols[c])].clone());
            let term = &m[(0, j)] * det_cofactor(&minor);
            if j % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }

    #[test]
    fn bareiss_handles_zero_pivots() {
        let m = exact(&[&[0, 2, 1], &[1, 0, 3], &[4, 5, 0]]);
        assert_eq!(det_exact(&m), det_cofactor(&m));
        let singular = exact(&[&[1, 2], &[2, 4]]);
        assert!(det_exact(&singular).is_zero());
        assert_eq!(det_exact(&Matrix::new(0, 0, vec![]).unwrap()), Rational::one());
    }

    #[test]
    fn decimal_rows_are_exact() {
        let a = CoefMatrix::from_decimal_rows(&[vec![-0.15, 0.2], vec![0.25, -0.6]]).unwrap();
        let e = a.as_exact().unwrap();
        assert_eq!(e[(0, 0)], ratio(-3, 20));
        assert_eq!(det_exact(e), ratio(-3, 20) * ratio(-3, 5) - ratio(1, 5) * ratio(1, 4));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            CoefMatrix::from_float(Matrix::new(1, 2, vec![1.0, 2.0]).unwrap()),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            CoefMatrix::from_float(Matrix::new(1, 1, vec![f64::NAN]).unwrap()),
            Err(Error::NonFinite { .. })
        ));
        assert!(Matrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    proptest! {
        #[test]
        fn exact_and_float_routes_agree(vals in proptest::collection::vec((-20i64..20, 1i64..7), 16)) {
            let m = Matrix::from_fn(4, 4, |i, j| { let (p, q) = vals[i * 4 + j]; ratio(p, q) });
            let exact = det_exact(&m);
            prop_assert_eq!(&exact, &det_cofactor(&m));
            let float = det_float(&m.map(rational_to_f64));
            prop_assert!((float - rational_to_f64(&exact)).abs() <= 1e-9 * (1.0 + float.abs()));
        }
    }
}
