use crate::error::{Error, Result};
use crate::matrix::{CoefMatrix, Matrix};
use crate::order::OrderVector;

/// A linear system `D^alpha x = A x` with one Caputo order per equation.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    a: CoefMatrix,
    orders: OrderVector,
}

impl SystemSpec {
    pub fn new(a: CoefMatrix, orders: OrderVector) -> Result<Self> {
        if a.n() != orders.len() {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                found: orders.len(),
            });
        }
        Ok(Self { a, orders })
    }

    /// Exact system from decimal rows and `(p, q)` order fractions.
    pub fn from_decimal_rows(rows: &[Vec<f64>], orders: &[(i64, i64)]) -> Result<Self> {
        Self::new(CoefMatrix::from_decimal_rows(rows)?, OrderVector::from_fractions(orders)?)
    }

    pub fn n(&self) -> usize {
        self.orders.len()
    }

    pub fn matrix(&self) -> &CoefMatrix {
        &self.a
    }

    pub fn a_f64(&self) -> &Matrix<f64> {
        self.a.as_f64()
    }

    pub fn orders(&self) -> &OrderVector {
        &self.orders
    }

    pub fn with_orders(&self, orders: OrderVector) -> Result<Self> {
        Self::new(self.a.clone(), orders)
    }
}
