//! Exact rational orders, order vectors and their reduction to a common
//! denominator.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Build a rational from a machine-integer fraction.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Nearest `f64` to a rational.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parse an exact rational from text.
///
/// Accepts integers (`"3"`), fractions (`"-3759/80000"`) and decimal
/// literals with an optional exponent (`"-0.15"`, `"2.5e-3"`). Whitespace
/// around the tokens is ignored.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_decimal(num.trim())?;
        let den = parse_decimal(den.trim())?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    if text.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::parse_bytes(all_digits.as_bytes(), 10)?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Exact rational for the decimal literal that `value` prints as.
///
/// `f64` values written as short decimals in input files (`-0.15`) are
/// recovered exactly because Rust prints the shortest round-tripping
/// representation.
pub fn rational_from_shortest_decimal(value: f64) -> Option<Rational> {
    if !value.is_finite() {
        return None;
    }
    parse_decimal(&format!("{value:e}"))
}

/// A single differentiation order.
#[derive(Clone, Debug, PartialEq)]
pub enum Order {
    /// Exact rational order, as required by the companion-matrix test.
    Exact(Rational),
    /// Real (possibly irrational) order, handled by rational approximation.
    Real(f64),
}

impl Order {
    pub fn value(&self) -> f64 {
        match self {
            Order::Exact(r) => rational_to_f64(r),
            Order::Real(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Order::Exact(r) => Some(r),
            Order::Real(_) => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Exact(r) => write!(f, "{r}"),
            Order::Real(v) => write!(f, "{v}"),
        }
    }
}

/// Multi-index of orders, one per equation, each in `(0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderVector {
    entries: Vec<Order>,
}

impl OrderVector {
    pub fn new(entries: Vec<Order>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyOrders);
        }
        let one = Rational::one();
        for (index, order) in entries.iter().enumerate() {
            let in_range = match order {
                Order::Exact(r) => r.is_positive() && *r <= one,
                Order::Real(v) => v.is_finite() && *v > 0.0 && *v <= 1.0,
            };
            if !in_range {
                return Err(Error::OrderOutOfRange {
                    index,
                    value: order.to_string(),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Exact orders from `(numerator, denominator)` pairs.
    pub fn from_fractions(fractions: &[(i64, i64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(fractions.len());
        for (index, &(p, q)) in fractions.iter().enumerate() {
            if q == 0 {
                return Err(Error::OrderOutOfRange {
                    index,
                    value: format!("{p}/{q}"),
                });
            }
            entries.push(Order::Exact(ratio(p, q)));
        }
        Self::new(entries)
    }

    pub fn from_reals(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Order::Real(v)).collect())
    }

    pub fn from_rationals(values: Vec<Rational>) -> Result<Self> {
        Self::new(values.into_iter().map(Order::Exact).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Order> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &[Order] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(Order::value).collect()
    }

    /// `true` when every entry is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|o| matches!(o, Order::Exact(_)))
    }

    /// Smallest order (the decay exponent of Mittag-Leffler stability).
    pub fn min(&self) -> f64 {
        self.values().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same orders with every entry demoted to `Real`.
    pub fn to_real(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|o| Order::Real(o.value())).collect(),
        }
    }
}

/// Orders rewritten over their common denominator: `alpha_i = p_i / m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedOrders {
    pub m: BigUint,
    pub gamma: Rational,
    pub p: Vec<BigUint>,
}

impl ReducedOrders {
    /// Total degree `p_1 + ... + p_n` of the substituted polynomial.
    pub fn degree(&self) -> BigUint {
        self.p.iter().sum()
    }

    /// Exponents as machine integers; fails when the degree exceeds `max_degree`.
    pub fn exponents(&self, max_degree: usize) -> Result<Vec<usize>> {
        let degree = self.degree();
        match degree.to_usize() {
            Some(d) if d <= max_degree => Ok(self.p.iter().map(|p| p.to_usize().unwrap()).collect()),
            _ => Err(Error::DegreeTooLarge {
                degree: degree.to_string(),
                max: max_degree,
            }),
        }
    }

    pub fn gamma_f64(&self) -> f64 {
        rational_to_f64(&self.gamma)
    }
}

/// Rewrite exact orders `q_i / m_i` over `m = lcm(m_i)`.
pub fn reduce_orders(orders: &OrderVector) -> Result<ReducedOrders> {
    let mut fractions = Vec::with_capacity(orders.len());
    for (index, order) in orders.iter().enumerate() {
        match order {
            Order::Exact(r) => fractions.push(r),
            Order::Real(_) => return Err(Error::NonRationalOrder { index }),
        }
    }
    let m = fractions
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let p: Vec<BigUint> = fractions
        .iter()
        .map(|r| {
            let scaled = r.numer() * (&m / r.denom());
            scaled.to_biguint().expect("orders validated positive")
        })
        .collect();
    let gamma = Rational::new(BigInt::one(), m.clone());
    let (_, m) = m.into_parts();
    debug_assert!(p.iter().all(|pi| !pi.is_zero()));
    Ok(ReducedOrders { m, gamma, p })
}

#[cfg(test)]
pub(crate) fn biguint_to_bigint(value: &BigUint) -> BigInt {
    BigInt::from_biguint(num_bigint::Sign::Plus, value.clone())
}
