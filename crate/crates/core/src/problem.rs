//! JSON problem files.
//!
//! ```json
//! {
//!   "matrix": [[-0.5, "-1/5"], ["3/20", -0.4]],
//!   "orders": ["1/2", "128/(71*sqrt(13))"],
//!   "forcing": {"type": "inverse_power", "exponents": [1, 2]},
//!   "simulation": {"x0": [0.5, -0.3], "t_final": 100, "h": 0.1}
//! }
//! ```
//!
//! Matrix entries are exact: numbers are read as the decimal they are
//! written as, strings may be fractions. Orders written as strings are exact
//! unless they contain `sqrt`; orders written as JSON numbers are real.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::{CoefMatrix, Matrix};
use crate::order::{parse_rational, rational_from_shortest_decimal, rational_to_f64, Order, OrderVector, Rational};
use crate::simulate::{Constant, Forcing, InversePower, Monomial, Polynomial, Problem};
use crate::system::SystemSpec;

#[derive(Clone, Debug, PartialEq)]
pub enum ForcingSpec {
    None,
    InversePower(Vec<f64>),
    Constant(Vec<f64>),
    Polynomial(Polynomial),
}

impl ForcingSpec {
    pub fn to_forcing(&self) -> Forcing {
        match self {
            ForcingSpec::None => Forcing::None,
            ForcingSpec::InversePower(k) => Forcing::Time(Arc::new(InversePower { exponents: k.clone() })),
            ForcingSpec::Constant(v) => Forcing::Time(Arc::new(Constant(v.clone()))),
            ForcingSpec::Polynomial(p) => Forcing::State(Arc::new(p.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSpec {
    pub x0: Vec<f64>,
    pub t_final: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub system: SystemSpec,
    pub forcing: ForcingSpec,
    pub simulation: Option<SimulationSpec>,
}

impl ProblemFile {
    /// Simulation problem, with optional overrides of `T` and `h`.
    pub fn problem(&self, t_final: Option<f64>, h: Option<f64>) -> Result<Problem> {
        let sim = self
            .simulation
            .as_ref()
            .ok_or_else(|| Error::InvalidProblem("file has no \"simulation\" block".into()))?;
        Problem::new(
            &self.system,
            self.forcing.to_forcing(),
            sim.x0.clone(),
            t_final.unwrap_or(sim.t_final),
            h.unwrap_or(sim.h),
        )
    }
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| invalid("$", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "matrix" | "orders" | "forcing" | "simulation" | "name" | "comment") {
            return Err(invalid(key, "unknown field"));
        }
    }
    let matrix = parse_matrix(obj.get("matrix").ok_or_else(|| invalid("matrix", "missing"))?)?;
    let orders = parse_orders(obj.get("orders").ok_or_else(|| invalid("orders", "missing"))?)?;
    if orders.len() != matrix.n() {
        return Err(invalid(
            "orders",
            format!("{} orders for a {}x{} matrix", orders.len(), matrix.n(), matrix.n()),
        ));
    }
    let n = matrix.n();
    let system = SystemSpec::new(matrix, orders)?;
    let forcing = match obj.get("forcing") {
        None | Some(Value::Null) => ForcingSpec::None,
        Some(v) => parse_forcing(v, n)?,
    };
    let simulation = match obj.get("simulation") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_simulation(v, n)?),
    };
    Ok(ProblemFile {
        system,
        forcing,
        simulation,
    })
}

fn parse_matrix(v: &Value) -> Result<CoefMatrix> {
    let rows = v.as_array().ok_or_else(|| invalid("matrix", "expected an array of rows"))?;
    let mut exact = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let entries = row
            .as_array()
            .ok_or_else(|| invalid(&format!("matrix[{i}]"), "expected an array"))?;
        let mut out = Vec::with_capacity(entries.len());
        for (j, e) in entries.iter().enumerate() {
            let path = format!("matrix[{i}][{j}]");
            let value = match e {
                Value::Number(num) => num.as_f64().and_then(rational_from_shortest_decimal),
                Value::String(s) => parse_rational(s),
                _ => None,
            };
            out.push(value.ok_or_else(|| invalid(&path, format!("not a number or fraction: {e}")))?);
        }
        exact.push(out);
    }
    let m = Matrix::from_rows(exact).map_err(|e| invalid("matrix", e))?;
    CoefMatrix::from_exact(m).map_err(|e| invalid("matrix", e))
}

fn parse_orders(v: &Value) -> Result<OrderVector> {
    let items = v.as_array().ok_or_else(|| invalid("orders", "expected an array"))?;
    let mut orders = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("orders[{i}]");
        let order = match item {
            Value::Number(num) => Order::Real(num.as_f64().ok_or_else(|| invalid(&path, "not finite"))?),
            Value::String(s) => parse_order_expr(s).map_err(|msg| invalid(&path, msg))?,
            _ => return Err(invalid(&path, "expected a string or number")),
        };
        orders.push(order);
    }
    OrderVector::new(orders).map_err(|e| invalid("orders", e))
}

/// `c * sqrt(r)` with rational `c` and `r >= 0`.
#[derive(Clone, Debug, PartialEq)]
struct Surd {
    coeff: Rational,
    radicand: Rational,
}

impl Surd {
    fn rational(c: Rational) -> Self {
        Surd {
            coeff: c,
            radicand: Rational::one(),
        }
    }

    fn mul(self, o: Surd) -> Surd {
        Surd {
            coeff: self.coeff * o.coeff,
            radicand: self.radicand * o.radicand,
        }
    }

    fn div(self, o: Surd) -> std::result::Result<Surd, String> {
        if o.coeff.is_zero() || o.radicand.is_zero() {
            return Err("division by zero".into());
        }
        // c1 sqrt(r1) / (c2 sqrt(r2)) = (c1 / (c2 r2)) sqrt(r1 r2).
        Ok(Surd {
            coeff: self.coeff / (o.coeff * &o.radicand),
            radicand: self.radicand * o.radicand,
        })
    }

    fn exact_sqrt(r: &Rational) -> Option<Rational> {
        let sq = |x: &BigInt| {
            let s = x.sqrt();
            (&s * &s == *x).then_some(s)
        };
        Some(Rational::new(sq(r.numer())?, sq(r.denom())?))
    }

    fn to_order(&self) -> Order {
        if let Some(root) = Self::exact_sqrt(&self.radicand) {
            return Order::Exact(&self.coeff * root);
        }
        // Correctly rounded sqrt(c^2 r), sign restored afterwards.
        let square = &self.coeff * &self.coeff * &self.radicand;
        let mut v = rational_to_f64(&square).sqrt();
        for _ in 0..4 {
            let lo = f64::from_bits(v.to_bits() - 1);
            let hi = f64::from_bits(v.to_bits() + 1);
            let mid_lo = Rational::from_float((lo + v) / 2.0);
            let mid_hi = Rational::from_float((v + hi) / 2.0);
            match (mid_lo, mid_hi) {
                (Some(ml), _) if &ml * &ml > square => v = lo,
                (_, Some(mh)) if &mh * &mh < square => v = hi,
                _ => break,
            }
        }
        Order::Real(if self.coeff.is_negative() { -v } else { v })
    }
}

/// Order literal: a rational (`"1/2"`, `"0.25"`) or a product/quotient of
/// rationals and `sqrt(...)` terms (`"128/(71*sqrt(13))"`).
pub fn parse_order_expr(text: &str) -> std::result::Result<Order, String> {
    if let Some(r) = parse_rational(text) {
        return Ok(Order::Exact(r));
    }
    let tokens: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut parser = ExprParser { s: &tokens, pos: 0 };
    let value = parser.product()?;
    if parser.pos != tokens.len() {
        return Err(format!("unexpected '{}' at position {}", tokens[parser.pos], parser.pos + 1));
    }
    Ok(value.to_order())
}

struct ExprParser<'a> {
    s: &'a [char],
    pos: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> std::result::Result<(), String> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected '{c}' at position {}", self.pos + 1))
        }
    }

    fn product(&mut self) -> std::result::Result<Surd, String> {
        let mut acc = self.factor()?;
        while let Some(op) = self.peek() {
            match op {
                '*' => {
                    self.pos += 1;
                    acc = acc.mul(self.factor()?);
                }
                '/' => {
                    self.pos += 1;
                    acc = acc.div(self.factor()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> std::result::Result<Surd, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.product()?;
                self.expect(')')?;
                Ok(v)
            }
            Some('s') => {
                for c in "sqrt".chars() {
                    self.expect(c)?;
                }
                self.expect('(')?;
                let inner = self.product()?;
                self.expect(')')?;
                if !inner.radicand.is_one() {
                    return Err("nested sqrt is not supported".into());
                }
                if inner.coeff.is_negative() {
                    return Err("sqrt of a negative number".into());
                }
                Ok(Surd {
                    coeff: Rational::one(),
                    radicand: inner.coeff,
                })
            }
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+') {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let lit: String = self.s[start..self.pos].iter().collect();
                parse_rational(&lit)
                    .map(Surd::rational)
                    .ok_or_else(|| format!("bad number '{lit}' at position {}", start + 1))
            }
            None => Err("unexpected end of expression".into()),
        }
    }
}

fn f64_array(v: &Value, path: &str, len: Option<usize>) -> Result<Vec<f64>> {
    let items = v.as_array().ok_or_else(|| invalid(path, "expected an array of numbers"))?;
    let out = items
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| invalid(&format!("{path}[{i}]"), "expected a number"))
        })
        .collect::<Result<Vec<f64>>>()?;
    if let Some(n) = len {
        if out.len() != n {
            return Err(invalid(path, format!("expected {n} entries, found {}", out.len())));
        }
    }
    Ok(out)
}

fn parse_forcing(v: &Value, n: usize) -> Result<ForcingSpec> {
    let kind = v
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| invalid("forcing.type", "missing"))?;
    match kind {
        "none" => Ok(ForcingSpec::None),
        "inverse_power" => {
            let k = f64_array(v.get("exponents").unwrap_or(&Value::Null), "forcing.exponents", Some(n))?;
            Ok(ForcingSpec::InversePower(k))
        }
        "constant" => Ok(ForcingSpec::Constant(f64_array(
            v.get("values").unwrap_or(&Value::Null),
            "forcing.values",
            Some(n),
        )?)),
        "polynomial" => {
            let components: Vec<Vec<Monomial>> =
                serde_json::from_value(v.get("components").cloned().unwrap_or(Value::Null))
                    .map_err(|e| invalid("forcing.components", e))?;
            if components.len() != n {
                return Err(invalid("forcing.components", format!("expected {n} components")));
            }
            if components.iter().flatten().any(|m| m.powers.len() != n) {
                return Err(invalid("forcing.components", format!("every monomial needs {n} powers")));
            }
            Ok(ForcingSpec::Polynomial(Polynomial { components }))
        }
        other => Err(invalid("forcing.type", format!("unknown forcing '{other}'"))),
    }
}

fn parse_simulation(v: &Value, n: usize) -> Result<SimulationSpec> {
    let x0 = f64_array(v.get("x0").unwrap_or(&Value::Null), "simulation.x0", Some(n))?;
    let t_final = v
        .get("t_final")
        .or_else(|| v.get("T"))
        .and_then(Value::as_f64)
        .ok_or_else(|| invalid("simulation.t_final", "expected a number"))?;
    let h = v
        .get("h")
        .and_then(Value::as_f64)
        .ok_or_else(|| invalid("simulation.h", "expected a number"))?;
    Ok(SimulationSpec { x0, t_final, h })
}
