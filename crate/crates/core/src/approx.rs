//! Rational approximation of real order vectors.
//!
//! The constants below bound an annulus `rho <= |z| <= R` outside of which
//! neither the real-order nor the approximating rational-order spectra can
//! live, and a closeness `delta` such that any `beta` with
//! `alpha - delta < beta <= alpha` keeps `|z^alpha - z^beta| < eps` on it.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::charpoly::principal_minor;
use crate::error::{Error, Result};
use crate::matrix::{det_float, CoefMatrix, Matrix};
use crate::order::{Order, OrderVector, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxConstants {
    /// Half of the smallest order.
    pub a: f64,
    /// Largest order.
    pub b: f64,
    /// `max(1, |principal minors|)`.
    pub c: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// Natural log of `rho`, which routinely underflows.
    pub ln_rho: f64,
    pub rho: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    /// `acos(1 - eps^2 / (4 R^{2b}))` without the `1/pi` factor.
    pub delta3_raw: f64,
    pub delta: f64,
    pub eps: f64,
}

impl ApproxConstants {
    pub fn log10_rho(&self) -> f64 {
        self.ln_rho / std::f64::consts::LN_10
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

/// Absolute values of every principal minor `det A_(S)` for nonempty
/// proper `S`, plus `det A` itself.
fn principal_minor_magnitudes(a: &CoefMatrix) -> Vec<f64> {
    let n = a.n();
    let full = (1u32 << n) - 1;
    (0..full)
        .map(|mask| {
            let removed: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            principal_minor(a, &removed).to_f64().abs()
        })
        .collect()
}

pub fn approx_constants(a: &CoefMatrix, orders: &OrderVector, eps: f64) -> Result<ApproxConstants> {
    check_eps(eps)?;
    let n = a.n();
    if orders.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: orders.len(),
        });
    }
    if a.is_singular() {
        return Err(Error::SingularMatrix);
    }
    let m = a.as_f64();
    let alphas = orders.values();
    let half_min = orders.min() / 2.0;
    let b = orders.max();
    let c = principal_minor_magnitudes(a).into_iter().fold(1.0, f64::max);
    let det = a.det_f64().abs();

    let spread = (0..n)
        .map(|i| m[(i, i)].abs() + m.off_diagonal_row_sum(i) + m.off_diagonal_col_sum(i))
        .fold(0.0, f64::max);
    let ln_r = [
        (spread + eps).ln() / half_min,
        alphas
            .iter()
            .map(|&al| (eps * FRAC_1_SQRT_2).ln() / al)
            .fold(f64::NEG_INFINITY, f64::max),
        0.0,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    let r = ln_r.exp();

    let subsets = (2.0f64).powi(n as i32) - 1.0;
    let ln_rho = [
        (det.ln() - (subsets * c).ln()) / half_min,
        (eps / 2.0).ln() / half_min,
        0.5f64.ln(),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let rho = ln_rho.exp();

    // eps / (sqrt 2 R^b), kept in log form until the end.
    let x = (eps.ln() - b * ln_r).exp() * FRAC_1_SQRT_2;
    let delta1 = if ln_r == 0.0 { f64::INFINITY } else { x.ln_1p() / ln_r };
    let delta2 = (-x).ln_1p() / ln_rho;
    // 1 - cos(theta) = y  <=>  theta = 2 asin(sqrt(y / 2)).
    let y = (2.0 * eps.ln() - 2.0 * b * ln_r).exp() / 4.0;
    let delta3_raw = 2.0 * (y / 2.0).sqrt().asin();
    let delta3 = delta3_raw / PI;
    let delta = delta1.min(delta2).min(delta3).min(half_min);

    Ok(ApproxConstants {
        a: half_min,
        b,
        c,
        r,
        ln_rho,
        rho,
        delta1,
        delta2,
        delta3,
        delta3_raw,
        delta,
        eps,
    })
}

fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Simplest rational (smallest denominator, then smallest numerator) in an
/// interval with nonnegative lower end. `hi = None` means unbounded.
fn simplest_between(lo: &Rational, lo_incl: bool, hi: Option<&Rational>, hi_incl: bool) -> Rational {
    let base = floor(lo);
    let candidate = if lo.is_integer() && lo_incl {
        base.clone()
    } else {
        &base + 1
    };
    let candidate = Rational::from_integer(candidate);
    let fits = match hi {
        None => true,
        Some(h) => candidate < *h || (hi_incl && candidate == *h),
    };
    if fits {
        return candidate;
    }
    let shift = Rational::from_integer(base);
    let lo_frac = lo - &shift;
    let hi_frac = hi.expect("bounded when no integer fits") - &shift;
    let inner_lo = hi_frac.recip();
    let inner_hi = (!lo_frac.is_zero()).then(|| lo_frac.recip());
    let inner = simplest_between(&inner_lo, hi_incl, inner_hi.as_ref(), lo_incl);
    shift + inner.recip()
}

/// Simplest rational in the half-open interval `(lo, hi]`, `0 <= lo < hi`.
pub fn simplest_in_interval(lo: &Rational, hi: &Rational) -> Rational {
    assert!(!lo.is_negative() && lo < hi, "need 0 <= lo < hi");
    simplest_between(lo, false, Some(hi), true)
}

/// Rational `beta` with `alpha - delta < beta <= alpha` and the smallest
/// possible denominator, clamped to `(0, 1]`.
///
/// A real `alpha` is taken to stand for every number that rounds to it, so
/// the upper end is widened by half an ulp. This lets `1.0 / 3.0` map to
/// `1/3`.
pub fn find_rational_below(alpha: &Order, delta: f64) -> Rational {
    let one = Rational::one();
    let hi = match alpha {
        Order::Exact(r) => r.clone(),
        Order::Real(v) => {
            let exact = Rational::from_float(*v).expect("finite order");
            let half_ulp = Rational::from_float(ulp(*v) / 2.0).expect("finite ulp");
            exact + half_ulp
        }
    };
    let hi = if hi > one { one } else { hi };
    let lo = if delta.is_finite() {
        let d = Rational::from_float(delta).expect("finite delta");
        let base = match alpha {
            Order::Exact(r) => r.clone(),
            Order::Real(v) => Rational::from_float(*v).expect("finite order"),
        };
        base - d
    } else {
        Rational::zero()
    };
    let lo = if lo.is_negative() { Rational::zero() } else { lo };
    simplest_in_interval(&lo, &hi)
}

fn ulp(v: f64) -> f64 {
    let next = f64::from_bits(v.to_bits() + 1);
    next - v
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalApprox {
    pub beta: OrderVector,
    pub constants: ApproxConstants,
}

impl RationalApprox {
    pub fn beta_rationals(&self) -> Vec<Rational> {
        self.beta
            .iter()
            .map(|o| o.as_exact().cloned().expect("beta is exact"))
            .collect()
    }
}

pub fn rational_approximation(a: &CoefMatrix, orders: &OrderVector, eps: f64) -> Result<RationalApprox> {
    let constants = approx_constants(a, orders, eps)?;
    let beta = orders
        .iter()
        .map(|alpha| find_rational_below(alpha, constants.delta))
        .collect();
    Ok(RationalApprox {
        beta: OrderVector::from_rationals(beta)?,
        constants,
    })
}

/// Resolution of the polar grid used for the annulus check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyGrid {
    pub angles: usize,
    pub radii: usize,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        Self { angles: 720, radii: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `0 < beta_i <= alpha_i <= 1`.
    pub ordering: bool,
    /// The eps-pseudospectrum inclusion regions avoid `|z| > R`.
    pub outer: bool,
    /// Neither spectrum meets `|z| < rho`.
    pub inner: bool,
    /// Grid maximum of `|z^alpha_i - z^beta_i|` over the annulus.
    pub max_gap: f64,
    pub annulus: bool,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.ordering && self.outer && self.inner && self.annulus
    }
}

/// `|z^alpha - z^beta|` for `z = r e^{i phi}`, from
/// `(r^a - r^b)^2 + 2 r^{a+b} (1 - cos((a - b) phi))`.
fn power_gap(ln_r: f64, phi: f64, alpha: f64, beta: f64) -> f64 {
    let diff = (beta * ln_r).exp() * ((alpha - beta) * ln_r).exp_m1();
    let half = ((alpha - beta) * phi / 2.0).sin();
    let cross = 4.0 * ((alpha + beta) * ln_r).exp() * half * half;
    (diff * diff + cross).sqrt()
}

/// Sufficient checks that `beta` is an `eps`-rational approximation of
/// `alpha` for the annulus `exp(ln_rho) <= |z| <= r`.
///
/// The outer and inner parts use the same bounds as the construction of the
/// constants; the annulus part is a grid search and not a proof.
pub fn verify_approximation_detailed(
    a: &Matrix<f64>,
    alpha: &[f64],
    beta: &[f64],
    eps: f64,
    r: f64,
    ln_rho: f64,
    grid: VerifyGrid,
) -> Verification {
    let n = a.rows();
    let ordering = alpha.len() == n
        && beta.len() == n
        && alpha
            .iter()
            .zip(beta)
            .all(|(&al, &be)| be > 0.0 && be <= al && al <= 1.0);
    if !ordering {
        return Verification {
            ordering,
            outer: false,
            inner: false,
            max_gap: f64::NAN,
            annulus: false,
        };
    }

    let outer_ok = |g: &[f64]| {
        (0..n).all(|i| {
            let radius = a.off_diagonal_row_sum(i).max(a.off_diagonal_col_sum(i)) + eps;
            r.powf(g[i]) - a[(i, i)].abs() >= radius
        })
    };
    let outer = r >= 1.0 && outer_ok(alpha) && outer_ok(beta);

    let full = (1u32 << n) - 1;
    let minors: Vec<(u32, f64)> = (1..=full)
        .map(|mask| {
            let keep: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
            let value = if keep.is_empty() { 1.0 } else { det_float(&a.principal(&keep)) };
            (mask, value.abs())
        })
        .collect();
    let det = det_float(a).abs();
    let inner_ok = |g: &[f64]| {
        let tail: f64 = minors
            .iter()
            .map(|&(mask, c)| {
                let exponent: f64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| g[i]).sum();
                c * (exponent * ln_rho).exp()
            })
            .sum();
        det > tail
    };
    let inner = ln_rho < 0.0 && inner_ok(alpha) && inner_ok(beta);

    let ln_r = r.ln();
    let mut max_gap: f64 = 0.0;
    for k in 0..grid.radii {
        let t = if grid.radii == 1 { 1.0 } else { k as f64 / (grid.radii - 1) as f64 };
        let lr = ln_rho + (ln_r - ln_rho) * t;
        for j in 0..grid.angles {
            let phi = -PI + 2.0 * PI * (j + 1) as f64 / grid.angles as f64;
            for (&al, &be) in alpha.iter().zip(beta) {
                max_gap = max_gap.max(power_gap(lr, phi, al, be));
            }
        }
    }
    Verification {
        ordering,
        outer,
        inner,
        max_gap,
        annulus: max_gap < eps,
    }
}

pub fn verify_approximation(a: &Matrix<f64>, alpha: &[f64], beta: &[f64], eps: f64, r: f64, ln_rho: f64) -> bool {
    verify_approximation_detailed(a, alpha, beta, eps, r, ln_rho, VerifyGrid::default()).passed()
}
