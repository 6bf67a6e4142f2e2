//! Companion matrix, polynomial roots and the sector stability test.
//!
//! With `s = z^gamma` the fractional spectrum lies in the open left half
//! plane exactly when every root of the substituted polynomial satisfies
//! `|arg s| > gamma * pi / 2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::charpoly::{char_poly_with, CharPoly, Coefficients, Limits};
use crate::error::{Error, Result};
use crate::order::{rational_to_f64, reduce_orders, Rational};
use crate::system::SystemSpec;

/// Default relative tolerance of the sector test.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Backward residual every accepted root must reach.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

const ABERTH_MAX_ITER: usize = 2000;

/// Frobenius companion matrix: ones on the subdiagonal, `-b_0 .. -b_{d-1}`
/// in the last column.
#[derive(Clone, Debug, PartialEq)]
pub struct CompanionMatrix {
    last_column: Vec<f64>,
    exact_last_column: Option<Vec<Rational>>,
}

impl CompanionMatrix {
    pub fn size(&self) -> usize {
        self.last_column.len()
    }

    /// Entry at zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let d = self.size();
        if col == d - 1 {
            self.last_column[row]
        } else if row == col + 1 {
            1.0
        } else {
            0.0
        }
    }

    pub fn last_column(&self) -> &[f64] {
        &self.last_column
    }

    pub fn exact_last_column(&self) -> Option<&[Rational]> {
        self.exact_last_column.as_deref()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let d = self.size();
        DMatrix::from_fn(d, d, |i, j| self.get(i, j))
    }
}

pub fn build_companion(cp: &CharPoly) -> Result<CompanionMatrix> {
    if cp.degree() == 0 {
        return Err(Error::ZeroDegree);
    }
    if !cp.is_monic() {
        return Err(Error::NonMonic);
    }
    let d = cp.degree();
    let exact_last_column = cp.exact().map(|b| b[..d].iter().map(|v| -v.clone()).collect());
    let last_column = cp.to_f64()[..d].iter().map(|v| -v).collect();
    Ok(CompanionMatrix {
        last_column,
        exact_last_column,
    })
}

/// Which algorithm produced the accepted roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMethod {
    Aberth,
    CompanionQr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub method: RootMethod,
    pub max_residual: f64,
}

/// `|P(z)| / sum |b_k| |z|^k`, evaluated in reversed form outside the unit
/// disc so large roots do not overflow.
pub fn backward_residual(coeffs: &[f64], z: Complex64) -> f64 {
    if z.norm() <= 1.0 {
        let mut p = Complex64::zero();
        let mut scale = 0.0;
        let r = z.norm();
        for &b in coeffs.iter().rev() {
            p = p * z + b;
            scale = scale * r + b.abs();
        }
        if scale == 0.0 {
            return 0.0;
        }
        p.norm() / scale
    } else {
        let w = z.inv();
        let r = w.norm();
        let mut q = Complex64::zero();
        let mut scale = 0.0;
        for &b in coeffs {
            q = q * w + b;
            scale = scale * r + b.abs();
        }
        q.norm() / scale
    }
}

/// Newton correction `P(z) / P'(z)`.
fn newton_ratio(coeffs: &[f64], z: Complex64) -> Complex64 {
    let d = coeffs.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for &b in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + b;
        }
        p / dp
    } else {
        // P(z) = z^d Q(w) with w = 1/z and Q the reversed polynomial.
        let w = z.inv();
        let mut q = Complex64::zero();
        let mut dq = Complex64::zero();
        for &b in coeffs {
            dq = dq * w + q;
            q = q * w + b;
        }
        z * q / (q * d as f64 - w * dq)
    }
}

/// Initial guesses on circles whose radii come from the upper convex hull of
/// `(k, ln |b_k|)`.
fn newton_polygon_guesses(coeffs: &[f64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let points: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(k, b)| (k, b.abs().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (k1, v1) = hull[hull.len() - 2];
            let (k2, v2) = hull[hull.len() - 1];
            let cross = (k2 as f64 - k1 as f64) * (pt.1 - v1) - (v2 - v1) * (pt.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut guesses = Vec::with_capacity(d);
    let sigma = 0.7;
    for pair in hull.windows(2) {
        let (k1, v1) = pair[0];
        let (k2, v2) = pair[1];
        let count = k2 - k1;
        let radius = ((v1 - v2) / count as f64).exp();
        for j in 0..count {
            let angle = 2.0 * PI * j as f64 / count as f64 + 2.0 * PI * k1 as f64 / d as f64 + sigma;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

/// Aberth-Ehrlich simultaneous iteration on a monic polynomial with nonzero
/// constant term. Returns the iterates and whether every root converged.
fn aberth(coeffs: &[f64]) -> (Vec<Complex64>, bool) {
    let d = coeffs.len() - 1;
    let mut z = newton_polygon_guesses(coeffs);
    let mut done = vec![false; d];
    let stop = 4.0 * d as f64 * f64::EPSILON;
    for _ in 0..ABERTH_MAX_ITER {
        let mut all_done = true;
        for i in 0..d {
            if done[i] {
                continue;
            }
            if backward_residual(coeffs, z[i]) <= stop {
                done[i] = true;
                continue;
            }
            all_done = false;
            let ratio = newton_ratio(coeffs, z[i]);
            let mut repulsion = Complex64::zero();
            for j in 0..d {
                if j != i {
                    repulsion += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
        if all_done {
            return (z, true);
        }
    }
    let converged = done.iter().all(|&v| v);
    (z, converged)
}

/// One Newton step per root, kept only when it lowers the residual.
fn polish(coeffs: &[f64], roots: &mut [Complex64]) {
    for z in roots.iter_mut() {
        let before = backward_residual(coeffs, *z);
        if before == 0.0 {
            continue;
        }
        let candidate = *z - newton_ratio(coeffs, *z);
        if candidate.is_finite() && backward_residual(coeffs, candidate) < before {
            *z = candidate;
        }
    }
}

/// Diagonal similarity scaling by powers of two so row and column norms match.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0_f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut c_scaled = c;
            while c_scaled < r / radix {
                c_scaled *= radix;
                f *= radix;
            }
            while c_scaled >= r * radix {
                c_scaled /= radix;
                f /= radix;
            }
            if (c_scaled + r / f) < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

fn companion_qr_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let mut m = DMatrix::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -coeffs[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    balance(&mut m);
    m.complex_eigenvalues().iter().copied().collect()
}

fn max_residual(coeffs: &[f64], roots: &[Complex64]) -> f64 {
    roots
        .iter()
        .map(|&z| backward_residual(coeffs, z))
        .fold(0.0, f64::max)
}

/// All `d` roots of a monic polynomial, counted with multiplicity.
pub fn poly_roots(cp: &CharPoly) -> Result<RootSet> {
    if cp.degree() == 0 {
        return Err(Error::ZeroDegree);
    }
    if !cp.is_monic() {
        return Err(Error::NonMonic);
    }
    let zero_count = match cp.coefficients() {
        Coefficients::Exact(b) => b.iter().take_while(|v| v.is_zero()).count(),
        Coefficients::Float(b) => b.iter().take_while(|v| **v == 0.0).count(),
    };
    let all = cp.to_f64();
    monic_roots(&all, zero_count)
}

/// Roots of monic `coeffs` whose first `zero_count` entries vanish exactly.
fn monic_roots(all: &[f64], zero_count: usize) -> Result<RootSet> {
    let coeffs = &all[zero_count..];
    let mut roots = vec![Complex64::zero(); zero_count];
    if coeffs.len() == 1 {
        return Ok(RootSet {
            roots,
            method: RootMethod::Aberth,
            max_residual: 0.0,
        });
    }
    let (mut found, _) = aberth(coeffs);
    polish(coeffs, &mut found);
    let mut residual = max_residual(coeffs, &found);
    let mut method = RootMethod::Aberth;
    if !(residual <= ROOT_RESIDUAL_TOL) {
        let mut fallback = companion_qr_roots(coeffs);
        polish(coeffs, &mut fallback);
        let fallback_residual = max_residual(coeffs, &fallback);
        if fallback.len() == coeffs.len() - 1 && fallback_residual < residual {
            found = fallback;
            residual = fallback_residual;
            method = RootMethod::CompanionQr;
        }
    }
    roots.extend(found);
    if !(residual <= ROOT_RESIDUAL_TOL) {
        return Err(Error::ConvergenceFailure {
            partial: roots,
            max_residual: residual,
        });
    }
    Ok(RootSet {
        roots,
        method,
        max_residual: residual,
    })
}

/// Roots of a monic polynomial given by ascending coefficients.
pub fn roots_of_monic(coeffs: &[f64]) -> Result<RootSet> {
    if coeffs.len() < 2 {
        return Err(Error::ZeroDegree);
    }
    if coeffs[coeffs.len() - 1] != 1.0 {
        return Err(Error::NonMonic);
    }
    let zero_count = coeffs.iter().take_while(|v| **v == 0.0).count();
    monic_roots(coeffs, zero_count)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

/// Principal argument in `(-pi, pi]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a == -PI {
        PI
    } else {
        a
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub roots: Vec<Complex64>,
    /// `|arg lambda_k|` for each root, same order as `roots`.
    pub abs_args: Vec<f64>,
    /// `gamma = 1/m`, printed as a fraction.
    pub gamma: String,
    /// Sector half-angle `gamma * pi / 2`.
    pub half_angle: f64,
    pub min_abs_arg: f64,
    pub critical_root: Option<Complex64>,
    /// `min |arg lambda| - gamma * pi / 2`.
    pub margin: f64,
    pub zero_root: bool,
    pub verdict: Verdict,
    pub tol: f64,
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exponents: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_method: Option<RootMethod>,
}

impl StabilityReport {
    pub fn gamma_rational(&self) -> Option<Rational> {
        crate::order::parse_rational(&self.gamma)
    }
}

/// Classify roots against the sector `|arg s| <= gamma * pi / 2`.
///
/// `tol` is relative to the half-angle. Roots on the boundary or at the
/// origin never yield `Stable`.
pub fn sector_verdict(roots: &[Complex64], gamma: &Rational, tol: f64) -> StabilityReport {
    let half_angle = rational_to_f64(gamma) * PI / 2.0;
    let abs_args: Vec<f64> = roots.iter().map(|&z| principal_arg(z).abs()).collect();
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let zero_root = roots.iter().any(|z| z.norm() <= tol * scale);
    let (critical, min_abs_arg) = abs_args
        .iter()
        .enumerate()
        .filter(|(i, _)| roots[*i].norm() > tol * scale)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &v)| (Some(roots[i]), v))
        .unwrap_or((None, PI));
    let margin = min_abs_arg - half_angle;
    let threshold = tol * half_angle;
    let verdict = if margin < -threshold {
        Verdict::Unstable
    } else if margin > threshold && !zero_root {
        Verdict::Stable
    } else {
        Verdict::Marginal
    };
    StabilityReport {
        roots: roots.to_vec(),
        abs_args,
        gamma: gamma.to_string(),
        half_angle,
        min_abs_arg,
        critical_root: critical,
        margin,
        zero_root,
        verdict,
        tol,
        degree: roots.len(),
        exponents: Vec::new(),
        root_method: None,
    }
}

/// Full rational-order pipeline: reduce orders, expand the determinant,
/// find the companion roots and apply the sector test.
pub fn analyze_rational(spec: &SystemSpec, tol: f64) -> Result<StabilityReport> {
    analyze_rational_with(spec, tol, Limits::default())
}

pub fn analyze_rational_with(spec: &SystemSpec, tol: f64, limits: Limits) -> Result<StabilityReport> {
    let reduced = reduce_orders(spec.orders())?;
    let cp = char_poly_with(spec.matrix(), &reduced, limits)?;
    let roots = poly_roots(&cp)?;
    let mut report = sector_verdict(&roots.roots, cp.gamma(), tol);
    report.exponents = cp.exponents().to_vec();
    report.root_method = Some(roots.method);
    Ok(report)
}
