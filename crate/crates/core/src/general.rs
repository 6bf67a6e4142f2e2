//! Stability for arbitrary real orders via a rational approximation whose
//! closeness is driven by a lower bound on the distance to instability.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{rational_approximation, RationalApprox};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pseudospectrum::sigma_min_shifted;
use crate::spectrum::{analyze_rational, StabilityReport, Verdict};
use crate::system::SystemSpec;

/// Smallest eigenvalue of `-(A + A^T)`.
pub fn lambda_min_sym(a: &Matrix<f64>) -> f64 {
    let m = a.to_dmatrix();
    let s = -(&m + m.transpose());
    SymmetricEigen::new(s).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `lambda_min(-(A + A^T)) / 2`, a lower bound on the distance from `A` to
/// the nearest matrix with spectrum touching the closed right half plane.
pub fn delta_lower_bound(a: &Matrix<f64>) -> Result<f64> {
    let lambda_min = lambda_min_sym(a);
    if lambda_min > 0.0 {
        Ok(lambda_min / 2.0)
    } else {
        Err(Error::HypothesisFailed { lambda_min })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OmegaGrid {
    /// Log-spaced sample count on `(0, Omega]`, in addition to `omega = 0`.
    pub points: usize,
    pub refine_iterations: usize,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self {
            points: 4000,
            refine_iterations: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    /// Estimated `min over real omega of sigma_min((i omega)^alpha I - A)`.
    pub value: f64,
    /// Minimizing `omega >= 0` (the problem is conjugate symmetric).
    pub omega: f64,
    /// Upper end of the scanned range.
    pub omega_max: f64,
    pub points: usize,
}

/// Numerical distance-to-instability on the imaginary axis.
pub fn delta_numeric(a: &Matrix<f64>, alphas: &[f64], grid: OmegaGrid) -> DeltaEstimate {
    let n = a.rows();
    let f = |w: f64| sigma_min_shifted(a, alphas, Complex64::new(0.0, w));
    let s0 = f(0.0);
    // Outside every inclusion region of radius max(r_i, r_i^T) + s0 the value exceeds s0.
    let omega_max = (0..n)
        .map(|i| {
            let radius = a.off_diagonal_row_sum(i).max(a.off_diagonal_col_sum(i));
            (a[(i, i)].abs() + radius + s0).powf(1.0 / alphas[i])
        })
        .fold(1.0, f64::max);
    let lo = omega_max * 1e-9;
    let points = grid.points.max(2);
    let ratio = (omega_max / lo).ln() / (points - 1) as f64;
    let mut omegas: Vec<f64> = vec![0.0];
    omegas.extend((0..points).map(|k| lo * (ratio * k as f64).exp()));
    let values: Vec<f64> = omegas.par_iter().map(|&w| f(w)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty grid");

    let left = omegas[best.saturating_sub(1)];
    let right = omegas[(best + 1).min(omegas.len() - 1)];
    let (mut x0, mut x1) = (left, right);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = x1 - phi * (x1 - x0);
    let mut d = x0 + phi * (x1 - x0);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..grid.refine_iterations {
        if fc < fd {
            x1 = d;
            d = c;
            fd = fc;
            c = x1 - phi * (x1 - x0);
            fc = f(c);
        } else {
            x0 = c;
            c = d;
            fc = fd;
            d = x0 + phi * (x1 - x0);
            fd = f(d);
        }
    }
    let mut value = values[best];
    let mut omega = omegas[best];
    for (w, v) in [(c, fc), (d, fd)] {
        if v < value {
            value = v;
            omega = w;
        }
    }
    DeltaEstimate {
        value,
        omega,
        omega_max,
        points: omegas.len(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralVerdict {
    Stable,
    Unstable,
    Marginal,
    Inapplicable,
}

impl From<Verdict> for GeneralVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Stable => GeneralVerdict::Stable,
            Verdict::Unstable => GeneralVerdict::Unstable,
            Verdict::Marginal => GeneralVerdict::Marginal,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralReport {
    pub lambda_min: f64,
    pub h0: f64,
    /// `eps` used for the approximation; absent when inapplicable.
    pub eps: Option<f64>,
    pub approx: Option<RationalApprox>,
    pub rational_report: Option<StabilityReport>,
    pub verdict: GeneralVerdict,
}

/// `h0` rounded down to one significant digit (0.102 becomes 0.1).
pub fn default_eps(h0: f64) -> f64 {
    let scale = 10f64.powf(h0.log10().floor());
    let rounded = (h0 / scale).floor() * scale;
    if rounded > 0.0 && rounded <= h0 {
        rounded
    } else {
        h0
    }
}

/// Decide stability for real orders.
///
/// With `lambda_min(-(A + A^T)) <= 0` no radius is available and the result
/// is `Inapplicable`. Otherwise `eps` (default [`default_eps`]) must lie in
/// `(0, h0]`; the orders are replaced by an `eps`-rational approximation and
/// its companion test decides.
pub fn analyze_general(spec: &SystemSpec, eps: Option<f64>, tol: f64) -> Result<GeneralReport> {
    let lambda_min = lambda_min_sym(spec.a_f64());
    let h0 = lambda_min / 2.0;
    if lambda_min <= 0.0 {
        return Ok(GeneralReport {
            lambda_min,
            h0,
            eps: None,
            approx: None,
            rational_report: None,
            verdict: GeneralVerdict::Inapplicable,
        });
    }
    let eps = match eps {
        Some(e) if e.is_finite() && e > 0.0 && e <= h0 => e,
        Some(e) => return Err(Error::InvalidEpsilon(e)),
        None => default_eps(h0),
    };
    let approx = rational_approximation(spec.matrix(), spec.orders(), eps)?;
    let reduced = spec.with_orders(approx.beta.clone())?;
    let report = analyze_rational(&reduced, tol)?;
    Ok(GeneralReport {
        lambda_min,
        h0,
        eps: Some(eps),
        verdict: report.verdict.into(),
        approx: Some(approx),
        rational_report: Some(report),
    })
}
