//! Smallest singular values of `z^alpha I - A`, order-`alpha` pseudospectra
//! and Gershgorin-type inclusion regions.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::spectrum::{principal_arg, Verdict};

/// `z^alpha` on the principal branch, with `0^alpha = 0`.
pub fn principal_power(z: Complex64, alpha: f64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if alpha == 1.0 {
        return z;
    }
    Complex64::from_polar(z.norm().powf(alpha), alpha * principal_arg(z))
}

/// The complex matrix `diag(z^alpha_1, ..., z^alpha_n) - A`.
pub fn shifted_matrix(a: &Matrix<f64>, alphas: &[f64], z: Complex64) -> DMatrix<Complex64> {
    let n = a.rows();
    DMatrix::from_fn(n, n, |i, j| {
        let shift = if i == j { principal_power(z, alphas[i]) } else { Complex64::new(0.0, 0.0) };
        shift - a[(i, j)]
    })
}

/// `sigma_min(z^alpha I - A)`, which equals `1 / ||(z^alpha I - A)^{-1}||_2`
/// and vanishes exactly on the order-`alpha` spectrum.
pub fn sigma_min_shifted(a: &Matrix<f64>, alphas: &[f64], z: Complex64) -> f64 {
    assert_eq!(a.rows(), alphas.len(), "one order per row");
    shifted_matrix(a, alphas, z)
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn pseudospectrum_member(a: &Matrix<f64>, alphas: &[f64], z: Complex64, eps: f64) -> bool {
    sigma_min_shifted(a, alphas, z) <= eps
}

/// Which matrix norm the inclusion radii correspond to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionNorm {
    /// Radius `max(r_i(A), r_i(A^T)) + eps`.
    #[default]
    Two,
    /// Radius `r_i(A) + eps`.
    Infinity,
}

/// `{ z : |a_ii - z^alpha_i| <= radius }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GershgorinRegion {
    pub index: usize,
    pub center: f64,
    pub radius: f64,
    pub order: f64,
}

impl GershgorinRegion {
    pub fn contains(&self, z: Complex64) -> bool {
        (principal_power(z, self.order) - self.center).norm() <= self.radius
    }
}

pub fn gershgorin_regions(a: &Matrix<f64>, alphas: &[f64], eps: f64, norm: RegionNorm) -> Vec<GershgorinRegion> {
    (0..a.rows())
        .map(|i| {
            let row = a.off_diagonal_row_sum(i);
            let radius = match norm {
                RegionNorm::Two => row.max(a.off_diagonal_col_sum(i)),
                RegionNorm::Infinity => row,
            } + eps;
            GershgorinRegion {
                index: i,
                center: a[(i, i)],
                radius,
                order: alphas[i],
            }
        })
        .collect()
}

pub fn in_some_region(regions: &[GershgorinRegion], z: Complex64) -> bool {
    regions.iter().any(|r| r.contains(z))
}

/// Stable when `A` is strictly row diagonally dominant with a negative
/// diagonal, which holds for every order vector in `(0, 1]^n`. Otherwise
/// inconclusive.
pub fn gershgorin_prescreen(a: &Matrix<f64>) -> Option<Verdict> {
    let dominant = (0..a.rows()).all(|i| {
        let d = a[(i, i)];
        d < 0.0 && d.abs() > a.off_diagonal_row_sum(i)
    });
    dominant.then_some(Verdict::Stable)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub re: f64,
    pub im: f64,
    pub sigma_min: f64,
}

/// Rectangular grid spec: `nx` by `ny` points covering the closed ranges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

fn linspace(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if n <= 1 {
        lo
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

/// `sigma_min` on every grid point, row by row in `im`, then `re`.
pub fn sigma_min_grid(a: &Matrix<f64>, alphas: &[f64], grid: &Grid) -> Vec<GridPoint> {
    (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|idx| {
            let (iy, ix) = (idx / grid.nx, idx % grid.nx);
            let re = linspace(grid.re.0, grid.re.1, grid.nx, ix);
            let im = linspace(grid.im.0, grid.im.1, grid.ny, iy);
            GridPoint {
                re,
                im,
                sigma_min: sigma_min_shifted(a, alphas, Complex64::new(re, im)),
            }
        })
        .collect()
}

pub fn write_grid_csv<W: Write>(points: &[GridPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "re,im,sigma_min")?;
    for p in points {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", p.re, p.im, p.sigma_min)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn neg_identity() -> Matrix<f64> {
        Matrix::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap()
    }

    #[test]
    fn sigma_min_at_origin() {
        let s = sigma_min_shifted(&neg_identity(), &[1.0, 1.0], Complex64::new(0.0, 0.0));
        assert!((s - 1.0).abs() < 1e-15);
        assert!(pseudospectrum_member(&neg_identity(), &[1.0, 1.0], Complex64::new(0.0, 0.0), 1.0));
        assert!(!pseudospectrum_member(&neg_identity(), &[1.0, 1.0], Complex64::new(0.0, 0.0), 0.5));
    }

    #[test]
    fn prescreen_cases() {
        let a = Matrix::from_rows(vec![vec![-2.0, 0.5], vec![0.5, -3.0]]).unwrap();
        assert_eq!(gershgorin_prescreen(&a), Some(Verdict::Stable));
        let b = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(gershgorin_prescreen(&b), None);
        let tie = Matrix::from_rows(vec![vec![-1.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(gershgorin_prescreen(&tie), None);
    }

    #[test]
    fn principal_power_branch() {
        let z = principal_power(Complex64::new(-4.0, 0.0), 0.5);
        assert!((z - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        let w = principal_power(Complex64::new(-4.0, -0.0), 0.5);
        assert!((w - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn grid_csv_has_header_and_rows() {
        let grid = Grid { re: (-1.0, 1.0), im: (0.0, 1.0), nx: 3, ny: 2 };
        let pts = sigma_min_grid(&neg_identity(), &[1.0, 1.0], &grid);
        assert_eq!(pts.len(), 6);
        let mut buf = Vec::new();
        write_grid_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("re,im,sigma_min\n"));
    }

    fn case() -> impl Strategy<Value = (Matrix<f64>, Vec<f64>, Complex64, f64)> {
        (
            proptest::collection::vec(-2.0f64..2.0, 9),
            proptest::collection::vec(0.05f64..=1.0, 3),
            -3.0f64..3.0,
            -3.0f64..3.0,
            0.01f64..1.0,
        )
            .prop_map(|(a, al, re, im, eps)| {
                (Matrix::new(3, 3, a).unwrap(), al, Complex64::new(re, im), eps)
            })
    }

    proptest! {
        #[test]
        fn pseudospectrum_lies_in_gershgorin_regions((a, al, z, eps) in case()) {
            if pseudospectrum_member(&a, &al, z, eps) {
                let regions = gershgorin_regions(&a, &al, eps, RegionNorm::Two);
                prop_assert!(in_some_region(&regions, z));
            }
        }

        #[test]
        fn membership_is_monotone_in_eps((a, al, z, eps) in case(), extra in 0.0f64..1.0) {
            if pseudospectrum_member(&a, &al, z, eps) {
                prop_assert!(pseudospectrum_member(&a, &al, z, eps + extra));
            }
        }

        #[test]
        fn continuous_along_arcs((a, al, z, _eps) in case()) {
            prop_assume!(z.norm() > 0.1);
            let r = z.norm();
            let theta = principal_arg(z).clamp(-3.0, 3.0);
            let h = 1e-7;
            let s0 = sigma_min_shifted(&a, &al, Complex64::from_polar(r, theta));
            let s1 = sigma_min_shifted(&a, &al, Complex64::from_polar(r, theta + h));
            // sigma_min is 1-Lipschitz in the matrix entries.
            prop_assert!((s0 - s1).abs() <= 2.0 * h * r.max(1.0) + 1e-12);
        }
    }
}
