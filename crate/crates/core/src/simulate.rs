//! Product-integration trapezoidal solver for multi-order Caputo systems
//! `D^alpha x = A x + f`, with decay-rate estimation and Mittag-Leffler
//! style boundedness checks.

use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::system::SystemSpec;

/// Inhomogeneous term depending on time only.
pub trait TimeForcing: Send + Sync {
    fn eval(&self, t: f64, out: &mut [f64]);
}

/// Nonlinear term depending on the state only.
pub trait StateForcing: Send + Sync {
    fn eval(&self, x: &[f64], out: &mut [f64]);

    /// Row-major `n x n` Jacobian. Forward differences unless overridden.
    fn jacobian(&self, x: &[f64], jac: &mut [f64]) {
        let n = x.len();
        let mut base = vec![0.0; n];
        let mut bumped = vec![0.0; n];
        let mut xp = x.to_vec();
        self.eval(x, &mut base);
        for j in 0..n {
            let step = f64::EPSILON.sqrt() * x[j].abs().max(1.0);
            xp[j] = x[j] + step;
            self.eval(&xp, &mut bumped);
            xp[j] = x[j];
            for i in 0..n {
                jac[i * n + j] = (bumped[i] - base[i]) / step;
            }
        }
    }
}

#[derive(Clone, Default)]
pub enum Forcing {
    #[default]
    None,
    Time(Arc<dyn TimeForcing>),
    State(Arc<dyn StateForcing>),
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::None => write!(f, "Forcing::None"),
            Forcing::Time(_) => write!(f, "Forcing::Time(..)"),
            Forcing::State(_) => write!(f, "Forcing::State(..)"),
        }
    }
}

/// `f_i(t) = 1 / (1 + t^{k_i})`.
#[derive(Clone, Debug, PartialEq)]
pub struct InversePower {
    pub exponents: Vec<f64>,
}

impl TimeForcing for InversePower {
    fn eval(&self, t: f64, out: &mut [f64]) {
        for (o, &k) in out.iter_mut().zip(&self.exponents) {
            *o = 1.0 / (1.0 + t.powf(k));
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constant(pub Vec<f64>);

impl TimeForcing for Constant {
    fn eval(&self, _t: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Component-wise sums of monomials in the state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub components: Vec<Vec<Monomial>>,
}

impl Polynomial {
    /// The quadratic-to-quartic nonlinearity
    /// `(x1^2 + x2^3 - x4^3, 3 x1^2 + 4 x2^3 - 5 x4^4, x1^3 + 3 x2^3, x1^3 + 3 x2^3)`.
    pub fn example_quartic() -> Self {
        let m = |coeff: f64, powers: [u32; 4]| Monomial {
            coeff,
            powers: powers.to_vec(),
        };
        let last = vec![m(1.0, [3, 0, 0, 0]), m(3.0, [0, 3, 0, 0])];
        Polynomial {
            components: vec![
                vec![m(1.0, [2, 0, 0, 0]), m(1.0, [0, 3, 0, 0]), m(-1.0, [0, 0, 0, 3])],
                vec![m(3.0, [2, 0, 0, 0]), m(4.0, [0, 3, 0, 0]), m(-5.0, [0, 0, 0, 4])],
                last.clone(),
                last,
            ],
        }
    }
}

fn monomial_value(m: &Monomial, x: &[f64]) -> f64 {
    m.powers
        .iter()
        .zip(x)
        .fold(m.coeff, |acc, (&p, &xi)| acc * xi.powi(p as i32))
}

impl StateForcing for Polynomial {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, terms) in out.iter_mut().zip(&self.components) {
            *o = terms.iter().map(|m| monomial_value(m, x)).sum();
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut [f64]) {
        let n = x.len();
        jac.iter_mut().for_each(|v| *v = 0.0);
        for (i, terms) in self.components.iter().enumerate() {
            for m in terms {
                for (j, &p) in m.powers.iter().enumerate() {
                    if p == 0 {
                        continue;
                    }
                    let mut d = m.coeff * p as f64;
                    for (k, (&q, &xk)) in m.powers.iter().zip(x).enumerate() {
                        let e = if k == j { q - 1 } else { q };
                        d *= xk.powi(e as i32);
                    }
                    jac[i * n + j] += d;
                }
            }
        }
    }
}

/// Which samples of the uniform step grid are kept in the output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thinning {
    #[default]
    All,
    Every(usize),
    /// Roughly this many samples per decade of `t`.
    Log(usize),
}

/// How the memory term is accumulated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HistoryMethod {
    /// FFT convolution on dyadic blocks, direct sums inside small blocks.
    #[default]
    Fft,
    /// Plain `O(k)` sum for every step.
    Direct,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub a: Matrix<f64>,
    pub alphas: Vec<f64>,
    pub forcing: Forcing,
    pub x0: Vec<f64>,
    pub t_final: f64,
    pub h: f64,
}

impl Problem {
    pub fn new(spec: &SystemSpec, forcing: Forcing, x0: Vec<f64>, t_final: f64, h: f64) -> Result<Self> {
        let p = Problem {
            a: spec.a_f64().clone(),
            alphas: spec.orders().values(),
            forcing,
            x0,
            t_final,
            h,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.rows();
        if self.alphas.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.alphas.len(),
            });
        }
        if self.x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.x0.len(),
            });
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidProblem(format!("step size h = {} must be positive", self.h)));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.h) {
            return Err(Error::InvalidProblem(format!(
                "final time T = {} must be at least h = {}",
                self.t_final, self.h
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("initial state is not finite".into()));
        }
        if self.alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::InvalidProblem("orders must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Number of uniform steps `floor(T / h)`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.h * (1.0 + 1e-12)).floor() as usize
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One row per retained sample.
    pub states: Vec<Vec<f64>>,
    /// Step indices at which Newton stopped without meeting the tolerance.
    pub newton_failures: Vec<usize>,
    pub steps: usize,
}

impl Trajectory {
    pub fn converged(&self) -> bool {
        self.newton_failures.is_empty()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(|x| norm2(x)).collect()
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Generalized binomial coefficient `C(beta, m)`.
fn binom(beta: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, k| acc * (beta - k as f64) / (k + 1) as f64)
}

const SERIES_FROM: usize = 10;

/// `(k-1)^beta - 2 k^beta + (k+1)^beta` for `k >= 1`.
fn second_difference(beta: f64, k: usize) -> f64 {
    let kf = k as f64;
    if k < SERIES_FROM {
        return (kf - 1.0).powf(beta) - 2.0 * kf.powf(beta) + (kf + 1.0).powf(beta);
    }
    let inv2 = 1.0 / (kf * kf);
    let mut sum = 0.0;
    let mut scale = kf.powf(beta) * inv2;
    let mut m = 2;
    loop {
        let term = 2.0 * binom(beta, m) * scale;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || m > 40 {
            break;
        }
        m += 2;
        scale *= inv2;
    }
    sum
}

/// Product-integration trapezoidal weights for one order.
#[derive(Clone, Debug)]
pub struct PiWeights {
    pub alpha: f64,
    /// `a_0, ..., a_N`.
    pub a: Vec<f64>,
    gamma2: f64,
}

impl PiWeights {
    pub fn new(alpha: f64, steps: usize) -> Self {
        let beta = alpha + 1.0;
        let gamma2 = libm::tgamma(alpha + 2.0);
        let mut a = Vec::with_capacity(steps + 1);
        a.push(1.0 / gamma2);
        for k in 1..=steps {
            a.push(second_difference(beta, k) / gamma2);
        }
        PiWeights { alpha, a, gamma2 }
    }

    /// Weight of the initial value `g_0` at step `n >= 1`:
    /// `((n-1)^{alpha+1} - n^alpha (n - alpha - 1)) / Gamma(alpha + 2)`.
    pub fn start(&self, n: usize) -> f64 {
        let alpha = self.alpha;
        let beta = alpha + 1.0;
        let nf = n as f64;
        let v = if n < SERIES_FROM {
            (nf - 1.0).powf(beta) - nf.powf(alpha) * (nf - alpha - 1.0)
        } else {
            let inv = -1.0 / nf;
            let mut sum = 0.0;
            let mut pow = inv * inv;
            let mut m = 2;
            loop {
                let term = binom(beta, m) * pow;
                sum += term;
                if term.abs() <= 1e-17 * sum.abs() || m > 60 {
                    break;
                }
                m += 1;
                pow *= inv;
            }
            nf.powf(beta) * sum
        };
        v / self.gamma2
    }
}

const BASE_BLOCK: usize = 64;
const KERNEL_CACHE_MAX: usize = 1 << 17;

/// Observer invoked on every step, including `t = 0`.
pub type Observer<'a> = dyn FnMut(usize, f64, &[f64]) + 'a;

struct Solver<'p> {
    p: &'p Problem,
    n: usize,
    steps: usize,
    /// Component index to distinct-order index.
    group: Vec<usize>,
    weights: Vec<PiWeights>,
    h_alpha: Vec<f64>,
    /// `g_j = A y_j + f(t_j, y_j)`, component-major.
    g: Vec<Vec<f64>>,
    hist: Vec<Vec<f64>>,
    y_prev: Vec<f64>,
    linear_inverse: Option<DMatrix<f64>>,
    planner: FftPlanner<f64>,
    kernels: HashMap<(usize, usize), Arc<Vec<Complex64>>>,
    failures: Vec<usize>,
}

impl<'p> Solver<'p> {
    fn new(p: &'p Problem) -> Self {
        let n = p.n();
        let steps = p.steps();
        let mut distinct: Vec<f64> = Vec::new();
        let group: Vec<usize> = p
            .alphas
            .iter()
            .map(|&a| match distinct.iter().position(|&d| d == a) {
                Some(k) => k,
                None => {
                    distinct.push(a);
                    distinct.len() - 1
                }
            })
            .collect();
        let group: Vec<usize> = group;
        let weights: Vec<PiWeights> = distinct.iter().map(|&a| PiWeights::new(a, steps)).collect();
        let h_alpha: Vec<f64> = p.alphas.iter().map(|&a| p.h.powf(a)).collect();
        let linear_inverse = match p.forcing {
            Forcing::State(_) => None,
            _ => {
                let a0: Vec<f64> = (0..n).map(|i| {
                    let w: &PiWeights = &weights[group[i]];
                    h_alpha[i] * w.a[0]
                }).collect();
                DMatrix::from_fn(n, n, |i, j| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    id - a0[i] * p.a[(i, j)]
                })
                .try_inverse()
            }
        };
        Solver {
            p,
            n,
            steps,
            group,
            weights,
            h_alpha,
            g: vec![vec![0.0; steps + 1]; n],
            hist: vec![vec![0.0; steps + 1]; n],
            y_prev: p.x0.clone(),
            linear_inverse,
            planner: FftPlanner::new(),
            kernels: HashMap::new(),
            failures: Vec::new(),
        }
    }

    fn mu(&self, i: usize) -> f64 {
        self.h_alpha[i] * self.weights[self.group[i]].a[0]
    }

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        match &self.p.forcing {
            Forcing::None => out.iter_mut().for_each(|v| *v = 0.0),
            Forcing::Time(f) => f.eval(t, out),
            Forcing::State(f) => f.eval(y, out),
        }
        for i in 0..n {
            out[i] += (0..n).map(|j| self.p.a[(i, j)] * y[j]).sum::<f64>();
        }
    }

    fn store_g(&mut self, step: usize, t: f64, y: &[f64]) {
        let mut g = vec![0.0; self.n];
        self.rhs(t, y, &mut g);
        for i in 0..self.n {
            self.g[i][step] = g[i];
        }
    }

    fn step(&mut self, k: usize, observer: &mut Observer<'_>) -> Result<()> {
        let n = self.n;
        let t = k as f64 * self.p.h;
        let c: Vec<f64> = (0..n)
            .map(|i| {
                let w = &self.weights[self.group[i]];
                self.p.x0[i] + self.h_alpha[i] * (w.start(k) * self.g[i][0] + self.hist[i][k])
            })
            .collect();
        let mu: Vec<f64> = (0..n).map(|i| self.mu(i)).collect();
        let problem = self.p;
        let y = match &problem.forcing {
            Forcing::State(f) => self.newton(k, &c, &mu, f.as_ref())?,
            forcing => {
                let mut rhs = c;
                if let Forcing::Time(f) = forcing {
                    let mut ft = vec![0.0; n];
                    f.eval(t, &mut ft);
                    for i in 0..n {
                        rhs[i] += mu[i] * ft[i];
                    }
                }
                let inv = self.linear_inverse.as_ref().ok_or(Error::SingularMatrix)?;
                (inv * DVector::from_vec(rhs)).as_slice().to_vec()
            }
        };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NewtonDivergence { step: k });
        }
        self.store_g(k, t, &y);
        observer(k, t, &y);
        self.y_prev = y;
        Ok(())
    }

    fn newton(&mut self, k: usize, c: &[f64], mu: &[f64], f: &dyn StateForcing) -> Result<Vec<f64>> {
        let n = self.n;
        let mut y = self.y_prev.clone();
        let mut fx = vec![0.0; n];
        let mut jf = vec![0.0; n * n];
        for _ in 0..50 {
            f.eval(&y, &mut fx);
            let resid = DVector::from_fn(n, |i, _| {
                let ay: f64 = (0..n).map(|j| self.p.a[(i, j)] * y[j]).sum();
                y[i] - c[i] - mu[i] * (ay + fx[i])
            });
            f.jacobian(&y, &mut jf);
            let jac = DMatrix::from_fn(n, n, |i, j| {
                let id = if i == j { 1.0 } else { 0.0 };
                id - mu[i] * (self.p.a[(i, j)] + jf[i * n + j])
            });
            let Some(delta) = jac.lu().solve(&resid) else {
                return Err(Error::NewtonDivergence { step: k });
            };
            let mut size: f64 = 0.0;
            let mut scale: f64 = 1.0;
            for i in 0..n {
                y[i] -= delta[i];
                size = size.max(delta[i].abs());
                scale = scale.max(y[i].abs());
            }
            if !size.is_finite() {
                return Err(Error::NewtonDivergence { step: k });
            }
            if size <= 1e-12 * scale {
                return Ok(y);
            }
        }
        self.failures.push(k);
        Ok(y)
    }

    /// FFT of `a[0..size)` for one order group, cached for small sizes.
    fn kernel(&mut self, group: usize, size: usize) -> Arc<Vec<Complex64>> {
        if let Some(k) = self.kernels.get(&(group, size)) {
            return Arc::clone(k);
        }
        let w = &self.weights[group].a;
        let mut buf: Vec<Complex64> = (0..size)
            .map(|q| Complex64::new(w.get(q).copied().unwrap_or(0.0), 0.0))
            .collect();
        self.planner.plan_fft_forward(size).process(&mut buf);
        let k = Arc::new(buf);
        if size <= KERNEL_CACHE_MAX {
            self.kernels.insert((group, size), Arc::clone(&k));
        }
        k
    }

    /// Add contributions of `g[lo..mid)` to `hist[mid..lo + size)`.
    fn convolve_block(&mut self, lo: usize, size: usize) {
        let half = size / 2;
        let fwd: Arc<dyn Fft<f64>> = self.planner.plan_fft_forward(size);
        let inv: Arc<dyn Fft<f64>> = self.planner.plan_fft_inverse(size);
        let scale = 1.0 / size as f64;
        for i in 0..self.n {
            let kernel = self.kernel(self.group[i], size);
            let mut buf: Vec<Complex64> = (0..size)
                .map(|p| {
                    let j = lo + p;
                    let v = if p < half && j <= self.steps { self.g[i][j] } else { 0.0 };
                    Complex64::new(v, 0.0)
                })
                .collect();
            fwd.process(&mut buf);
            for (b, k) in buf.iter_mut().zip(kernel.iter()) {
                *b *= k;
            }
            inv.process(&mut buf);
            for (q, b) in buf.iter().enumerate().skip(half) {
                let target = lo + q;
                if target > self.steps {
                    break;
                }
                self.hist[i][target] += b.re * scale;
            }
        }
    }

    fn direct_block(&mut self, lo: usize, hi: usize, observer: &mut Observer<'_>) -> Result<()> {
        for k in lo..hi.min(self.steps + 1) {
            for i in 0..self.n {
                let w = &self.weights[self.group[i]].a;
                let s: f64 = (lo..k).map(|j| w[k - j] * self.g[i][j]).sum();
                self.hist[i][k] += s;
            }
            self.step(k, observer)?;
        }
        Ok(())
    }

    fn solve_range(&mut self, lo: usize, size: usize, observer: &mut Observer<'_>) -> Result<()> {
        if lo > self.steps {
            return Ok(());
        }
        if size <= BASE_BLOCK {
            return self.direct_block(lo, lo + size, observer);
        }
        let half = size / 2;
        self.solve_range(lo, half, observer)?;
        if lo + half <= self.steps {
            self.convolve_block(lo, size);
        }
        self.solve_range(lo + half, half, observer)
    }

    fn run(&mut self, method: HistoryMethod, observer: &mut Observer<'_>) -> Result<()> {
        let x0 = self.p.x0.clone();
        self.store_g(0, 0.0, &x0);
        observer(0, 0.0, &x0);
        if self.steps == 0 {
            return Ok(());
        }
        match method {
            HistoryMethod::Direct => self.direct_block(1, self.steps + 1, observer),
            HistoryMethod::Fft => {
                let size = self.steps.next_power_of_two();
                self.solve_range(1, size, observer)
            }
        }
    }
}

/// Integrate on the uniform grid `t_k = k h`, calling `observer` for every
/// step. Returns the steps where Newton hit its iteration cap.
pub fn solve_with_observer(problem: &Problem, method: HistoryMethod, observer: &mut Observer<'_>) -> Result<Vec<usize>> {
    problem.validate()?;
    let mut solver = Solver::new(problem);
    solver.run(method, observer)?;
    Ok(solver.failures)
}

/// Integrate and keep the samples selected by `thinning` (the first and
/// last steps are always kept).
pub fn solve_pi_trapezoidal_with(problem: &Problem, thinning: Thinning, method: HistoryMethod) -> Result<Trajectory> {
    let steps = problem.steps();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut next_log = problem.h;
    let factor = match thinning {
        Thinning::Log(per_decade) => 10f64.powf(1.0 / per_decade.max(1) as f64),
        _ => 1.0,
    };
    let failures = solve_with_observer(problem, method, &mut |k, t, y| {
        let keep = k == 0
            || k == steps
            || match thinning {
                Thinning::All => true,
                Thinning::Every(m) => k % m.max(1) == 0,
                Thinning::Log(_) => {
                    if t >= next_log * (1.0 - 1e-12) {
                        next_log = (next_log * factor).max(t + problem.h * 0.5);
                        true
                    } else {
                        false
                    }
                }
            };
        if keep {
            times.push(t);
            states.push(y.to_vec());
        }
    })?;
    Ok(Trajectory {
        times,
        states,
        newton_failures: failures,
        steps,
    })
}

pub fn solve_pi_trapezoidal(problem: &Problem) -> Result<Trajectory> {
    solve_pi_trapezoidal_with(problem, Thinning::All, HistoryMethod::Fft)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    /// Positive when `||x(t)||` decays like `t^{-exponent}`.
    pub exponent: f64,
    pub window: (f64, f64),
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares slope of `ln ||x||` against `ln t` for `t >= t_lo`.
pub fn estimate_decay(traj: &Trajectory, t_lo: f64) -> Result<DecayEstimate> {
    estimate_decay_from(&traj.times, &traj.norms(), t_lo)
}

pub fn estimate_decay_from(times: &[f64], norms: &[f64], t_lo: f64) -> Result<DecayEstimate> {
    if !(t_lo >= 1.0) {
        return Err(Error::InsufficientTail { t_lo });
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(&t, &v)| t >= t_lo && v > 0.0 && v.is_finite())
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .collect();
    let t_hi = pts.last().map(|p| p.0.exp()).unwrap_or(t_lo);
    if pts.len() < 3 || t_hi <= t_lo {
        return Err(Error::InsufficientTail { t_lo });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayEstimate {
        exponent: -slope,
        window: (t_lo, t_hi),
        residual,
        samples: pts.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlSample {
    pub radius: f64,
    pub x0: Vec<f64>,
    /// `sup_{t in [0, 1]} ||x(t)||`.
    pub sup_early: f64,
    /// `sup_{t >= 1} t^nu ||x(t)||`.
    pub sup_weighted: f64,
    /// Maximum of `t^nu ||x(t)||` on each decade `[10^k, 10^{k+1})`, `k >= 0`.
    pub weighted_by_decade: Vec<f64>,
    pub final_norm: f64,
    pub blew_up: bool,
    pub newton_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlReport {
    pub nu: f64,
    pub t_final: f64,
    pub samples: Vec<MlSample>,
}

impl MlReport {
    pub fn any_blow_up(&self) -> bool {
        self.samples.iter().any(|s| s.blew_up)
    }
}

/// Norms above this count as blow-up.
pub const BLOW_UP_NORM: f64 = 1e12;

/// Simulate from `per_radius` random initial states on each sphere
/// `||x0|| = r` and record the weighted suprema used to judge
/// Mittag-Leffler stability with rate `nu`. Samples run in parallel and are
/// reproducible for a fixed `seed`.
pub fn check_ml_stability(
    template: &Problem,
    radii: &[f64],
    per_radius: usize,
    nu: f64,
    seed: u64,
) -> Result<MlReport> {
    template.validate()?;
    let n = template.n();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut starts = Vec::new();
    for &r in radii {
        for _ in 0..per_radius {
            let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let len = norm2(&dir);
            let x0 = if r == 0.0 || len == 0.0 {
                vec![0.0; n]
            } else {
                dir.iter().map(|v| v * r / len).collect()
            };
            starts.push((r, x0));
        }
    }
    let samples = starts
        .into_par_iter()
        .map(|(radius, x0)| ml_sample(template, radius, x0, nu))
        .collect::<Result<Vec<_>>>()?;
    Ok(MlReport {
        nu,
        t_final: template.t_final,
        samples,
    })
}

fn ml_sample(template: &Problem, radius: f64, x0: Vec<f64>, nu: f64) -> Result<MlSample> {
    let mut problem = template.clone();
    problem.x0 = x0.clone();
    let mut sup_early: f64 = 0.0;
    let mut sup_weighted: f64 = 0.0;
    let mut by_decade: Vec<f64> = Vec::new();
    let mut final_norm = 0.0;
    let mut blew_up = false;
    let result = solve_with_observer(&problem, HistoryMethod::Fft, &mut |_, t, y| {
        let v = norm2(y);
        if !v.is_finite() || v > BLOW_UP_NORM {
            blew_up = true;
        }
        if t <= 1.0 {
            sup_early = sup_early.max(v);
        }
        if t >= 1.0 {
            let w = t.powf(nu) * v;
            sup_weighted = sup_weighted.max(w);
            let decade = t.log10().floor() as usize;
            if by_decade.len() <= decade {
                by_decade.resize(decade + 1, 0.0);
            }
            by_decade[decade] = by_decade[decade].max(w);
        }
        final_norm = v;
    });
    let newton_failures = match result {
        Ok(f) => f.len(),
        Err(Error::NewtonDivergence { .. }) => {
            blew_up = true;
            0
        }
        Err(e) => return Err(e),
    };
    Ok(MlSample {
        radius,
        x0,
        sup_early,
        sup_weighted,
        weighted_by_decade: by_decade,
        final_norm,
        blew_up,
        newton_failures,
    })
}

/// CSV with header `t,x1,...,xn` and 17 significant digits.
pub fn write_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    let n = traj.states.first().map_or(0, |s| s.len());
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        write!(out, "{t:.16e}")?;
        for v in x {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
