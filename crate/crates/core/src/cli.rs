//! Command-line front end. [`run`] is the whole program minus process exit.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approx::{rational_approximation, verify_approximation_detailed, ApproxConstants, Verification, VerifyGrid};
use crate::charpoly::Limits;
use crate::error::Error;
use crate::general::{analyze_general, default_eps, lambda_min_sym, GeneralVerdict};
use crate::problem::{parse_problem, ProblemFile};
use crate::pseudospectrum::{
    gershgorin_prescreen, gershgorin_regions, sigma_min_grid, write_grid_csv, GershgorinRegion, Grid, RegionNorm,
};
use crate::simulate::{estimate_decay, solve_pi_trapezoidal_with, write_csv, DecayEstimate, HistoryMethod, Thinning};
use crate::spectrum::{analyze_rational_with, StabilityReport, Verdict, DEFAULT_TOL};

pub const EXIT_STABLE: i32 = 0;
pub const EXIT_UNSTABLE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(name = "fracstab", version, about = "Stability of incommensurate fractional-order linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide stability. Exact orders use the companion test, real orders
    /// go through a rational approximation first.
    Analyze(AnalyzeArgs),
    /// Compute the approximation constants and rational orders.
    Approx(ApproxArgs),
    /// Integrate the system with the product-integration trapezoidal rule.
    Simulate(SimulateArgs),
    /// Gershgorin-type regions and an optional sigma_min sweep.
    Gershgorin(GershgorinArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Problem file (JSON).
    file: PathBuf,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Leave the version/thread metadata out of JSON output.
    #[arg(long)]
    no_meta: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Relative tolerance of the sector test.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Approximation accuracy for real orders (default: h0 rounded down).
    #[arg(long)]
    eps: Option<f64>,
    /// Print every root of the companion polynomial.
    #[arg(long)]
    roots: bool,
    /// Largest companion degree accepted.
    #[arg(long, default_value_t = Limits::default().max_degree)]
    max_degree: usize,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    eps: Option<f64>,
    /// Also run the grid check of the approximation conditions.
    #[arg(long)]
    verify: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Final time (overrides the file).
    #[arg(long)]
    t_final: Option<f64>,
    /// Step size (overrides the file).
    #[arg(long)]
    h: Option<f64>,
    /// Trajectory CSV destination; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Which steps to keep: all, every:N or log:K (K points per decade).
    #[arg(long, default_value = "all", value_parser = parse_thinning)]
    thin: Thinning,
    /// Fit a decay exponent on t >= T_LO.
    #[arg(long, value_name = "T_LO")]
    decay: Option<f64>,
    /// Use the direct O(N^2) history sum.
    #[arg(long)]
    direct: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    Two,
    Inf,
}

#[derive(Args, Debug)]
struct GershgorinArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = NormArg::Two)]
    norm: NormArg,
    /// Write sigma_min on the rectangle RE0:RE1,IM0:IM1 as CSV.
    #[arg(long, value_name = "RE0:RE1,IM0:IM1", value_parser = parse_rect, allow_hyphen_values = true)]
    sweep: Option<((f64, f64), (f64, f64))>,
    #[arg(long, default_value_t = 101)]
    nx: usize,
    #[arg(long, default_value_t = 101)]
    ny: usize,
    /// Sweep CSV destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_thinning(s: &str) -> Result<Thinning, String> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let count = || {
        arg.parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| format!("expected a positive count after '{kind}:'"))
    };
    match kind {
        "all" if arg.is_empty() => Ok(Thinning::All),
        "every" => Ok(Thinning::Every(count()?)),
        "log" if arg.is_empty() => Ok(Thinning::Log(50)),
        "log" => Ok(Thinning::Log(count()?)),
        _ => Err(format!("unknown thinning '{s}' (all, every:N, log:K)")),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("bad range '{s}'"));
    }
    Ok((lo, hi))
}

fn parse_rect(s: &str) -> Result<((f64, f64), (f64, f64)), String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE0:RE1,IM0:IM1, got '{s}'"))?;
    Ok((parse_range(re)?, parse_range(im)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub threads: usize,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// JSON output of `analyze`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    pub verdict: GeneralVerdict,
    /// `rational` or `general`.
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general: Option<GeneralSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<StabilityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralSummary {
    pub lambda_min: f64,
    pub h0: f64,
    pub eps: Option<f64>,
    pub beta: Vec<String>,
    pub constants: Option<ConstantsOut>,
}

/// [`ApproxConstants`] with non-finite values as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsOut {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub ln_rho: f64,
    pub log10_rho: f64,
    pub delta1: Option<f64>,
    pub delta2: f64,
    pub delta3: f64,
    pub delta3_raw: f64,
    pub delta: f64,
    pub eps: f64,
}

impl From<&ApproxConstants> for ConstantsOut {
    fn from(c: &ApproxConstants) -> Self {
        ConstantsOut {
            a: c.a,
            b: c.b,
            c: c.c,
            r: c.r,
            ln_rho: c.ln_rho,
            log10_rho: c.log10_rho(),
            delta1: c.delta1.is_finite().then_some(c.delta1),
            delta2: c.delta2,
            delta3: c.delta3,
            delta3_raw: c.delta3_raw,
            delta: c.delta,
            eps: c.eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxOutput {
    pub eps: f64,
    pub beta: Vec<String>,
    pub constants: ConstantsOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub steps: usize,
    pub samples: usize,
    pub t_final: f64,
    pub final_state: Vec<f64>,
    pub final_norm: f64,
    pub newton_failures: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GershgorinOutput {
    pub norm: RegionNorm,
    pub eps: f64,
    pub regions: Vec<GershgorinRegion>,
    /// `stable` when every row is strictly diagonally dominant with a
    /// negative diagonal, otherwise absent.
    pub prescreen: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Usage(String),
    NoInput(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::EmptyOrders
        | Error::NonRationalOrder { .. }
        | Error::OrderOutOfRange { .. }
        | Error::NotSquare { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::InvalidEpsilon(_)
        | Error::InvalidProblem(_) => EXIT_USAGE,
        Error::TooManyStates { .. }
        | Error::DegreeTooLarge { .. }
        | Error::SingularMatrix
        | Error::HypothesisFailed { .. }
        | Error::InsufficientTail { .. } => EXIT_DATA,
        Error::NonMonic
        | Error::ZeroDegree
        | Error::ConvergenceFailure { .. }
        | Error::NewtonDivergence { .. } => EXIT_SOFTWARE,
    }
}

fn verdict_code(v: GeneralVerdict) -> i32 {
    match v {
        GeneralVerdict::Stable => EXIT_STABLE,
        GeneralVerdict::Unstable => EXIT_UNSTABLE,
        GeneralVerdict::Marginal | GeneralVerdict::Inapplicable => EXIT_INCONCLUSIVE,
    }
}

/// Cap rayon's global pool from `FRACSTAB_THREADS` if set.
fn configure_threads() {
    if let Some(n) = std::env::var("FRACSTAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn meta(no_meta: bool) -> Option<Meta> {
    (!no_meta).then(|| Meta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads: rayon::current_num_threads(),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    })
}

fn load(path: &Path) -> Result<ProblemFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::NoInput(format!("{}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| match e {
        Error::Parse(msg) => Failure::Lib(Error::Parse(format!("{}: {msg}", path.display()))),
        other => Failure::Lib(other),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Failure::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn verdict_name(v: GeneralVerdict) -> &'static str {
    match v {
        GeneralVerdict::Stable => "stable",
        GeneralVerdict::Unstable => "unstable",
        GeneralVerdict::Marginal => "marginal",
        GeneralVerdict::Inapplicable => "inapplicable",
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im >= 0.0 {
        format!("{:.10} + {:.10}i", z.re, z.im)
    } else {
        format!("{:.10} - {:.10}i", z.re, -z.im)
    }
}

fn print_report(out: &mut dyn Write, r: &StabilityReport, roots: bool) -> io::Result<()> {
    writeln!(out, "gamma: {}", r.gamma)?;
    writeln!(out, "degree: {}", r.degree)?;
    writeln!(out, "half-angle gamma*pi/2: {:.6}", r.half_angle)?;
    writeln!(out, "min |arg lambda|: {:.6}", r.min_abs_arg)?;
    writeln!(out, "margin: {:.6}", r.margin)?;
    if let Some(z) = r.critical_root {
        writeln!(out, "critical root: {}", fmt_complex(z))?;
    }
    if r.zero_root {
        writeln!(out, "zero root: yes")?;
    }
    if roots {
        writeln!(out, "roots:")?;
        for (z, a) in r.roots.iter().zip(&r.abs_args) {
            writeln!(out, "  {}  |arg| = {:.6}", fmt_complex(*z), a)?;
        }
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = load(&args.common.file)?;
    let spec = &file.system;
    let limits = Limits {
        max_degree: args.max_degree,
        ..Limits::default()
    };
    let output = if spec.orders().is_exact() {
        let report = analyze_rational_with(spec, args.tol, limits)?;
        AnalyzeOutput {
            verdict: report.verdict.into(),
            method: "rational".into(),
            general: None,
            report: Some(report),
            meta: meta(args.common.no_meta),
        }
    } else {
        let g = analyze_general(spec, args.eps, args.tol)?;
        AnalyzeOutput {
            verdict: g.verdict,
            method: "general".into(),
            general: Some(GeneralSummary {
                lambda_min: g.lambda_min,
                h0: g.h0,
                eps: g.eps,
                beta: g
                    .approx
                    .as_ref()
                    .map(|a| a.beta_rationals().iter().map(ToString::to_string).collect())
                    .unwrap_or_default(),
                constants: g.approx.as_ref().map(|a| (&a.constants).into()),
            }),
            report: g.rational_report,
            meta: meta(args.common.no_meta),
        }
    };
    if args.common.json {
        write_json(out, &output)?;
    } else {
        writeln!(out, "verdict: {}", verdict_name(output.verdict))?;
        writeln!(out, "method: {}", output.method)?;
        if let Some(g) = &output.general {
            writeln!(out, "lambda_min: {:.6}", g.lambda_min)?;
            writeln!(out, "h0: {:.6}", g.h0)?;
            if let Some(eps) = g.eps {
                writeln!(out, "eps: {eps}")?;
                writeln!(out, "beta: [{}]", g.beta.join(", "))?;
            } else {
                writeln!(out, "lambda_min(-(A + A^T)) is not positive; no rational approximation is available")?;
            }
        }
        if let Some(r) = &output.report {
            print_report(out, r, args.roots)?;
        }
    }
    Ok(verdict_code(output.verdict))
}

fn cmd_approx(args: &ApproxArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = load(&args.common.file)?;
    let spec = &file.system;
    let eps = match args.eps {
        Some(e) => e,
        None => {
            let lambda_min = lambda_min_sym(spec.a_f64());
            if lambda_min <= 0.0 {
                return Err(Failure::Usage(format!(
                    "lambda_min(-(A + A^T)) = {lambda_min:.6} is not positive; pass --eps explicitly"
                )));
            }
            default_eps(lambda_min / 2.0)
        }
    };
    let approx = rational_approximation(spec.matrix(), spec.orders(), eps)?;
    let c = &approx.constants;
    let verification = args.verify.then(|| {
        verify_approximation_detailed(
            spec.a_f64(),
            &spec.orders().values(),
            &approx.beta.values(),
            eps,
            c.r,
            c.ln_rho,
            VerifyGrid::default(),
        )
    });
    let output = ApproxOutput {
        eps,
        beta: approx.beta_rationals().iter().map(ToString::to_string).collect(),
        constants: c.into(),
        verification,
        meta: meta(args.common.no_meta),
    };
    if args.common.json {
        write_json(out, &output)?;
    } else {
        let k = &output.constants;
        writeln!(out, "eps: {eps}")?;
        writeln!(out, "a: {:.6}  b: {:.6}  c: {:.6}", k.a, k.b, k.c)?;
        writeln!(out, "R: {:.6}", k.r)?;
        writeln!(out, "log10 rho: {:.4}", k.log10_rho)?;
        match k.delta1 {
            Some(d) => writeln!(out, "delta1: {d:.6e}")?,
            None => writeln!(out, "delta1: inf")?,
        }
        writeln!(out, "delta2: {:.6e}", k.delta2)?;
        writeln!(out, "delta3: {:.6e}", k.delta3)?;
        writeln!(out, "delta: {:.6e}", k.delta)?;
        writeln!(out, "beta: [{}]", output.beta.join(", "))?;
        if let Some(v) = &output.verification {
            writeln!(
                out,
                "verification: {} (ordering {}, outer {}, inner {}, annulus {}, max gap {:.3e})",
                if v.passed() { "passed" } else { "failed" },
                v.ordering,
                v.outer,
                v.inner,
                v.annulus,
                v.max_gap
            )?;
        }
    }
    Ok(match &output.verification {
        Some(v) if !v.passed() => EXIT_DATA,
        _ => EXIT_STABLE,
    })
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let file = load(&args.common.file)?;
    let problem = file.problem(args.t_final, args.h)?;
    let method = if args.direct {
        HistoryMethod::Direct
    } else {
        HistoryMethod::Fft
    };
    let traj = solve_pi_trapezoidal_with(&problem, args.thin, method)?;
    let decay = args.decay.map(|t_lo| estimate_decay(&traj, t_lo)).transpose()?;
    let last = traj.states.last().cloned().unwrap_or_default();
    let summary = SimulateOutput {
        steps: traj.steps,
        samples: traj.len(),
        t_final: traj.times.last().copied().unwrap_or(0.0),
        final_norm: crate::simulate::norm2(&last),
        final_state: last,
        newton_failures: traj.newton_failures.clone(),
        decay,
        meta: meta(args.common.no_meta),
    };
    // Without --out the CSV owns stdout and the summary goes to stderr.
    let summary_sink: &mut dyn Write = match &args.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| Failure::NoInput(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            write_csv(&traj, &mut w)?;
            w.flush()?;
            out
        }
        None => {
            write_csv(&traj, &mut *out)?;
            err
        }
    };
    if args.common.json {
        write_json(summary_sink, &summary)?;
    } else {
        writeln!(summary_sink, "steps: {}", summary.steps)?;
        writeln!(summary_sink, "t_final: {}", summary.t_final)?;
        writeln!(summary_sink, "final |x|: {:.6e}", summary.final_norm)?;
        if !summary.newton_failures.is_empty() {
            writeln!(summary_sink, "Newton failures: {} steps", summary.newton_failures.len())?;
        }
        if let Some(d) = &summary.decay {
            writeln!(
                summary_sink,
                "decay exponent: {:.4} on [{}, {}] ({} samples)",
                d.exponent, d.window.0, d.window.1, d.samples
            )?;
        }
    }
    Ok(EXIT_STABLE)
}

fn cmd_gershgorin(args: &GershgorinArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = load(&args.common.file)?;
    let a = file.system.a_f64();
    let alphas = file.system.orders().values();
    if !(args.eps.is_finite() && args.eps >= 0.0) {
        return Err(Failure::Usage(format!("--eps must be a finite number >= 0, got {}", args.eps)));
    }
    let norm = match args.norm {
        NormArg::Two => RegionNorm::Two,
        NormArg::Inf => RegionNorm::Infinity,
    };
    let output = GershgorinOutput {
        norm,
        eps: args.eps,
        regions: gershgorin_regions(a, &alphas, args.eps, norm),
        prescreen: gershgorin_prescreen(a),
        meta: meta(args.common.no_meta),
    };
    if let Some((re, im)) = args.sweep {
        if args.nx == 0 || args.ny == 0 {
            return Err(Failure::Usage("--nx and --ny must be positive".into()));
        }
        let points = sigma_min_grid(
            a,
            &alphas,
            &Grid {
                re,
                im,
                nx: args.nx,
                ny: args.ny,
            },
        );
        match &args.out {
            Some(path) => {
                let f = File::create(path).map_err(|e| Failure::NoInput(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(f);
                write_grid_csv(&points, &mut w)?;
                w.flush()?;
            }
            None => {
                write_grid_csv(&points, &mut *out)?;
                return Ok(prescreen_code(output.prescreen));
            }
        }
    }
    if args.common.json {
        write_json(out, &output)?;
    } else {
        for r in &output.regions {
            writeln!(
                out,
                "region {}: |{} - z^{:.6}| <= {:.6}",
                r.index + 1,
                r.center,
                r.order,
                r.radius
            )?;
        }
        match output.prescreen {
            Some(Verdict::Stable) => writeln!(out, "prescreen: stable (strictly diagonally dominant, negative diagonal)")?,
            _ => writeln!(out, "prescreen: inconclusive")?,
        }
    }
    Ok(prescreen_code(output.prescreen))
}

fn prescreen_code(v: Option<Verdict>) -> i32 {
    match v {
        Some(Verdict::Stable) => EXIT_STABLE,
        _ => EXIT_INCONCLUSIVE,
    }
}

/// Run the program on `args` (including the program name) and return the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_STABLE };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Approx(a) => cmd_approx(a, out),
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Gershgorin(a) => cmd_gershgorin(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Lib(e) => (exit_code(&e), e.to_string()),
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::NoInput(m) => (EXIT_NO_INPUT, m),
                Failure::Io(e) if e.kind() == io::ErrorKind::BrokenPipe => return EXIT_STABLE,
                Failure::Io(e) => (EXIT_IO, e.to_string()),
            };
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_values() {
        assert_eq!(parse_thinning("all"), Ok(Thinning::All));
        assert_eq!(parse_thinning("every:5"), Ok(Thinning::Every(5)));
        assert_eq!(parse_thinning("log"), Ok(Thinning::Log(50)));
        assert_eq!(parse_thinning("log:20"), Ok(Thinning::Log(20)));
        assert!(parse_thinning("every:0").is_err());
        assert!(parse_thinning("sometimes").is_err());
    }

    #[test]
    fn rect_values() {
        assert_eq!(parse_rect("-1:1,0:2"), Ok(((-1.0, 1.0), (0.0, 2.0))));
        assert!(parse_rect("1:-1,0:2").is_err());
        assert!(parse_rect("0:1").is_err());
    }

    #[test]
    fn usage_errors_exit_64() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["fracstab", "frobnicate"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run(["fracstab", "--help"], &mut o, &mut e), EXIT_STABLE);
    }
}
