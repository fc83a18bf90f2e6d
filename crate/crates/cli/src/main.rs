//! `wolffkit`: potentials, capacities and Lane-Emden iterations from the
//! command line. Output is CSV; summary lines start with `#`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or parameter error,
//! 3 data, parse or I/O error.

mod presets;
mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use wolffkit::capacity::{
    capacity_ball, capacity_variational, capacity_zero_test, point_capacity_positive, CapacityCache, CapacityParams, VariationalOptions,
    CACHE_ENV,
};
use wolffkit::measure::{BallMassIndex, DiscreteMeasure, Region};
use wolffkit::par::{self, Execution};
use wolffkit::potential::{riesz_params, wolff_field, BoxDomain, Lattice, PotentialParams, QuadratureRule, Truncation, WolffEvaluator};
use wolffkit::suite::run_suite;
use wolffkit::system::{liouville_check, parse_run_config, picard_iterate, solution_bounds, subcritical_check, Operator};
use wolffkit::{Error, Result};

/// A comma-separated point such as `2,0,0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad coordinate {t:?} in {s:?}"))).collect::<std::result::Result<_, _>>().map(Point)
    }
}

/// CSV text and whether the command's check passed.
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

#[derive(Parser)]
#[command(name = "wolffkit", version, about = "Wolff and Riesz potentials, capacities and Lane-Emden iterations")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Wolff potential W_{α,β}[μ] at points or on a lattice.
    EvalWolff(WolffArgs),
    /// Riesz potential I_α[μ] in radial form.
    EvalRiesz(RieszArgs),
    /// μ(B̄_r(x)) for every point and radius.
    BallMass(BallMassArgs),
    /// Capacities of balls and boxes, and the null-set tests.
    #[command(subcommand)]
    Capacity(CapacityCmd),
    /// Liouville region of the Lane-Emden system.
    CheckLiouville(LiouvilleArgs),
    /// Subcritical range of q1 for small-data existence.
    CheckSubcritical(SubcriticalArgs),
    /// Picard iteration of a Lane-Emden system from a configuration file or preset.
    Iterate(IterateArgs),
    /// Numerical checks of the potential inequalities.
    #[command(subcommand)]
    Verify(verify::Verify),
    /// The acceptance battery; CSV on stdout, timings on stderr.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct FieldArgs {
    /// Measure file or preset name.
    #[arg(long)]
    measure: String,
    #[arg(long = "N")]
    dim: usize,
    /// Evaluation point; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<Point>,
    /// Truncation radius R.
    #[arg(long = "R")]
    r: Option<f64>,
    /// Distance-adapted truncation δ d(x) on the box --lo/--hi.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<Point>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<Point>,
    /// Evaluate on a cell-centered lattice over --lo/--hi with this many nodes along the longest side.
    #[arg(long)]
    grid: Option<usize>,
    /// Radial quadrature nodes.
    #[arg(long, default_value_t = 512)]
    nodes: usize,
}

impl FieldArgs {
    fn domain(&self) -> Result<Option<BoxDomain>> {
        match (&self.lo, &self.hi) {
            (Some(lo), Some(hi)) => BoxDomain::new(lo.0.clone(), hi.0.clone()).map(Some),
            (None, None) => Ok(None),
            _ => Err(Error::Parameter("--lo and --hi go together".into())),
        }
    }

    fn truncation(&self) -> Result<Truncation> {
        match (self.r, self.delta) {
            (Some(_), Some(_)) => Err(Error::Parameter("give either --R or --delta".into())),
            (Some(r), None) => Ok(Truncation::Radius(r)),
            (None, Some(delta)) => match self.domain()? {
                Some(domain) => Ok(Truncation::DistanceAdapted { delta, domain }),
                None => Err(Error::Parameter("--delta needs the box --lo/--hi".into())),
            },
            (None, None) => Ok(Truncation::Full),
        }
    }

    fn evaluate(&self, p: &PotentialParams, column: &str) -> Result<String> {
        let m = presets::interior_measure(&self.measure, self.dim)?;
        let q = QuadratureRule::with_nodes(self.nodes);
        if let Some(n) = self.grid {
            let b = self.domain()?.ok_or_else(|| Error::Parameter("--grid needs --lo and --hi".into()))?;
            return Ok(wolff_field(&m, p, &q, &Lattice::covering(&b, n)?)?.to_csv());
        }
        if self.at.is_empty() {
            return Err(Error::Parameter("give --at points or --grid".into()));
        }
        let ev = WolffEvaluator::new(&m, p, &q)?;
        if let Truncation::DistanceAdapted { domain, .. } = &p.truncation {
            if let Some(x) = self.at.iter().find(|x| !domain.contains(&x.0)) {
                return Err(Error::Domain(format!("point {:?} lies outside the domain", x.0)));
            }
        }
        let values = par::try_map_indexed(Execution::Parallel, self.at.len(), |i| ev.eval(&self.at[i].0))?;
        let mut s = coords_header(self.dim);
        let _ = writeln!(s, ",{column}");
        for (x, v) in self.at.iter().zip(values) {
            let _ = writeln!(s, "{},{v}", join(&x.0));
        }
        Ok(s)
    }
}

#[derive(Args)]
struct WolffArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[command(flatten)]
    field: FieldArgs,
}

#[derive(Args)]
struct RieszArgs {
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    field: FieldArgs,
}

#[derive(Args)]
struct BallMassArgs {
    #[arg(long)]
    measure: String,
    #[arg(long = "N")]
    dim: usize,
    #[arg(long, allow_hyphen_values = true, required = true)]
    at: Vec<Point>,
    /// Radius; repeatable.
    #[arg(long, required = true)]
    r: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Riesz,
    Bessel,
    Weighted,
}

#[derive(Args)]
struct KindArgs {
    #[arg(long, value_enum, default_value = "riesz")]
    kind: Kind,
    /// Kernel order A.
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    s: f64,
    #[arg(long = "N")]
    dim: usize,
    /// Truncation scale of the Bessel kind.
    #[arg(long, default_value_t = 1.0)]
    bessel_scale: f64,
}

impl KindArgs {
    fn params(&self) -> CapacityParams {
        match self.kind {
            Kind::Riesz => CapacityParams::riesz(self.alpha, self.s),
            Kind::Bessel => CapacityParams::bessel(self.alpha, self.s).with_bessel_scale(self.bessel_scale),
            Kind::Weighted => CapacityParams::weighted_halfspace(self.alpha, self.s),
        }
    }
}

#[derive(Subcommand)]
enum CapacityCmd {
    /// Cap(B̄_ρ) by scaling a cached unit-ball solve.
    Ball(CapBallArgs),
    /// Direct variational solve for a ball or a box.
    Variational(CapVarArgs),
    /// Whether every compact set is null.
    ZeroTest(KindArgs),
    /// Whether points carry positive Bessel capacity.
    PointTest(KindArgs),
}

#[derive(Args)]
struct CapBallArgs {
    #[command(flatten)]
    kind: KindArgs,
    /// Radius; repeatable.
    #[arg(long, required = true)]
    rho: Vec<f64>,
    /// Grid spacing of the reference solve.
    #[arg(long, default_value_t = CapacityCache::DEFAULT_H)]
    h: f64,
    /// Cache file of reference solves (overridden by WOLFFKIT_CACHE).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct CapVarArgs {
    #[command(flatten)]
    kind: KindArgs,
    /// Ball as `c1,..,cN,radius`.
    #[arg(long, allow_hyphen_values = true)]
    ball: Option<Point>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<Point>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<Point>,
    #[arg(long, default_value_t = 0.0625)]
    h: f64,
    /// Source region around K relative to its half-extent.
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpName {
    PLaplace,
    KHessian,
}

#[derive(Args)]
struct OperatorArgs {
    #[arg(long, value_enum)]
    op: OpName,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
}

impl OperatorArgs {
    fn operator(&self) -> Result<Operator> {
        match (self.op, self.p, self.k) {
            (OpName::PLaplace, Some(p), _) => Ok(Operator::PLaplace(p)),
            (OpName::KHessian, _, Some(k)) => Ok(Operator::KHessian(k)),
            (OpName::PLaplace, None, _) => Err(Error::Parameter("p-laplace needs --p".into())),
            (OpName::KHessian, _, None) => Err(Error::Parameter("k-hessian needs --k".into())),
        }
    }
}

#[derive(Args)]
struct LiouvilleArgs {
    #[command(flatten)]
    op: OperatorArgs,
    #[arg(long, alias = "s1")]
    q1: f64,
    #[arg(long, alias = "s2")]
    q2: f64,
    #[arg(long = "N")]
    dim: usize,
}

#[derive(Args)]
struct SubcriticalArgs {
    #[command(flatten)]
    op: OperatorArgs,
    #[arg(long, alias = "s1")]
    q1: f64,
    #[arg(long = "N")]
    dim: usize,
    /// Whole space instead of a bounded domain.
    #[arg(long)]
    whole: bool,
}

#[derive(Args)]
struct IterateArgs {
    /// Configuration file or preset (picard-small, picard-large, picard-zero).
    config: String,
    /// Also write the final fields as CSV.
    #[arg(long)]
    fields: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Comma-separated criterion numbers; default all.
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
}

fn join(x: &[f64]) -> String {
    x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn coords_header(dim: usize) -> String {
    (1..=dim).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",")
}

fn cache(explicit: Option<&PathBuf>, h: f64) -> Result<CapacityCache> {
    match (std::env::var_os(CACHE_ENV), explicit) {
        (Some(_), _) => CapacityCache::from_env("", h),
        (None, Some(p)) => CapacityCache::with_file(p, h),
        (None, None) => Ok(CapacityCache::in_memory(h)),
    }
}

fn capacity(c: &CapacityCmd) -> Result<Outcome> {
    let mut s = String::new();
    match c {
        CapacityCmd::Ball(a) => {
            let p = a.kind.params();
            let cache = cache(a.cache.as_ref(), a.h)?;
            s.push_str("rho,capacity,reference,method\n");
            for &rho in &a.rho {
                let e = capacity_ball(&p, rho, a.kind.dim, &cache)?;
                let _ = writeln!(s, "{rho},{:e},{:e},{}", e.value, e.reference.unwrap_or(0.0), e.method.name());
            }
        }
        CapacityCmd::Variational(a) => {
            let n = a.kind.dim;
            let k = match (&a.ball, &a.lo, &a.hi) {
                (Some(b), None, None) if b.0.len() == n + 1 => Region::Ball { center: b.0[..n].to_vec(), radius: b.0[n] },
                (None, Some(lo), Some(hi)) => Region::Box { lo: lo.0.clone(), hi: hi.0.clone() },
                _ => return Err(Error::Parameter(format!("give --ball c1,..,c{n},radius or --lo and --hi"))),
            };
            let e = capacity_variational(&a.kind.params(), &k, n, &VariationalOptions::new(a.h).with_margin(a.margin))?;
            s.push_str("capacity,lower_bound,h,iterations,converged\n");
            let _ = writeln!(s, "{:e},{:e},{},{},{}", e.value, e.lower_bound.unwrap_or(0.0), a.h, e.iterations, e.converged);
        }
        CapacityCmd::ZeroTest(a) => {
            let _ = writeln!(s, "NULL: {}", capacity_zero_test(&a.params(), a.dim)?);
        }
        CapacityCmd::PointTest(a) => {
            let _ = writeln!(s, "POINT_CAPACITY_POSITIVE: {}", point_capacity_positive(&a.params(), a.dim)?);
        }
    }
    Ok(Outcome::ok(s))
}

fn iterate(a: &IterateArgs) -> Result<Outcome> {
    let (text, base) = presets::load_text(&a.config)?;
    let cfg = parse_run_config(&text, base.as_deref())?;
    let run = picard_iterate(&cfg.spec, &cfg.options)?;
    let mut s = run.to_csv();
    if run.residual.is_some() {
        let b = solution_bounds(&run, &run.constants);
        let _ = writeln!(s, "# bounds max_ratio_u={:e} max_ratio_v={:e} passed={}", b.max_ratio_u, b.max_ratio_v, b.passed());
    }
    if let Some(path) = &a.fields {
        std::fs::write(path, run.fields_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(Outcome::ok(s))
}

fn suite(a: &SuiteArgs, threads: usize) -> Result<Outcome> {
    let ids: Vec<usize> = if a.only.is_empty() { (1..=13).collect() } else { a.only.clone() };
    let report = run_suite(&ids, threads, |r| {
        eprintln!("# criterion {} {} {} {:.2}s {}", r.id, r.name, if r.passed { "pass" } else { "fail" }, r.timed, r.detail);
    })?;
    Ok(Outcome { text: report.to_csv(), ok: report.passed() })
}

fn run(cli: &Cli, threads: usize) -> Result<Outcome> {
    let flag = |name: &str, v: bool| Outcome::ok(format!("{name}: {v}\n"));
    match &cli.cmd {
        Cmd::EvalWolff(a) => {
            let p = PotentialParams { dim: a.field.dim, alpha: a.alpha, beta: a.beta, truncation: a.field.truncation()? };
            a.field.evaluate(&p, "wolff").map(Outcome::ok)
        }
        Cmd::EvalRiesz(a) => {
            let p = riesz_params(a.field.dim, a.alpha, a.field.truncation()?)?;
            a.field.evaluate(&p, "riesz").map(Outcome::ok)
        }
        Cmd::BallMass(a) => {
            let m: DiscreteMeasure = presets::interior_measure(&a.measure, a.dim)?;
            let index = BallMassIndex::new(&m);
            let mut s = coords_header(a.dim);
            s.push_str(",r,mass\n");
            for x in &a.at {
                for &r in &a.r {
                    let _ = writeln!(s, "{},{r},{}", join(&x.0), index.ball_mass(&x.0, r)?);
                }
            }
            Ok(Outcome::ok(s))
        }
        Cmd::Capacity(c) => capacity(c),
        Cmd::CheckLiouville(a) => Ok(flag("LIOUVILLE", liouville_check(a.op.operator()?, a.q1, a.q2, a.dim)?)),
        Cmd::CheckSubcritical(a) => Ok(flag("SUBCRITICAL", subcritical_check(a.op.operator()?, a.q1, a.dim, !a.whole)?)),
        Cmd::Iterate(a) => iterate(a),
        Cmd::Verify(v) => verify::run(v, &cache(None, CapacityCache::DEFAULT_H)?),
        Cmd::Suite(a) => suite(a, threads),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Domain(_) => 2,
        Error::Data(_) | Error::Parse { .. } | Error::Io(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = par::with_threads(threads, || run(&cli, threads));
    match result {
        Ok(out) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &out.text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
                None => std::io::stdout().write_all(out.text.as_bytes()).map_err(Error::from),
            };
            if let Err(e) = written {
                eprintln!("wolffkit: {e}");
                return ExitCode::from(3);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("wolffkit: check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("wolffkit: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
