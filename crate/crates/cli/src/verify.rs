//! `verify` subcommands: each prints the report CSV and says whether the
//! observed constants are finite and refinement-stable.

use crate::presets::{boundary_measure, interior_measure, load_text};
use crate::{Outcome, Point};
use clap::{Args, Subcommand, ValueEnum};
use std::fmt::Write as _;
use wolffkit::capacity::{CapacityCache, CapacityKind};
use wolffkit::halfspace::{
    boundary_capacity_equiv_check, riesz_compose_check, trace_condition_check, weighted_estimate_check, BoundaryCapSetup, HalfspaceMeasure,
    LelaSetup, TraceSetup, WeightedSetup,
};
use wolffkit::inequality::{
    combination_check, compose_lower_check, compose_truncated_check, compose_upper_check, hardy_check, CombinationSetup, ComposeSetup,
    HardyProbe, InequalityReport,
};
use wolffkit::measure::DiscreteMeasure;
use wolffkit::potential::{BoxDomain, Truncation};
use wolffkit::random::random_atoms;
use wolffkit::suite::compose_samples;
use wolffkit::{Error, Result};

/// Refinement drift tolerated by the checks.
const DRIFT: f64 = 2.0;

#[derive(Subcommand)]
pub enum Verify {
    /// Hardy-type inequality for a nondecreasing step function.
    Hardy(HardyArgs),
    /// Composite `W[(W μ)^q]` against the single potential (both directions).
    Compose(ComposeArgs),
    /// Truncated composition estimates (radius or distance-adapted).
    ComposeTrunc(ComposeTruncArgs),
    /// Triple composite against `W[ω]` under the capacitary hypothesis.
    Combination(CombinationArgs),
    /// `I_2[(I_1 ω)^{q1}]` against `W_{(q1+2)/(q1+1),(q1+1)/q1}[ω]` on the half-space.
    Lela(LelaArgs),
    /// Weighted half-space estimate with its capacitary hypothesis.
    Weighted(WeightedArgs),
    /// Weighted half-space capacity of `E × {0}` against the boundary Riesz capacity.
    BoundaryCap(BoundaryCapArgs),
    /// Trace conditions for boundary data.
    Trace(TraceArgs),
}

#[derive(Args)]
pub struct HardyArgs {
    /// Preset or file with `kappa`, `gamma`, `theta`, `R` and the constant `value` of h.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    /// Constant value of h.
    #[arg(long)]
    value: Option<f64>,
}

#[derive(Args)]
pub struct ComposeCommon {
    /// Measure file or preset; defaults to a seeded 5-atom measure in the unit cube.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 18)]
    field_n: usize,
    #[arg(long, default_value_t = 512)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Sample points; defaults to `{1/4, 3/4}^3`.
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<Point>,
}

impl ComposeCommon {
    fn measure(&self) -> Result<DiscreteMeasure> {
        match &self.measure {
            Some(m) => interior_measure(m, 3),
            None => random_atoms(self.seed, 5, 3),
        }
    }

    fn samples(&self) -> Vec<Vec<f64>> {
        if self.at.is_empty() {
            compose_samples()
        } else {
            self.at.iter().map(|p| p.0.clone()).collect()
        }
    }

    fn setup(&self, radius: Option<f64>) -> ComposeSetup {
        ComposeSetup { radius, field_n: self.field_n, nodes: self.nodes, levels: self.levels, ..ComposeSetup::unit_box(self.alpha, self.beta, self.q) }
    }
}

#[derive(Args)]
pub struct ComposeArgs {
    #[command(flatten)]
    common: ComposeCommon,
    /// Truncation radius R.
    #[arg(long = "R", default_value_t = 1.0)]
    r: f64,
    /// Use whole-space potentials instead of W^R.
    #[arg(long)]
    whole: bool,
}

#[derive(Args)]
pub struct ComposeTruncArgs {
    #[command(flatten)]
    common: ComposeCommon,
    /// Distance-adapted truncation δ d(x) on the unit cube; otherwise a radius.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "R", default_value_t = 1.0)]
    r: f64,
}

#[derive(Args)]
pub struct CombinationArgs {
    #[arg(long, default_value = "zero")]
    mu: String,
    #[arg(long, default_value = "small-dirac.msr")]
    eta: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    /// Local radius R; omit with --whole for whole-space potentials.
    #[arg(long = "R", default_value_t = 0.5)]
    r: f64,
    #[arg(long)]
    whole: bool,
    /// Hypothesis constant M.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    #[arg(long, default_value_t = 16)]
    field_n: usize,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<Point>,
}

#[derive(Args)]
pub struct HalfspaceData {
    /// Boundary measure (header `boundary`, N-1 coordinates) or `zero`.
    #[arg(long, default_value = "boundary-dirac.msr")]
    boundary: String,
    /// Interior measure in R^N (x_N > 0) or `zero`.
    #[arg(long, default_value = "zero")]
    interior: String,
    /// Multiplies the data.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

impl HalfspaceData {
    fn measure(&self, dim: usize) -> Result<HalfspaceMeasure> {
        let b = boundary_measure(&self.boundary, dim)?.scale(self.scale)?;
        let i = interior_measure(&self.interior, dim)?.scale(self.scale)?;
        HalfspaceMeasure::new(i, b)
    }
}

#[derive(Args)]
pub struct LelaArgs {
    #[command(flatten)]
    data: HalfspaceData,
    #[arg(long, default_value_t = 1.25)]
    q1: f64,
    #[arg(long, default_value_t = 32)]
    field_n: usize,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Sample points in x_N > 0; defaults to r(0.6, 0, 0.8) for r = 1/2, 1, 2, 4.
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<Point>,
}

#[derive(Args)]
pub struct WeightedArgs {
    #[command(flatten)]
    data: HalfspaceData,
    #[arg(long, default_value_t = 1.25)]
    q1: f64,
    #[arg(long, default_value_t = 6.0)]
    q2: f64,
    #[arg(long, default_value_t = 32)]
    field_n: usize,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Hypothesis constant.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<Point>,
}

#[derive(Args)]
pub struct BoundaryCapArgs {
    /// Corner of E in R^{N-1}.
    #[arg(long, allow_hyphen_values = true, default_value = "-0.5,-0.5")]
    lo: Point,
    #[arg(long, allow_hyphen_values = true, default_value = "0.5,0.5")]
    hi: Point,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    #[arg(long, default_value_t = 0.0625)]
    h: f64,
    #[arg(long, default_value_t = 1)]
    levels: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BoundaryKind {
    Riesz,
    Bessel,
}

#[derive(Args)]
pub struct TraceArgs {
    /// Boundary datum of the first equation.
    #[arg(long, default_value = "zero")]
    sigma1: String,
    /// Boundary datum of the second equation.
    #[arg(long, default_value = "zero")]
    sigma2: String,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    q1: f64,
    #[arg(long, default_value_t = 2.0)]
    q2: f64,
    /// Capacity of the boundary condition.
    #[arg(long, value_enum, default_value = "riesz")]
    boundary_kind: BoundaryKind,
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    #[arg(long, default_value_t = 6)]
    levels: usize,
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
}

fn points(at: &[Point], default: impl FnOnce() -> Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    if at.is_empty() {
        default()
    } else {
        at.iter().map(|p| p.0.clone()).collect()
    }
}

/// Finite ratio with drift below [`DRIFT`]; a report whose every row was
/// skipped has nothing to violate.
fn stable(r: &InequalityReport) -> bool {
    vacuous(r) || r.ratio.is_finite() && r.drift() < DRIFT
}

fn vacuous(r: &InequalityReport) -> bool {
    !r.rows.is_empty() && r.skipped() == r.rows.len()
}

fn hardy_probe(a: &HardyArgs) -> Result<HardyProbe> {
    let mut vals = [a.kappa, a.gamma, a.theta, a.r, a.value];
    if let Some(p) = &a.preset {
        let (text, _) = load_text(p)?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| parse_err(format!("expected key = value, got {line:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| parse_err(format!("not a number: {:?}", v.trim())))?;
            let slot = match k.trim() {
                "kappa" => 0,
                "gamma" => 1,
                "theta" => 2,
                "R" => 3,
                "value" => 4,
                other => return Err(parse_err(format!("unknown key {other}"))),
            };
            // Flags given on the command line take precedence.
            vals[slot].get_or_insert(v);
        }
    }
    let names = ["kappa", "gamma", "theta", "R", "value"];
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = vals[i].ok_or_else(|| Error::Parameter(format!("hardy needs --{} or a preset", names[i])))?;
    }
    Ok(HardyProbe::constant(out[0], out[1], out[2], out[3], out[4]))
}

pub fn run(v: &Verify, cache: &CapacityCache) -> Result<Outcome> {
    let mut s = String::new();
    let ok = match v {
        Verify::Hardy(a) => {
            let r = hardy_check(&hardy_probe(a)?)?;
            s.push_str(&r.to_csv());
            if let Some(b) = r.bound {
                let _ = writeln!(s, "# bound={b:e}");
            }
            r.ratio.is_finite() && r.bound.map_or(true, |b| r.ratio <= b)
        }
        Verify::Compose(a) => {
            let m = a.common.measure()?;
            let st = a.common.setup(if a.whole { None } else { Some(a.r) });
            let samples = a.common.samples();
            let lower = compose_lower_check(&m, &st, &samples)?;
            let upper = compose_upper_check(&m, &st, &samples)?;
            s.push_str(&lower.to_csv());
            s.push_str(&upper.to_csv());
            (vacuous(&lower) || lower.ratio > 0.0) && stable(&lower) && stable(&upper)
        }
        Verify::ComposeTrunc(a) => {
            let m = a.common.measure()?;
            let st = a.common.setup(Some(a.r));
            let samples = a.common.samples();
            let t = match a.delta {
                Some(delta) => Truncation::DistanceAdapted { delta, domain: BoxDomain::cube(3, 0.0, 1.0)? },
                None => Truncation::Radius(a.r),
            };
            let (lower, upper) = compose_truncated_check(&m, &st, &t, &samples)?;
            s.push_str(&lower.to_csv());
            s.push_str(&upper.to_csv());
            let upper_ok = upper.rows.is_empty() || stable(&upper);
            (vacuous(&lower) || lower.ratio > 0.0) && stable(&lower) && upper_ok
        }
        Verify::Combination(a) => {
            let st = CombinationSetup {
                radius: if a.whole { None } else { Some(a.r) },
                threshold: a.threshold,
                field_n: a.field_n,
                levels: a.levels,
                ..CombinationSetup::local(a.alpha, a.beta, a.q, a.s)
            };
            let samples = points(&a.at, || vec![vec![0.1, 0.0, 0.0], vec![0.2, 0.2, 0.0], vec![0.0, 0.3, 0.1], vec![0.25, 0.1, 0.2]]);
            let r = combination_check(&interior_measure(&a.mu, 3)?, &interior_measure(&a.eta, 3)?, &st, &samples, cache)?;
            s.push_str(&r.report.to_csv());
            s.push_str(&r.hypothesis.to_csv());
            let _ = writeln!(s, "# hypothesis_held={}", r.hypothesis_held());
            !r.hypothesis_held() || stable(&r.report)
        }
        Verify::Lela(a) => {
            let st = LelaSetup { field_n: a.field_n, levels: a.levels, ..LelaSetup::new(a.q1) };
            let samples = points(&a.at, || [0.5, 1.0, 2.0, 4.0].iter().map(|r| vec![0.6 * r, 0.0, 0.8 * r]).collect());
            let r = riesz_compose_check(&a.data.measure(3)?, &st, &samples)?;
            s.push_str(&r.to_csv());
            stable(&r)
        }
        Verify::Weighted(a) => {
            let st = WeightedSetup { field_n: a.field_n, levels: a.levels, threshold: a.threshold, ..WeightedSetup::new(a.q1, a.q2) };
            let samples = points(&a.at, || vec![vec![0.0, 0.0, 0.5], vec![0.5, 0.0, 0.5], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]]);
            let r = weighted_estimate_check(&a.data.measure(3)?, &st, &samples)?;
            s.push_str(&r.report.to_csv());
            s.push_str(&r.hypothesis.to_csv());
            let _ = writeln!(s, "# hypothesis_held={}", r.hypothesis_held());
            !r.hypothesis_held() || stable(&r.report)
        }
        Verify::BoundaryCap(a) => {
            let st = BoundaryCapSetup { h: a.h, levels: a.levels, margin: 1.0 };
            let r = boundary_capacity_equiv_check(&a.lo.0, &a.hi.0, a.alpha, a.s, &st)?;
            s.push_str(&r.report.to_csv());
            let _ = writeln!(s, "# critical={}", r.critical);
            stable(&r.report)
        }
        Verify::Trace(a) => {
            let st = TraceSetup {
                r0: a.r0,
                levels: a.levels,
                boundary_kind: match a.boundary_kind {
                    BoundaryKind::Riesz => CapacityKind::Riesz,
                    BoundaryKind::Bessel => CapacityKind::Bessel,
                },
                threshold: Some(a.threshold),
                ..TraceSetup::default()
            };
            let s1 = boundary_measure(&a.sigma1, a.dim)?;
            let s2 = boundary_measure(&a.sigma2, a.dim)?;
            let r = trace_condition_check(&s1, &s2, a.q1, a.q2, &st, cache)?;
            s.push_str(&r.to_csv());
            r.admits().unwrap_or(true)
        }
    };
    Ok(Outcome { text: s, ok })
}
