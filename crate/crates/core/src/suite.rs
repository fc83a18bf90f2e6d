//! The acceptance battery: thirteen numbered criteria, each reduced to one
//! measured number compared against a threshold. The CSV holds no timings,
//! so it is byte-identical across runs and worker counts.

use crate::capacity::{capacity_variational, CapacityParams, VariationalOptions};
use crate::error::{Error, Result};
use crate::halfspace::{boundary_capacity_equiv_check, BoundaryCapSetup};
use crate::inequality::{compose_lower_check, compose_upper_check, hardy_check, hardy_constant, ComposeSetup, HardyProbe};
use crate::measure::{dist2, DiscreteMeasure, Region};
use crate::par;
use crate::potential::{maximal_function, wolff, BoxDomain, PotentialParams, QuadratureRule, Truncation};
use crate::random::{random_atoms, random_points};
use crate::system::{liouville_check, picard_iterate, solution_bounds, Operator, PicardOptions, SystemDomain, SystemSpec};
use std::fmt::Write as _;
use std::time::Instant;

/// Criterion numbers and names, in order.
pub const CRITERIA: [(usize, &str); 13] = [
    (1, "dirac-closed-form"),
    (2, "homogeneity"),
    (3, "truncation"),
    (4, "compose-lower"),
    (5, "compose-upper"),
    (6, "capacity-ball-scaling"),
    (7, "boundary-capacity"),
    (8, "liouville-tables"),
    (9, "picard-dichotomy"),
    (10, "zero-fixed-point"),
    (11, "maximal-function"),
    (12, "hardy-preset"),
    (13, "determinism"),
];

/// Wall-clock limit in seconds, where one is stated.
pub fn time_limit(id: usize) -> Option<f64> {
    match id {
        1 => Some(1.0),
        2 => Some(5.0),
        4 | 5 => Some(60.0),
        // Per solve.
        6 => Some(120.0),
        7 => Some(180.0),
        9 => Some(300.0),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    /// Human-readable detail; not part of the CSV.
    pub detail: String,
    pub seconds: f64,
    /// Time compared against [`time_limit`]: the slowest solve for
    /// criterion 6, `seconds` otherwise.
    pub timed: f64,
}

impl CriterionResult {
    pub fn within_limit(&self) -> bool {
        time_limit(self.id).map_or(true, |t| self.timed < t)
    }
}

fn name_of(id: usize) -> &'static str {
    CRITERIA[id - 1].1
}

struct Measured {
    passed: bool,
    measured: f64,
    threshold: f64,
    detail: String,
    timed: Option<f64>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1() -> Result<Measured> {
    let m = DiscreteMeasure::dirac(vec![0.0; 3], 1.0)?;
    let p = PotentialParams::full(3, 1.0, 2.0);
    let q = QuadratureRule::with_nodes(512);
    let mut worst = 0.0f64;
    for r in [0.5, 1.0, 2.0, 4.0] {
        worst = worst.max(rel(wolff(&m, &p, &q, &[r, 0.0, 0.0])?, 1.0 / r));
    }
    Ok(Measured { passed: worst < 1e-3, measured: worst, threshold: 1e-3, detail: format!("max relative error {worst:e} against |x|^-1"), timed: None })
}

fn c2() -> Result<Measured> {
    let q = QuadratureRule::with_nodes(512);
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let m = random_atoms(100 + seed, 5, 3)?;
        for x in random_points(200 + seed, 5, 3, -0.5, 1.5) {
            for beta in [1.5, 2.0] {
                let p = PotentialParams::full(3, 1.0, beta);
                let base = wolff(&m, &p, &q, &x)?;
                for lam in [0.5, 2.0, 4.0] {
                    let scaled = wolff(&m.scale(lam)?, &p, &q, &x)?;
                    worst = worst.max(rel(scaled, lam.powf(1.0 / (beta - 1.0)) * base));
                }
            }
        }
    }
    Ok(Measured { passed: worst < 1e-12, measured: worst, threshold: 1e-12, detail: format!("max relative error {worst:e} over 10 measures"), timed: None })
}

fn c3() -> Result<Measured> {
    let m = DiscreteMeasure::dirac(vec![0.0; 3], 1.0)?;
    let p = PotentialParams { dim: 3, alpha: 1.0, beta: 2.0, truncation: Truncation::Radius(1.0) };
    let v = wolff(&m, &p, &QuadratureRule::with_nodes(512), &[2.0, 0.0, 0.0])?;
    Ok(Measured { passed: v == 0.0, measured: v, threshold: 0.0, detail: format!("W^1[δ_0](2,0,0) = {v:e}"), timed: None })
}

/// The eight points `{1/4, 3/4}^3` inside the unit box.
pub fn compose_samples() -> Vec<Vec<f64>> {
    let mut s = Vec::new();
    for a in [0.25, 0.75] {
        for b in [0.25, 0.75] {
            for c in [0.25, 0.75] {
                s.push(vec![a, b, c]);
            }
        }
    }
    s
}

fn c4() -> Result<Measured> {
    let s = ComposeSetup::unit_box(1.0, 2.0, 1.0);
    let samples = compose_samples();
    let (mut min_ratio, mut max_drift, mut skipped) = (f64::INFINITY, 0.0f64, 0);
    for seed in 0..25u64 {
        let rep = compose_lower_check(&random_atoms(seed, 5, 3)?, &s, &samples)?;
        // Rows where the single side vanishes are skipped; they cannot violate the estimate.
        skipped += rep.skipped();
        if !rep.ratio.is_nan() {
            min_ratio = min_ratio.min(rep.ratio);
        }
        max_drift = max_drift.max(rep.drift());
    }
    Ok(Measured {
        passed: min_ratio > 0.0 && min_ratio.is_finite() && max_drift < 2.0,
        measured: max_drift,
        threshold: 2.0,
        timed: None,
        detail: format!("min ratio {min_ratio:e}, max drift {max_drift:e}, {skipped} rows skipped"),
    })
}

fn c5() -> Result<Measured> {
    let s = ComposeSetup::unit_box(1.0, 2.0, 1.0);
    let samples = compose_samples();
    let (mut max_ratio, mut max_drift) = (0.0f64, 0.0f64);
    for seed in 0..25u64 {
        let rep = compose_upper_check(&random_atoms(seed, 5, 3)?, &s, &samples)?;
        max_ratio = max_ratio.max(if rep.ratio.is_nan() { f64::INFINITY } else { rep.ratio });
        max_drift = max_drift.max(rep.drift());
    }
    let m = random_atoms(0, 5, 3)?;
    let critical = ComposeSetup { levels: 0, ..ComposeSetup::unit_box(1.0, 2.0, 3.0) };
    let rejects = matches!(compose_upper_check(&m, &critical, &samples), Err(Error::Parameter(_)));
    Ok(Measured {
        passed: max_ratio.is_finite() && max_drift < 2.0 && rejects,
        measured: max_drift,
        threshold: 2.0,
        timed: None,
        detail: format!("max ratio {max_ratio:e}, max drift {max_drift:e}, q = 3 rejected: {rejects}"),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn c6() -> Result<Measured> {
    let p = CapacityParams::riesz(1.0, 2.0);
    let opts = VariationalOptions::new(1.0 / 32.0).with_margin(0.5);
    let mut pts = Vec::new();
    let mut slowest = 0.0f64;
    for rho in [0.5, 1.0, 2.0] {
        let t = Instant::now();
        let e = capacity_variational(&p, &Region::Ball { center: vec![0.0; 3], radius: rho }, 3, &opts)?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
        pts.push((rho, e.value));
    }
    let slope = log_log_slope(&pts);
    let dev = (slope - 1.0).abs();
    Ok(Measured { passed: dev < 0.05, measured: dev, threshold: 0.05, detail: format!("slope {slope} (expected 1), capacities {pts:?}"), timed: Some(slowest) })
}

fn c7() -> Result<Measured> {
    let st = BoundaryCapSetup { h: 1.0 / 16.0, levels: 1, margin: 1.0 };
    let r = boundary_capacity_equiv_check(&[-0.5, -0.5], &[0.5, 0.5], 1.0, 2.0, &st)?;
    let d = r.report.drift();
    Ok(Measured { passed: d < 2.0, measured: d, threshold: 2.0, detail: format!("ratios {:?}", r.report.refinement), timed: None })
}

fn c8() -> Result<Measured> {
    // Cross-multiplied recomputation: lead (q1q2 + d max) >= N (q1q2 - d^2).
    let table = |lead: f64, d: f64, q1: f64, q2: f64, n: f64| -> Option<bool> {
        let den = q1 * q2 - d * d;
        (den > 0.0).then(|| lead * (q1 * q2 + d * if q1 > q2 { q1 } else { q2 }) >= n * den)
    };
    let qs = [1.5, 2.0, 3.0, 10.0];
    let (mut bad, mut total) = (0usize, 0usize);
    for p in [2.0, 3.0] {
        for n in [3usize, 5, 7] {
            for &q1 in &qs {
                for &q2 in &qs {
                    let got = liouville_check(Operator::PLaplace(p), q1, q2, n).ok();
                    bad += (got != table(p, p - 1.0, q1, q2, n as f64)) as usize;
                    if p == 2.0 {
                        bad += (liouville_check(Operator::KHessian(1), q1, q2, n).ok() != got) as usize;
                    }
                    total += 1;
                }
            }
        }
    }
    Ok(Measured { passed: bad == 0, measured: bad as f64, threshold: 0.0, detail: format!("{bad} disagreements over {total} grid points"), timed: None })
}

fn dirac_system(a: f64) -> Result<SystemSpec> {
    let eta = DiscreteMeasure::dirac(vec![0.0; 3], a)?;
    let domain = SystemDomain::Box(BoxDomain::cube(3, -1.0, 1.0)?);
    Ok(SystemSpec::new(Operator::PLaplace(2.0), 3, 2.0, 2.0, DiscreteMeasure::zero(3), eta, domain))
}

fn c9() -> Result<Measured> {
    let opts = PicardOptions::default();
    let small = picard_iterate(&dirac_system(1e-3)?, &opts)?;
    let (ru, rv) = small.residual.unwrap_or((f64::INFINITY, f64::INFINITY));
    let residual = ru.max(rv);
    let bounds = solution_bounds(&small, &small.constants);
    let converged = small.outcome == crate::system::Outcome::Converged
        && small.states.len() <= 50
        && small.last().increment < 1e-6
        && small.states.iter().all(|s| s.monotone && !s.bound_violation)
        && bounds.passed();
    let large = picard_iterate(&dirac_system(1e6)?, &opts)?;
    let diverged = large.outcome.diverged() && large.states.len() <= 50;
    Ok(Measured {
        passed: converged && residual < 1e-3 && diverged,
        measured: residual,
        threshold: 1e-3,
        timed: None,
        detail: format!(
            "a=1e-3: {} after {} iterations, bound ratios u {:e} v {:e}; a=1e6: {} after {} iterations",
            small.outcome.name(),
            small.states.len(),
            bounds.max_ratio_u,
            bounds.max_ratio_v,
            large.outcome.name(),
            large.states.len()
        ),
    })
}

fn c10() -> Result<Measured> {
    let domain = SystemDomain::Box(BoxDomain::cube(3, -1.0, 1.0)?);
    let spec = SystemSpec::new(Operator::PLaplace(2.0), 3, 2.0, 2.0, DiscreteMeasure::zero(3), DiscreteMeasure::zero(3), domain);
    let run = picard_iterate(&spec, &PicardOptions::default())?;
    let sup = run.states.iter().flat_map(|s| s.u.values.iter().chain(&s.v.values)).fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(Measured { passed: sup == 0.0, measured: sup, threshold: 0.0, detail: format!("{} iterates, sup {sup:e}", run.states.len()), timed: None })
}

fn c11() -> Result<Measured> {
    let one = |_: &[f64]| 1.0;
    let mut bad = 0usize;
    let m = random_atoms(11, 30, 3)?;
    for x in random_points(12, 100, 3, -1.0, 2.0) {
        bad += (maximal_function(&m, &one, &x)? != 1.0) as usize;
    }
    // Dyadic weights keep every partial sum exact.
    let f = |y: &[f64]| if y[0] < 0.5 { 1.0 } else { 0.0 };
    for seed in 0..20u64 {
        let raw = random_atoms(300 + seed, 25, 3)?;
        let atoms = raw.atoms().map(|(y, w)| (y.to_vec(), (w * 8.0).ceil() / 8.0)).collect();
        let m = DiscreteMeasure::new(3, atoms, None)?;
        for x in random_points(400 + seed, 5, 3, 0.0, 1.0) {
            let mut sweep = 0.0f64;
            for (y, _) in m.atoms() {
                let r = dist2(&x, y);
                let (mut num, mut den) = (0.0, 0.0);
                for (z, w) in m.atoms() {
                    if dist2(&x, z) <= r {
                        num += w * f(z);
                        den += w;
                    }
                }
                sweep = sweep.max(num / den);
            }
            bad += (maximal_function(&m, &f, &x)? != sweep) as usize;
        }
    }
    Ok(Measured { passed: bad == 0, measured: bad as f64, threshold: 0.0, detail: format!("{bad} mismatches"), timed: None })
}

fn c12() -> Result<Measured> {
    let r = hardy_check(&HardyProbe::constant(1.0, 1.0, 1.0, 1.0, 1.0))?;
    let err = (r.rows[0].lhs - 0.5).abs().max((r.rows[0].rhs - 2.0).abs());
    let c = hardy_constant(1.0, 1.0, 1.0);
    Ok(Measured {
        passed: err < 1e-6 && r.ratio <= c,
        measured: err,
        threshold: 1e-6,
        timed: None,
        detail: format!("lhs {:e} rhs {:e} ratio {:e} constant {c:e}", r.rows[0].lhs, r.rows[0].rhs, r.ratio),
    })
}

/// Runs criterion `id` (1 to 12). Errors become failures.
pub fn run_criterion(id: usize) -> CriterionResult {
    let t = Instant::now();
    let out = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(),
        10 => c10(),
        11 => c11(),
        12 => c12(),
        _ => Err(Error::Parameter(format!("no battery criterion {id}"))),
    };
    let m = out.unwrap_or_else(|e| Measured { passed: false, measured: f64::NAN, threshold: f64::NAN, detail: format!("error: {e}"), timed: None });
    let name = if (1..=13).contains(&id) { name_of(id) } else { "unknown" };
    let seconds = t.elapsed().as_secs_f64();
    CriterionResult { id, name, passed: m.passed, measured: m.measured, threshold: m.threshold, detail: m.detail, seconds, timed: m.timed.unwrap_or(seconds) }
}

/// `criterion,name,status,measured,threshold`.
pub fn battery_csv(results: &[CriterionResult]) -> String {
    let mut s = String::from("criterion,name,status,measured,threshold\n");
    for r in results {
        let _ = writeln!(s, "{},{},{},{:e},{:e}", r.id, r.name, if r.passed { "pass" } else { "fail" }, r.measured, r.threshold);
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub results: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut s = battery_csv(&self.results);
        let failed = self.results.iter().filter(|r| !r.passed).count();
        let _ = writeln!(s, "# criteria={} failed={failed}", self.results.len());
        s
    }
}

/// Runs the selected criteria on `threads` workers. Criterion 13 reruns the
/// other selected criteria on a second worker count (1, or 8 when
/// `threads == 1`) and compares the CSV bytes.
pub fn run_suite(ids: &[usize], threads: usize, mut progress: impl FnMut(&CriterionResult) + Send) -> Result<SuiteReport> {
    if let Some(bad) = ids.iter().find(|i| !(1..=13).contains(*i)) {
        return Err(Error::Parameter(format!("no criterion {bad}; criteria are 1 to 13")));
    }
    let mut battery: Vec<usize> = ids.iter().copied().filter(|&i| i != 13).collect();
    battery.sort_unstable();
    battery.dedup();
    let run = |progress: &mut dyn FnMut(&CriterionResult)| {
        battery
            .iter()
            .map(|&id| {
                let r = run_criterion(id);
                progress(&r);
                r
            })
            .collect::<Vec<_>>()
    };
    let mut results = par::with_threads(threads, || run(&mut progress));
    if ids.contains(&13) {
        let t = Instant::now();
        let other = if threads == 1 { 8 } else { 1 };
        let again = par::with_threads(other, || run(&mut |_: &CriterionResult| {}));
        let (a, b) = (battery_csv(&results), battery_csv(&again));
        let differing = a.lines().zip(b.lines()).filter(|(x, y)| x != y).count() + a.lines().count().abs_diff(b.lines().count());
        let r = CriterionResult {
            id: 13,
            name: name_of(13),
            passed: a == b,
            measured: differing as f64,
            threshold: 0.0,
            detail: format!("{threads} vs {other} workers over criteria {battery:?}: {differing} differing lines"),
            seconds: t.elapsed().as_secs_f64(),
            timed: t.elapsed().as_secs_f64(),
        };
        progress(&r);
        results.push(r);
    }
    Ok(SuiteReport { results })
}
