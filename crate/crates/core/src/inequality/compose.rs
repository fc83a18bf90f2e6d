//! Composition estimates between `W_{α,β}[(W_{α,β}[μ])^q]` and the single
//! potential `W_{α',β'}[μ]` with `α' = αβ(q+β-1)/(q+(β-1)²)`, `β' = (β-1)²/q + 1`.

use super::{point_label, ratio, Extreme, InequalityReport, SampleRow};
use crate::error::{param, Result};
use crate::measure::DiscreteMeasure;
use crate::par::{self, Execution};
use crate::potential::{wolff_field, BoxDomain, Lattice, PotentialParams, QuadratureRule, Truncation, WolffEvaluator};

/// `(α', β')` of the single potential matching the composite.
pub fn composed_params(alpha: f64, beta: f64, q: f64) -> (f64, f64) {
    let b1 = beta - 1.0;
    (alpha * beta * (q + b1) / (q + b1 * b1), b1 * b1 / q + 1.0)
}

/// Discretization of a composition check. The inner field lives on a
/// cell-centered lattice with `field_n` nodes along the longest side of
/// `field_box`; `nodes` is the radial quadrature size.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposeSetup {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    /// Truncation radius `R`; `None` for whole-space potentials.
    pub radius: Option<f64>,
    pub field_box: BoxDomain,
    pub field_n: usize,
    pub nodes: usize,
    /// Additional refinement levels (each doubles `field_n` and `nodes`).
    pub levels: usize,
}

impl ComposeSetup {
    /// `N=3` on the field box `[-1,2]^3` with 18 nodes per side and `R = 1`.
    pub fn unit_box(alpha: f64, beta: f64, q: f64) -> Self {
        ComposeSetup {
            dim: 3,
            alpha,
            beta,
            q,
            radius: Some(1.0),
            field_box: BoxDomain::cube(3, -1.0, 2.0).expect("valid cube"),
            field_n: 18,
            nodes: 512,
            levels: 1,
        }
    }

    fn refined(&self, level: usize) -> Self {
        let f = 1usize << level;
        ComposeSetup { field_n: self.field_n * f, nodes: self.nodes * f, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0 && self.alpha > 0.0 && self.alpha * self.beta < self.dim as f64) {
            return param("composition estimates need 1 < beta < N/alpha");
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return param("composition exponent q must be positive");
        }
        if self.field_box.dim() != self.dim || self.field_n == 0 {
            return param("field box must match N and have nodes");
        }
        Ok(())
    }

    fn q_critical(&self) -> f64 {
        let n = self.dim as f64;
        n * (self.beta - 1.0) / (n - self.alpha * self.beta)
    }

    fn lattice(&self, m: &DiscreteMeasure) -> Result<Lattice> {
        box_lattice(&self.field_box, self.field_n, m)
    }
}

/// Cell-centered lattice on `b` with `n` nodes along its longest side,
/// shifted off the atoms of `m`.
pub(crate) fn box_lattice(b: &BoxDomain, n: usize, m: &DiscreteMeasure) -> Result<Lattice> {
    Ok(Lattice::covering(b, n)?.avoiding(m))
}

fn trunc_scaled(t: &Truncation, f: f64) -> Truncation {
    match t {
        Truncation::Full => Truncation::Full,
        Truncation::Radius(r) => Truncation::Radius(r * f),
        Truncation::DistanceAdapted { delta, domain } => Truncation::DistanceAdapted { delta: delta * f, domain: domain.clone() },
    }
}

/// `(W^t[μ])^q dx` on the setup lattice, zero outside it.
fn inner_measure(m: &DiscreteMeasure, s: &ComposeSetup, t: &Truncation) -> Result<DiscreteMeasure> {
    let p = PotentialParams { dim: s.dim, alpha: s.alpha, beta: s.beta, truncation: t.clone() };
    let lat = s.lattice(m)?;
    let q = QuadratureRule::with_nodes(s.nodes);
    // Nodes outside a distance-adapted domain carry no mass.
    let field = match t {
        Truncation::DistanceAdapted { domain, .. } => {
            let ev = WolffEvaluator::new(m, &p, &q)?;
            let values = par::try_map_indexed(Execution::Parallel, lat.len(), |i| {
                let x = lat.node(i);
                if domain.contains(&x) {
                    ev.eval(&x)
                } else {
                    Ok(0.0)
                }
            })?;
            crate::potential::GridField { lattice: lat, values }
        }
        _ => wolff_field(m, &p, &q, &lat)?,
    };
    field.map(|v| v.powf(s.q)).to_measure()
}

struct Sides {
    single: Vec<f64>,
    composite: Vec<f64>,
}

/// Composite `W^{t}[(W^{t}μ)^q]` and single `W^{t'}_{α',β'}[μ]` at the samples.
fn sides(m: &DiscreteMeasure, s: &ComposeSetup, t: &Truncation, t_single: &[Truncation], samples: &[Vec<f64>]) -> Result<Sides> {
    let inner = inner_measure(m, s, t)?;
    let q = QuadratureRule::with_nodes(s.nodes);
    let outer = PotentialParams { dim: s.dim, alpha: s.alpha, beta: s.beta, truncation: t.clone() };
    let ev = WolffEvaluator::new(&inner, &outer, &q)?;
    let composite = par::try_map_indexed(Execution::Parallel, samples.len(), |i| ev.eval(&samples[i]))?;
    let (a1, b1) = composed_params(s.alpha, s.beta, s.q);
    let single = par::try_map_indexed(Execution::Parallel, samples.len(), |i| {
        let tr = if t_single.len() == 1 { &t_single[0] } else { &t_single[i] };
        let p = PotentialParams { dim: s.dim, alpha: a1, beta: b1, truncation: tr.clone() };
        crate::potential::wolff(m, &p, &q, &samples[i])
    })?;
    Ok(Sides { single, composite })
}

fn check_samples(s: &ComposeSetup, samples: &[Vec<f64>]) -> Result<()> {
    if samples.is_empty() || samples.iter().any(|x| x.len() != s.dim) {
        return param("composition checks need sample points of dimension N");
    }
    Ok(())
}

fn base_truncation(s: &ComposeSetup) -> Truncation {
    match s.radius {
        Some(r) => Truncation::Radius(r),
        None => Truncation::Full,
    }
}

fn run(
    name: &str,
    s: &ComposeSetup,
    samples: &[Vec<f64>],
    extreme: Extreme,
    eval: impl Fn(&ComposeSetup) -> Result<Vec<SampleRow>>,
) -> Result<InequalityReport> {
    check_samples(s, samples)?;
    let mut rep = InequalityReport::new(name, eval(s)?, extreme);
    for level in 1..=s.levels {
        let rows = eval(&s.refined(level))?;
        rep.refinement.push(super::extreme_of(&rows, extreme));
    }
    Ok(rep)
}

/// Lower estimate `W^{R/2}_{α',β'}[μ] ≤ c W^R[(W^R μ)^q]` (whole-space
/// potentials when `radius` is `None`). Rows hold `lhs = single`,
/// `rhs = composite`, `ratio = rhs/lhs`; the report gives the minimum.
pub fn compose_lower_check(m: &DiscreteMeasure, s: &ComposeSetup, samples: &[Vec<f64>]) -> Result<InequalityReport> {
    s.validate()?;
    let t = base_truncation(s);
    let half = trunc_scaled(&t, 0.5);
    run("compose-lower", s, samples, Extreme::Min, |s| {
        let sd = sides(m, s, &t, std::slice::from_ref(&half), samples)?;
        Ok(rows(samples, &sd.single, &sd.composite, true))
    })
}

/// Upper estimate `W^R[(W^R μ)^q] ≤ c W^{4R}_{α',β'}[μ]` for subcritical
/// `q < N(β-1)/(N-αβ)`. Rows hold `lhs = composite`, `rhs = single`,
/// `ratio = lhs/rhs`; the report gives the maximum.
pub fn compose_upper_check(m: &DiscreteMeasure, s: &ComposeSetup, samples: &[Vec<f64>]) -> Result<InequalityReport> {
    s.validate()?;
    if s.q >= s.q_critical() {
        return param(format!("upper composition estimate needs q < N(beta-1)/(N-alpha beta) = {}", s.q_critical()));
    }
    let t = base_truncation(s);
    let four = trunc_scaled(&t, 4.0);
    run("compose-upper", s, samples, Extreme::Max, |s| {
        let sd = sides(m, s, &t, std::slice::from_ref(&four), samples)?;
        Ok(rows(samples, &sd.composite, &sd.single, false))
    })
}

/// Both truncated estimates for a radius or a distance-adapted truncation
/// `δ d(·)` on a box `Ω`. In the adapted case the inner truncation `δ d(y)`
/// is at most `2δ d(x)` on the outer ball, so the upper estimate compares
/// with `W^{8δ d(x)}_{α',β'}`. Returns `(lower, upper)`.
pub fn compose_truncated_check(
    m: &DiscreteMeasure,
    s: &ComposeSetup,
    t: &Truncation,
    samples: &[Vec<f64>],
) -> Result<(InequalityReport, InequalityReport)> {
    s.validate()?;
    check_samples(s, samples)?;
    match t {
        Truncation::Full => return param("truncated composition check needs a radius or a distance-adapted truncation"),
        Truncation::DistanceAdapted { domain, delta } => {
            if samples.iter().any(|x| !domain.contains(x)) {
                return crate::error::domain("samples must lie in the domain");
            }
            if !(*delta > 0.0 && *delta < 1.0) {
                return param("delta must lie in (0,1)");
            }
        }
        Truncation::Radius(_) => {}
    }
    let half = trunc_scaled(t, 0.5);
    let lower = run("compose-trunc-lower", s, samples, Extreme::Min, |s| {
        let sd = sides(m, s, t, std::slice::from_ref(&half), samples)?;
        Ok(rows(samples, &sd.single, &sd.composite, true))
    })?;
    let upper_single: Vec<Truncation> = match t {
        Truncation::DistanceAdapted { delta, domain } => samples
            .iter()
            .map(|x| Truncation::Radius(8.0 * delta * domain.dist_to_boundary(x).unwrap_or(0.0)))
            .collect(),
        other => vec![trunc_scaled(other, 4.0)],
    };
    let upper = if s.q < s.q_critical() {
        run("compose-trunc-upper", s, samples, Extreme::Max, |s| {
            let single: Vec<Truncation> = upper_single.iter().map(|u| positive(u)).collect();
            let sd = sides(m, s, t, &single, samples)?;
            Ok(rows(samples, &sd.composite, &sd.single, false))
        })?
    } else {
        let mut r = InequalityReport::new("compose-trunc-upper", Vec::new(), Extreme::Max);
        r.notes.push(format!("q >= {}: upper estimate not applicable", s.q_critical()));
        r
    };
    Ok((lower, upper))
}

/// A zero radius (sample on the boundary) evaluates to zero; keep it valid.
fn positive(t: &Truncation) -> Truncation {
    match t {
        Truncation::Radius(r) if *r <= 0.0 => Truncation::Radius(f64::MIN_POSITIVE),
        other => other.clone(),
    }
}

fn rows(samples: &[Vec<f64>], lhs: &[f64], rhs: &[f64], inverted: bool) -> Vec<SampleRow> {
    samples
        .iter()
        .zip(lhs.iter().zip(rhs))
        .map(|(x, (&l, &r))| SampleRow { label: point_label(x), lhs: l, rhs: r, ratio: match inverted {
            // The lower estimate holds trivially where the single side vanishes.
            true if l == 0.0 => f64::NAN,
            true => ratio(r, l),
            false => ratio(l, r),
        } })
        .collect()
}
