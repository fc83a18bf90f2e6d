//! `W[(W[(W[ω])^q])^s] ≤ c W[ω]` with `ω = (W[μ])^s dx + η`, under the
//! capacitary hypothesis `ω(K) ≤ M Cap_{A,s''}(K)`,
//! `A = αβ(q+β-1)/q`, `s'' = qs/(qs-(β-1)²)`.

use super::compose::box_lattice;
use super::{point_label, ratio, Extreme, InequalityReport, SampleRow};
use crate::capacity::{condition_check, dyadic_balls, support_centers, CapacityCache, CapacityParams, ConditionReport};
use crate::error::{param, Result};
use crate::measure::{DiscreteMeasure, Region};
use crate::par::{self, Execution};
use crate::potential::{wolff_field, BoxDomain, GridField, PotentialParams, QuadratureRule, Truncation, WolffEvaluator};

#[derive(Debug, Clone, PartialEq)]
pub struct CombinationSetup {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub s: f64,
    /// `Some(R)`: potentials truncated at `2R`, `ω` restricted to `B̄_R(center)`
    /// and Bessel capacities at scale `2R`. `None`: whole space, Riesz capacities.
    pub radius: Option<f64>,
    pub center: Vec<f64>,
    pub field_box: BoxDomain,
    pub field_n: usize,
    pub nodes: usize,
    pub levels: usize,
    /// Hypothesis constant `M`.
    pub threshold: f64,
    /// Dyadic shrinks per test center.
    pub family_levels: usize,
}

impl CombinationSetup {
    /// `N=3`, `R = 1/2` around the origin, field box `[-2,2]^3` with 16 nodes per side.
    pub fn local(alpha: f64, beta: f64, q: f64, s: f64) -> Self {
        CombinationSetup {
            dim: 3,
            alpha,
            beta,
            q,
            s,
            radius: Some(0.5),
            center: vec![0.0; 3],
            field_box: BoxDomain::cube(3, -2.0, 2.0).expect("valid cube"),
            field_n: 16,
            nodes: 512,
            levels: 1,
            threshold: 1.0,
            family_levels: 6,
        }
    }

    /// Capacity of the hypothesis.
    pub fn capacity(&self) -> CapacityParams {
        let b1 = self.beta - 1.0;
        let a = self.alpha * self.beta * (self.q + b1) / self.q;
        let s2 = self.q * self.s / (self.q * self.s - b1 * b1);
        match self.radius {
            Some(r) => CapacityParams::bessel(a, s2).with_bessel_scale(2.0 * r),
            None => CapacityParams::riesz(a, s2),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim as f64;
        let b1 = self.beta - 1.0;
        if !(self.beta > 1.0 && self.alpha > 0.0 && self.alpha * self.beta < n) {
            return param("combination estimate needs 1 < beta < N/alpha");
        }
        let qc = n * b1 / (n - self.alpha * self.beta);
        if !(self.q > 0.0 && self.q < qc) {
            return param(format!("combination estimate needs 0 < q < {qc}"));
        }
        if !(self.q * self.s > b1 * b1) {
            return param("combination estimate needs qs > (beta-1)^2");
        }
        if self.center.len() != self.dim || self.field_box.dim() != self.dim || self.field_n == 0 {
            return param("center and field box must match N");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinationReport {
    /// Rows hold `lhs = triple composite`, `rhs = W[ω]`; maximum ratio.
    pub report: InequalityReport,
    pub hypothesis: ConditionReport,
}

impl CombinationReport {
    pub fn hypothesis_held(&self) -> bool {
        self.hypothesis.passed().unwrap_or(true)
    }
}

fn field(m: &DiscreteMeasure, p: &PotentialParams, q: &QuadratureRule, lat: &crate::potential::Lattice) -> Result<GridField> {
    if m.is_zero() {
        return Ok(GridField::zeros(lat.clone()));
    }
    wolff_field(m, p, q, lat)
}

struct Level {
    omega: DiscreteMeasure,
    lhs: Vec<f64>,
    rhs: Vec<f64>,
}

fn level(mu: &DiscreteMeasure, eta: &DiscreteMeasure, st: &CombinationSetup, samples: &[Vec<f64>]) -> Result<Level> {
    let trunc = match st.radius {
        Some(r) => Truncation::Radius(2.0 * r),
        None => Truncation::Full,
    };
    let p = PotentialParams { dim: st.dim, alpha: st.alpha, beta: st.beta, truncation: trunc };
    let q = QuadratureRule::with_nodes(st.nodes);
    let all = mu.with_atoms(eta)?;
    let lat = box_lattice(&st.field_box, st.field_n, &all)?;
    let ball = st.radius.map(|r| Region::Ball { center: st.center.clone(), radius: r });

    let mut w_mu = field(mu, &p, &q, &lat)?;
    for (i, v) in w_mu.values.iter_mut().enumerate() {
        let keep = ball.as_ref().is_none_or(|b| b.contains(&lat.node(i)));
        *v = if keep { v.powf(st.s) } else { 0.0 };
    }
    let eta_part = match &ball {
        Some(b) => eta.restrict(b)?,
        None => eta.clone(),
    };
    let omega = eta_part.with_density(Some(w_mu.to_density()?))?;

    let a = field(&omega, &p, &q, &lat)?;
    let b = field(&a.map(|v| v.powf(st.q)).to_measure()?, &p, &q, &lat)?;
    let outer = b.map(|v| v.powf(st.s)).to_measure()?;
    let ev_l = WolffEvaluator::new(&outer, &p, &q)?;
    let ev_r = WolffEvaluator::new(&omega, &p, &q)?;
    let lhs = par::try_map_indexed(Execution::Parallel, samples.len(), |i| ev_l.eval(&samples[i]))?;
    let rhs = par::try_map_indexed(Execution::Parallel, samples.len(), |i| ev_r.eval(&samples[i]))?;
    Ok(Level { omega, lhs, rhs })
}

/// Evaluates the triple composite against `W[ω]` at the samples and tests
/// the hypothesis on dyadic balls around the support of `ω`.
pub fn combination_check(
    mu: &DiscreteMeasure,
    eta: &DiscreteMeasure,
    st: &CombinationSetup,
    samples: &[Vec<f64>],
    cache: &CapacityCache,
) -> Result<CombinationReport> {
    st.validate()?;
    if mu.dim() != st.dim || eta.dim() != st.dim || samples.is_empty() || samples.iter().any(|x| x.len() != st.dim) {
        return param("measures and samples must have dimension N");
    }
    let base = level(mu, eta, st, samples)?;
    let rows: Vec<SampleRow> = samples
        .iter()
        .zip(base.lhs.iter().zip(&base.rhs))
        .map(|(x, (&l, &r))| SampleRow { label: point_label(x), lhs: l, rhs: r, ratio: ratio(l, r) })
        .collect();
    let mut report = InequalityReport::new("combination", rows, Extreme::Max);
    for k in 1..=st.levels {
        let f = 1usize << k;
        let refined = CombinationSetup { field_n: st.field_n * f, nodes: st.nodes * f, ..st.clone() };
        let lv = level(mu, eta, &refined, samples)?;
        let rows: Vec<SampleRow> = lv
            .lhs
            .iter()
            .zip(&lv.rhs)
            .map(|(&l, &r)| SampleRow { label: String::new(), lhs: l, rhs: r, ratio: ratio(l, r) })
            .collect();
        report.refinement.push(super::extreme_of(&rows, Extreme::Max));
    }

    let r0 = st.radius.unwrap_or(1.0);
    let mut centers = support_centers(&base.omega, 32);
    if centers.is_empty() {
        centers.push(st.center.clone());
    }
    let family = dyadic_balls(&centers, r0, st.family_levels);
    let hypothesis = condition_check(&base.omega, &st.capacity(), &family, cache, Some(st.threshold))?;
    if !hypothesis.passed().unwrap_or(true) {
        report.notes.push("hypothesis-violated".into());
    }
    Ok(CombinationReport { report, hypothesis })
}
