use super::{IterationConstants, SystemDomain, SystemSpec};
use crate::capacity::{condition_check, CapacityCache, CapacityParams, ConditionReport};
use crate::error::{param, Error, Result};
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::potential::{wolff_field, BoxDomain, GridField, Lattice, PotentialParams, QuadratureRule};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PicardMode {
    /// Checks `u_{m+1} >= u_m`, `v_{m+1} >= v_m` at every node.
    #[default]
    Monotone,
    Plain,
}

impl PicardMode {
    pub fn name(&self) -> &'static str {
        match self {
            PicardMode::Monotone => "monotone",
            PicardMode::Plain => "plain",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions {
    /// Nodes along the longest side of the lattice box.
    pub n: usize,
    /// Lattice box on the whole space; bounded problems use their domain.
    pub window: Option<BoxDomain>,
    pub max_m: usize,
    pub tol: f64,
    pub mode: PicardMode,
    pub nodes: usize,
    /// Sup-norm treated as divergence.
    pub ceiling: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { n: 33, window: None, max_m: 50, tol: 1e-6, mode: PicardMode::Monotone, nodes: 512, ceiling: 1e12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub m: usize,
    pub u: GridField,
    pub v: GridField,
    pub sup_u: f64,
    pub sup_v: f64,
    /// `max(sup|u_m - u_{m-1}|, sup|v_m - v_{m-1}|)`.
    pub increment: f64,
    /// Nodewise monotone against the previous iterate (always true in plain mode).
    pub monotone: bool,
    /// Largest of `u/bound_u`, `v/bound_v` over the nodes.
    pub bound_ratio: f64,
    pub bound_violation: bool,
}

impl IterationState {
    /// `1 - bound_ratio`; negative once a bound is violated.
    pub fn bound_margin(&self) -> f64 {
        1.0 - self.bound_ratio
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Converged,
    /// First violation of the a-priori bounds.
    BoundViolation,
    /// Sup-norm above the ceiling or divergent nodes.
    Ceiling,
    MaxIterations,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::BoundViolation => "bound-violation",
            Outcome::Ceiling => "ceiling",
            Outcome::MaxIterations => "max-iterations",
        }
    }

    pub fn diverged(&self) -> bool {
        matches!(self, Outcome::BoundViolation | Outcome::Ceiling)
    }
}

/// Result of [`picard_iterate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardRun {
    pub states: Vec<IterationState>,
    pub outcome: Outcome,
    pub constants: IterationConstants,
    pub mode: PicardMode,
    /// `dω = (W[μ])^{q2} dx + dη`.
    pub omega: DiscreteMeasure,
    pub w_mu: GridField,
    pub w_omega: GridField,
    /// `W[(W[ω])^{q1}]`.
    pub w_composite: GridField,
    /// Relative fixed-point residuals `(‖u - c★W[v^{q1}+μ]‖, ‖v - c★W[u^{q2}+η]‖)`
    /// over sup-norms, after convergence.
    pub residual: Option<(f64, f64)>,
}

impl PicardRun {
    pub fn last(&self) -> &IterationState {
        self.states.last().expect("at least one iterate")
    }

    /// One row per iterate, then a `#` summary line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,sup_u,sup_v,increment,bound_margin\n");
        for st in &self.states {
            let _ = writeln!(s, "{},{:e},{:e},{:e},{:e}", st.m, st.sup_u, st.sup_v, st.increment, st.bound_margin());
        }
        let c = &self.constants;
        let _ = write!(s, "# outcome={} mode={} iterations={}", self.outcome.name(), self.mode.name(), self.states.len());
        if let Some((ru, rv)) = self.residual {
            let _ = write!(s, " residual_u={ru:e} residual_v={rv:e}");
        }
        let _ = writeln!(s, " c68={:e} c69={:e} c70={:e} m_star={:e}", c.c68, c.c69, c.c70, c.m_star);
        s
    }

    /// Final `u` and `v` on the lattice: `x1,..,xN,u,v`.
    pub fn fields_csv(&self) -> String {
        let st = self.last();
        let lat = &st.u.lattice;
        let mut s = String::new();
        let header: Vec<String> = (1..=lat.dim()).map(|k| format!("x{k}")).collect();
        let _ = writeln!(s, "{},u,v", header.join(","));
        for i in 0..lat.len() {
            for c in lat.node(i) {
                let _ = write!(s, "{c},");
            }
            let _ = writeln!(s, "{:e},{:e}", st.u.values[i], st.v.values[i]);
        }
        s
    }
}

fn ratio(value: f64, bound: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else if bound > 0.0 {
        value / bound
    } else {
        f64::INFINITY
    }
}

/// `g^e dx` on the lattice cells plus the data measure. A data density must
/// sit on the lattice cells, in which case the two are added.
fn source(g: &GridField, e: f64, data: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let mut d: GridDensity = g.map(|x| x.powf(e)).to_density()?;
    if let Some(extra) = data.density() {
        if extra.origin != d.origin || extra.h != d.h || extra.shape != d.shape {
            return param("data densities must live on the iteration lattice cells");
        }
        for (a, b) in d.values.iter_mut().zip(&extra.values) {
            *a += b;
        }
    }
    data.with_density(Some(d))
}

fn field(m: &DiscreteMeasure, p: &PotentialParams, q: &QuadratureRule, lat: &Lattice) -> Result<GridField> {
    if m.is_zero() {
        return Ok(GridField::zeros(lat.clone()));
    }
    let f = wolff_field(m, p, q, lat)?;
    if f.sentinels() == f.values.len() {
        return Err(Error::Data("potential diverges at every lattice node".into()));
    }
    Ok(f)
}

fn sup_diff(a: &GridField, b: &GridField) -> f64 {
    a.values.iter().zip(&b.values).fold(0.0, |acc: f64, (x, y)| acc.max((x - y).abs()))
}

fn lattice_for(spec: &SystemSpec, opts: &PicardOptions) -> Result<Lattice> {
    let b = match (&spec.domain, &opts.window) {
        (SystemDomain::Box(b), _) => b,
        (SystemDomain::WholeSpace, Some(w)) => w,
        (SystemDomain::WholeSpace, None) => return param("whole-space iteration needs a lattice window"),
    };
    if b.dim() != spec.dim {
        return param("lattice window dimension differs from N");
    }
    let data = spec.mu.with_atoms(&DiscreteMeasure::new(spec.dim, spec.eta.atoms().map(|(x, w)| (x.to_vec(), w)).collect(), None)?)?;
    Ok(Lattice::covering(b, opts.n)?.avoiding(&data))
}

/// Monotone Picard scheme from `(u_0, v_0) = 0`:
/// `u_{m+1} = c★ W^R[v_m^{q1} dx + μ]`, `v_{m+1} = c★ W^R[u_m^{q2} dx + η]`,
/// grid functions entering as cell densities on the lattice. On a box the
/// iteration uses `R = 2 diam` and the bounds use `W^{2R}`; on the whole
/// space both use the full potential.
pub fn picard_iterate(spec: &SystemSpec, opts: &PicardOptions) -> Result<PicardRun> {
    spec.validate()?;
    if opts.max_m == 0 || !(opts.tol > 0.0) || !(opts.ceiling > 0.0) {
        return param("need max_m >= 1, tol > 0 and ceiling > 0");
    }
    let lat = lattice_for(spec, opts)?;
    let p_it = spec.potential_params(1.0)?;
    let p_b = spec.potential_params(2.0)?;
    p_it.validate()?;
    let q = QuadratureRule::with_nodes(opts.nodes);
    let constants = spec.constants()?;
    let c = spec.c_star;

    let w_mu = field(&spec.mu, &p_b, &q, &lat)?;
    let omega = source(&w_mu, spec.q2, &spec.eta)?;
    let w_omega = field(&omega, &p_b, &q, &lat)?;
    let w_composite = field(&source(&w_omega, spec.q1, &DiscreteMeasure::zero(spec.dim))?, &p_b, &q, &lat)?;

    let mut u = GridField::zeros(lat.clone());
    let mut v = GridField::zeros(lat.clone());
    let mut states = Vec::new();
    let mut outcome = Outcome::MaxIterations;
    for m in 1..=opts.max_m {
        let un = field(&source(&v, spec.q1, &spec.mu)?, &p_it, &q, &lat)?.map(|x| c * x);
        let vn = field(&source(&u, spec.q2, &spec.eta)?, &p_it, &q, &lat)?.map(|x| c * x);
        let monotone = opts.mode == PicardMode::Plain
            || (un.values.iter().zip(&u.values).all(|(a, b)| a >= b) && vn.values.iter().zip(&v.values).all(|(a, b)| a >= b));
        let bound_ratio = bound_ratio(&un, &vn, &constants, &w_mu, &w_omega, &w_composite);
        let st = IterationState {
            m,
            sup_u: un.sup(),
            sup_v: vn.sup(),
            increment: sup_diff(&un, &u).max(sup_diff(&vn, &v)),
            monotone,
            bound_ratio,
            bound_violation: bound_ratio > 1.0,
            u: un,
            v: vn,
        };
        let blown = st.u.sentinels() + st.v.sentinels() > 0 || st.sup_u.max(st.sup_v) > opts.ceiling;
        let (violation, done) = (st.bound_violation, st.increment < opts.tol);
        u = st.u.clone();
        v = st.v.clone();
        states.push(st);
        if violation {
            outcome = Outcome::BoundViolation;
            break;
        }
        if blown {
            outcome = Outcome::Ceiling;
            break;
        }
        if done {
            outcome = Outcome::Converged;
            break;
        }
    }
    let residual = if outcome == Outcome::Converged {
        let ru = field(&source(&v, spec.q1, &spec.mu)?, &p_it, &q, &lat)?.map(|x| c * x);
        let rv = field(&source(&u, spec.q2, &spec.eta)?, &p_it, &q, &lat)?.map(|x| c * x);
        let rel = |a: &GridField, b: &GridField| {
            let s = a.sup();
            if s == 0.0 { sup_diff(a, b) } else { sup_diff(a, b) / s }
        };
        Some((rel(&u, &ru), rel(&v, &rv)))
    } else {
        None
    };
    Ok(PicardRun { states, outcome, constants, mode: opts.mode, omega, w_mu, w_omega, w_composite, residual })
}

fn bound_ratio(u: &GridField, v: &GridField, c: &IterationConstants, w_mu: &GridField, w_omega: &GridField, w_comp: &GridField) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..u.values.len() {
        let bu = c.c70 * w_comp.values[i] + c.c68 * w_mu.values[i];
        let bv = c.c69 * w_omega.values[i];
        worst = worst.max(ratio(u.values[i], bu)).max(ratio(v.values[i], bv));
    }
    worst
}

/// Nodewise comparison of the final iterate with the a-priori bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub max_ratio_u: f64,
    pub max_ratio_v: f64,
}

impl BoundsReport {
    /// Both ratios at most 1 (`0/0` counts as 0).
    pub fn passed(&self) -> bool {
        self.max_ratio_u <= 1.0 && self.max_ratio_v <= 1.0
    }
}

/// Ratios `u/(c70 W[(W[ω])^{q1}] + c68 W[μ])` and `v/(c69 W[ω])` of the
/// final iterate, with the given constants.
pub fn solution_bounds(run: &PicardRun, constants: &IterationConstants) -> BoundsReport {
    let st = run.last();
    let zero = GridField::zeros(st.u.lattice.clone());
    let u_only = bound_ratio(&st.u, &zero, constants, &run.w_mu, &run.w_omega, &run.w_composite);
    let v_only = bound_ratio(&zero, &st.v, constants, &run.w_mu, &run.w_omega, &run.w_composite);
    BoundsReport { max_ratio_u: u_only, max_ratio_v: v_only }
}

/// Smallness hypothesis `ω(B) <= M★ Cap(B)` on the ball family, with the
/// capacity `Cap_{G_A, s''}` at scale `2R` on a box (`Cap_{I_A, s''}` on the
/// whole space), `A = αβ(q1+β-1)/q1`, `s'' = q1q2/(q1q2-(β-1)^2)`.
pub fn hypothesis_check(
    spec: &SystemSpec,
    run: &PicardRun,
    family: &[(Vec<f64>, f64)],
    cache: &CapacityCache,
) -> Result<ConditionReport> {
    let (alpha, beta) = spec.operator.wolff_params()?;
    let b1 = beta - 1.0;
    let a = alpha * beta * (spec.q1 + b1) / spec.q1;
    let s2 = spec.q1 * spec.q2 / (spec.q1 * spec.q2 - b1 * b1);
    let cap = match spec.radius() {
        Some(r) => CapacityParams::bessel(a, s2).with_bessel_scale(2.0 * r),
        None => CapacityParams::riesz(a, s2),
    };
    condition_check(&run.omega, &cap, family, cache, Some(run.constants.m_star))
}
