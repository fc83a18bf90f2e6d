use super::{poisson_potential, HalfspaceMeasure};
use crate::capacity::{
    capacity_ball, capacity_variational, condition_check, condition_check_by, dyadic_balls, support_centers,
    weighted_ball_capacity, CapacityCache, CapacityKind, CapacityParams, ConditionReport, VariationalOptions,
};
use crate::error::{param, Result};
use crate::inequality::{Extreme, InequalityReport, SampleRow};
use crate::measure::{DiscreteMeasure, Region};
use crate::par::{self, Execution};
use crate::potential::{riesz_params, wolff, wolff_field, BoxDomain, Lattice, PotentialParams, QuadratureRule, Truncation, WolffEvaluator};

fn label(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
    format!("x=({})", parts.join(" "))
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        f64::NAN
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

fn max_ratio(rows: &[SampleRow]) -> f64 {
    rows.iter().map(|r| r.ratio).filter(|r| !r.is_nan()).fold(f64::NAN, f64::max)
}

fn check_samples(samples: &[Vec<f64>], dim: usize, interior: bool) -> Result<()> {
    if samples.is_empty() || samples.iter().any(|x| x.len() != dim) {
        return param("checks need sample points of dimension N");
    }
    if interior && samples.iter().any(|x| !(x[dim - 1] > 0.0)) {
        return crate::error::domain("samples must lie in x_N > 0");
    }
    Ok(())
}

/// `W_{(q1+2)/(q1+1), (q1+1)/q1}`: the Wolff potential matching
/// `I_2[(I_1[ω])^{q1}]`.
fn lela_params(dim: usize, q1: f64) -> PotentialParams {
    PotentialParams::full(dim, (q1 + 2.0) / (q1 + 1.0), (q1 + 1.0) / q1)
}

/// Discretization of the Riesz composition check: the inner field
/// `I_1[ω]` lives on a lattice with `field_n` nodes along the longest side
/// of `field_box`; the composite is evaluated from that field only, so it
/// misses the tail outside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct LelaSetup {
    pub dim: usize,
    pub q1: f64,
    pub field_box: BoxDomain,
    pub field_n: usize,
    pub nodes: usize,
    /// Refinement levels, each doubling `field_n` and `nodes`.
    pub levels: usize,
}

impl LelaSetup {
    /// `N = 3` on `[-4, 4]^3` with 32 nodes per side.
    pub fn new(q1: f64) -> Self {
        LelaSetup { dim: 3, q1, field_box: BoxDomain::cube(3, -4.0, 4.0).expect("valid cube"), field_n: 32, nodes: 512, levels: 1 }
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim as f64;
        if self.dim < 3 {
            return param("Riesz composition needs N >= 3 (I_2 must exist)");
        }
        if !(self.q1 > 0.0 && self.q1 < n / (n - 1.0)) {
            return param(format!("Riesz composition needs 0 < q1 < N/(N-1) = {}", n / (n - 1.0)));
        }
        if self.q1 <= 2.0 / (n - 1.0) {
            return param(format!("q1 <= 2/(N-1) = {}: both sides are infinite for nonzero measures", 2.0 / (n - 1.0)));
        }
        if self.field_box.dim() != self.dim || self.field_n == 0 {
            return param("field box must match N and have nodes");
        }
        Ok(())
    }
}

/// `I_2[(I_1[ω])^{q1}] ≤ c W_{(q1+2)/(q1+1), (q1+1)/q1}[ω]` at the samples,
/// Riesz potentials in radial form. Rows hold `lhs = composite`,
/// `rhs = Wolff`; the report gives the maximum ratio.
pub fn riesz_compose_check(omega: &HalfspaceMeasure, st: &LelaSetup, samples: &[Vec<f64>]) -> Result<InequalityReport> {
    st.validate()?;
    if omega.dim() != st.dim {
        return param("measure dimension differs from the setup");
    }
    check_samples(samples, st.dim, false)?;
    let m = omega.flatten()?;
    let eval = |n_field: usize, nodes: usize| -> Result<Vec<SampleRow>> {
        let q = QuadratureRule::with_nodes(nodes);
        let lat = Lattice::covering(&st.field_box, n_field)?.avoiding(&m);
        let inner = if m.is_zero() {
            DiscreteMeasure::zero(st.dim)
        } else {
            wolff_field(&m, &riesz_params(st.dim, 1.0, Truncation::Full)?, &q, &lat)?.map(|v| v.powf(st.q1)).to_measure()?
        };
        let outer = WolffEvaluator::new(&inner, &riesz_params(st.dim, 2.0, Truncation::Full)?, &q)?;
        let single = lela_params(st.dim, st.q1);
        par::try_map_indexed(Execution::Parallel, samples.len(), |i| {
            let lhs = outer.eval(&samples[i])?;
            let rhs = wolff(&m, &single, &q, &samples[i])?;
            Ok(SampleRow { label: label(&samples[i]), lhs, rhs, ratio: ratio(lhs, rhs) })
        })
    };
    let mut rep = InequalityReport::new("lela", eval(st.field_n, st.nodes)?, Extreme::Max);
    for level in 1..=st.levels {
        let f = 1usize << level;
        rep.refinement.push(max_ratio(&eval(st.field_n * f, st.nodes * f)?));
    }
    rep.notes.push("composite uses the inner field on the setup box only (lower estimate of the left side)".into());
    Ok(rep)
}

/// Discretization of the weighted estimate: the inner Wolff field lives on
/// the upper box `field_box` (which must lie in `x_N >= 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSetup {
    pub dim: usize,
    pub q1: f64,
    pub q2: f64,
    pub field_box: BoxDomain,
    pub field_n: usize,
    pub nodes: usize,
    pub levels: usize,
    /// Ball family for the growth hypothesis; `None` derives dyadic balls
    /// from the support of `ω` (or the samples when `ω = 0`).
    pub family: Option<Vec<(Vec<f64>, f64)>>,
    pub r0: f64,
    pub family_levels: usize,
    pub threshold: f64,
}

impl WeightedSetup {
    /// `N = 3` on `[-4,4]^2 × [0,4]`, 32 nodes per side, six dyadic levels
    /// from `r0 = 1`, hypothesis threshold 1.
    pub fn new(q1: f64, q2: f64) -> Self {
        WeightedSetup {
            dim: 3,
            q1,
            q2,
            field_box: BoxDomain::new(vec![-4.0, -4.0, 0.0], vec![4.0, 4.0, 4.0]).expect("valid box"),
            field_n: 32,
            nodes: 512,
            levels: 1,
            family: None,
            r0: 1.0,
            family_levels: 6,
            threshold: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim as f64;
        if self.dim < 2 {
            return param("weighted estimate needs N >= 2");
        }
        if !(self.q1 >= 1.0 && self.q1 * self.q2 > 1.0 && self.q2.is_finite()) {
            return param("weighted estimate needs q1 >= 1 and q1 q2 > 1");
        }
        if (self.q1 + 2.0) / self.q1 >= n {
            return param(format!("q1 <= 2/(N-1) = {}: the Wolff potential is infinite", 2.0 / (n - 1.0)));
        }
        if self.field_box.dim() != self.dim || self.field_box.lo[self.dim - 1] < 0.0 || self.field_n == 0 {
            return param("field box must match N and lie in x_N >= 0");
        }
        Ok(())
    }

    /// `(α, s)` of the hypothesis capacity `Cap^ρ_{(q1+2)/q1, q1q2/(q1q2-1)}`.
    pub fn hypothesis_params(&self) -> (f64, f64) {
        (((self.q1 + 2.0) / self.q1), self.q1 * self.q2 / (self.q1 * self.q2 - 1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedReport {
    pub report: InequalityReport,
    /// `ω(B̄) / (t^{N-αs} max{x_N, t}^{1-s})` on the ball family.
    pub hypothesis: ConditionReport,
}

impl WeightedReport {
    pub fn hypothesis_held(&self) -> bool {
        self.hypothesis.passed() == Some(true)
    }
}

/// `I_1[(W_{(q1+2)/(q1+1), (q1+1)/q1}[ω])^{q2} ρ χ_{R^N_+}] ≤ c I_1[ω]` at
/// interior samples, after checking the ball-growth hypothesis on a dyadic
/// family. Rows hold `lhs` and `rhs = I_1[ω]`; the report gives the maximum.
pub fn weighted_estimate_check(omega: &HalfspaceMeasure, st: &WeightedSetup, samples: &[Vec<f64>]) -> Result<WeightedReport> {
    st.validate()?;
    let n = st.dim;
    if omega.dim() != n {
        return param("measure dimension differs from the setup");
    }
    check_samples(samples, n, true)?;
    let m = omega.flatten()?;
    let family = match &st.family {
        Some(f) => f.clone(),
        None => {
            let mut centers = support_centers(&m, 64);
            if centers.is_empty() {
                centers = samples.to_vec();
            }
            dyadic_balls(&centers, st.r0, st.family_levels)
        }
    };
    let (a, s) = st.hypothesis_params();
    let cache = CapacityCache::in_memory(CapacityCache::DEFAULT_H);
    let hypothesis = condition_check(&m, &CapacityParams::weighted_halfspace(a, s), &family, &cache, Some(st.threshold))?;

    let i1 = riesz_params(n, 1.0, Truncation::Full)?;
    let eval = |n_field: usize, nodes: usize| -> Result<Vec<SampleRow>> {
        let q = QuadratureRule::with_nodes(nodes);
        let lat = Lattice::covering(&st.field_box, n_field)?.avoiding(&m);
        let inner = if m.is_zero() {
            DiscreteMeasure::zero(n)
        } else {
            let w = wolff_field(&m, &lela_params(n, st.q1), &q, &lat)?;
            let mut g = w.map(|v| v.powf(st.q2));
            for (i, v) in g.values.iter_mut().enumerate() {
                *v *= lat.node(i)[n - 1];
            }
            g.to_measure()?
        };
        let outer = WolffEvaluator::new(&inner, &i1, &q)?;
        par::try_map_indexed(Execution::Parallel, samples.len(), |i| {
            let lhs = outer.eval(&samples[i])?;
            let rhs = wolff(&m, &i1, &q, &samples[i])?;
            Ok(SampleRow { label: label(&samples[i]), lhs, rhs, ratio: ratio(lhs, rhs) })
        })
    };
    let mut report = InequalityReport::new("weighted", eval(st.field_n, st.nodes)?, Extreme::Max);
    for level in 1..=st.levels {
        let f = 1usize << level;
        report.refinement.push(max_ratio(&eval(st.field_n * f, st.nodes * f)?));
    }
    Ok(WeightedReport { report, hypothesis })
}

/// Discretization of the boundary-capacity comparison: both capacities are
/// solved at `h`, then at `h/2, h/4, ...` for `levels` refinements, with the
/// same relative source margin.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCapSetup {
    pub h: f64,
    pub levels: usize,
    pub margin: f64,
}

impl Default for BoundaryCapSetup {
    fn default() -> Self {
        BoundaryCapSetup { h: 1.0 / 16.0, levels: 1, margin: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCapReport {
    /// One row per resolution: `lhs = Cap^ρ_{α,s}(E × {0})`,
    /// `rhs = Cap_{I_{α+2/s'-1}, s}(E)`. `ratio` is the coarsest value and
    /// `refinement` the ratio per resolution.
    pub report: InequalityReport,
    /// `α + 2/s' = N - 1`: both capacities are invariant under dilation.
    pub critical: bool,
}

/// Compares the weighted half-space capacity of the flat set `E × {0}`
/// with the Riesz capacity of `E` in `R^{N-1}` of order `α + 2/s' - 1`.
/// `E` is the box `[lo, hi]` in `N - 1` coordinates.
pub fn boundary_capacity_equiv_check(lo: &[f64], hi: &[f64], alpha: f64, s: f64, st: &BoundaryCapSetup) -> Result<BoundaryCapReport> {
    let n1 = lo.len();
    let n = n1 + 1;
    if n1 == 0 || hi.len() != n1 || n > 3 {
        return param("boundary set must be a box in R^{N-1} with N <= 3");
    }
    if !(s > 1.0 && alpha > 0.0) {
        return param("boundary capacity comparison needs alpha > 0 and s > 1");
    }
    let sp = s / (s - 1.0);
    let order = alpha + 2.0 / sp - 1.0;
    let edge = alpha + 2.0 / sp - (n1 as f64);
    if edge > 1e-12 {
        return param(format!("boundary capacity comparison needs alpha + 2/s' <= N - 1, got {}", alpha + 2.0 / sp));
    }
    if !(order > 0.0) {
        return param(format!("boundary Riesz order alpha + 2/s' - 1 = {order} must be positive"));
    }
    if !(st.h > 0.0) {
        return param("resolution must be positive");
    }
    let mut flat_lo = lo.to_vec();
    flat_lo.push(0.0);
    let mut flat_hi = hi.to_vec();
    flat_hi.push(0.0);
    let flat = Region::Box { lo: flat_lo, hi: flat_hi };
    let base = Region::Box { lo: lo.to_vec(), hi: hi.to_vec() };
    let wp = CapacityParams::weighted_halfspace(alpha, s);
    let rp = CapacityParams::riesz(order, s);
    let mut rows = Vec::new();
    for level in 0..=st.levels {
        let h = st.h / (1usize << level) as f64;
        let opts = VariationalOptions::new(h).with_margin(st.margin);
        let l = capacity_variational(&wp, &flat, n, &opts)?.value;
        let r = capacity_variational(&rp, &base, n1, &opts)?.value;
        rows.push(SampleRow { label: format!("h={h}"), lhs: l, rhs: r, ratio: ratio(l, r) });
    }
    let series: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let mut report = InequalityReport::new("boundary-cap", rows, Extreme::Max);
    report.ratio = series[0];
    report.refinement = series;
    let critical = edge.abs() <= 1e-12;
    if critical {
        report.notes.push("alpha + 2/s' = N - 1: scale-invariant case, both capacities vanish in the continuum".into());
    }
    Ok(BoundaryCapReport { report, critical })
}

/// Ball families and quadrature of the trace conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSetup {
    /// Largest dyadic radius.
    pub r0: f64,
    pub levels: usize,
    /// Midpoints per axis for `∫_B ρ (P[σ1])^{q2}`.
    pub quad: usize,
    /// Capacity of condition (ii): Riesz as stated, or Bessel at
    /// `bessel_scale`.
    pub boundary_kind: CapacityKind,
    pub bessel_scale: f64,
    pub threshold: Option<f64>,
}

impl Default for TraceSetup {
    fn default() -> Self {
        TraceSetup { r0: 1.0, levels: 6, quad: 16, boundary_kind: CapacityKind::Riesz, bessel_scale: 1.0, threshold: Some(1.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    /// Condition (i) on interior balls `B̄((z, 2t), t)`.
    pub interior: ConditionReport,
    /// Condition (ii) on boundary balls `B̄'(z, t)`.
    pub boundary: ConditionReport,
}

impl TraceReport {
    /// Both conditions within the threshold; `None` without a threshold.
    pub fn admits(&self) -> Option<bool> {
        Some(self.interior.passed()? && self.boundary.passed()?)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("family,center,radius,mass,capacity,ratio\n");
        for (name, rep) in [("interior", &self.interior), ("boundary", &self.boundary)] {
            for line in rep.to_csv().lines().skip(1) {
                s.push_str(&format!("{name},{line}\n"));
            }
        }
        s.push_str(&format!(
            "# interior_max={:e} boundary_max={:e} admits={}\n",
            self.interior.max_ratio,
            self.boundary.max_ratio,
            self.admits().map_or("n/a".to_string(), |b| b.to_string())
        ));
        s
    }
}

/// `∫_{B̄(c,t) ∩ R^N_+} x_N (P[σ](x))^e dx` by the midpoint rule on `m^N`
/// sub-cubes of the bounding cube.
fn ball_integral(sigma: &DiscreteMeasure, e: f64, c: &[f64], t: f64, m: usize) -> Result<f64> {
    let n = c.len();
    let side = 2.0 * t / m as f64;
    let vol = side.powi(n as i32);
    let total = m.pow(n as u32);
    let parts = par::try_map_indexed(Execution::Parallel, total, |flat| -> Result<f64> {
        let mut x = vec![0.0; n];
        let mut f = flat;
        for k in (0..n).rev() {
            x[k] = c[k] - t + (f % m) as f64 * side + 0.5 * side;
            f /= m;
        }
        if crate::measure::dist2(&x, c) > t * t || x[n - 1] <= 0.0 {
            return Ok(0.0);
        }
        Ok(x[n - 1] * poisson_potential(sigma, &x)?.powf(e) * vol)
    })?;
    Ok(parts.iter().sum())
}

/// The two sufficient conditions for the boundary-trace system:
/// (i) `∫_K ρ (P[σ1])^{q2} ≤ c Cap^ρ_{(q1+2)/q1, q1q2/(q1q2-1)}(K)` on
/// interior balls, (ii) `σ2(G) ≤ c Cap_{I_{2(q2+1)/(q1q2)}, q1q2/(q1q2-1)}(G)`
/// on boundary balls. `σ1`, `σ2` live in `N - 1` coordinates.
pub fn trace_condition_check(
    sigma1: &DiscreteMeasure,
    sigma2: &DiscreteMeasure,
    q1: f64,
    q2: f64,
    st: &TraceSetup,
    cache: &CapacityCache,
) -> Result<TraceReport> {
    let n1 = sigma1.dim();
    let n = n1 + 1;
    if sigma2.dim() != n1 {
        return param("boundary measures must share the dimension N-1");
    }
    let nf = n as f64;
    if !(q1 >= 1.0 && q1 < nf / (nf - 1.0)) {
        return param(format!("trace conditions need 1 <= q1 < N/(N-1) = {}", nf / (nf - 1.0)));
    }
    if !(q1 * q2 > 1.0 && q2.is_finite()) {
        return param("trace conditions need q1 q2 > 1");
    }
    if !(st.r0 > 0.0) || st.levels == 0 || st.quad == 0 {
        return param("trace setup needs r0 > 0, levels >= 1 and quad >= 1");
    }
    let s = q1 * q2 / (q1 * q2 - 1.0);
    let centers = |primary: &DiscreteMeasure, other: &DiscreteMeasure| {
        let mut c = support_centers(primary, 64);
        if c.is_empty() {
            c = support_centers(other, 64);
        }
        if c.is_empty() {
            c = vec![vec![0.0; n1]];
        }
        c
    };

    let lifted: Vec<Vec<f64>> = centers(sigma1, sigma2)
        .into_iter()
        .map(|mut z| {
            z.push(0.0);
            z
        })
        .collect();
    let mut family_i = Vec::new();
    for z in &lifted {
        for j in 0..st.levels {
            let t = st.r0 / (1u64 << j) as f64;
            let mut c = z.clone();
            c[n - 1] = 2.0 * t;
            family_i.push((c, t));
        }
    }
    let a_i = (q1 + 2.0) / q1;
    let interior = condition_check_by(
        &family_i,
        |c, t| if sigma1.is_zero() { Ok(0.0) } else { ball_integral(sigma1, q2, c, t, st.quad) },
        |c, t| weighted_ball_capacity(a_i, s, n, c[n - 1], t),
        st.threshold,
    )?;

    let a_ii = 2.0 * (q2 + 1.0) / (q1 * q2);
    let cap = match st.boundary_kind {
        CapacityKind::Riesz => CapacityParams::riesz(a_ii, s),
        CapacityKind::Bessel => CapacityParams::bessel(a_ii, s).with_bessel_scale(st.bessel_scale),
        CapacityKind::WeightedHalfspace => return param("condition (ii) uses a Riesz or Bessel capacity"),
    };
    let family_ii = dyadic_balls(&centers(sigma2, sigma1), st.r0, st.levels);
    let boundary = condition_check_by(
        &family_ii,
        |c, t| crate::measure::BallMassIndex::new(sigma2).ball_mass(c, t),
        |_, t| Ok(capacity_ball(&cap, t, n1, cache)?.value),
        st.threshold,
    )?;
    Ok(TraceReport { interior, boundary })
}
