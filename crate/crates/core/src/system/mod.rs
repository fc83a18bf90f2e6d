//! Lane-Emden systems `-Δ_p u = v^{q1} + μ`, `-Δ_p v = u^{q2} + η` and their
//! k-Hessian analogs, modeled through the Wolff-potential representation
//! `u = c★ W_{α,β}[v^{q1} + μ]`.

mod config;
mod picard;

pub use config::{parse_run_config, RunConfig};
pub use picard::{
    hypothesis_check, picard_iterate, solution_bounds, BoundsReport, IterationState, Outcome, PicardOptions, PicardRun,
    PicardMode,
};

use crate::error::{param, Result};
use crate::measure::DiscreteMeasure;
use crate::potential::{BoxDomain, PotentialParams, Truncation};

/// Differential operator of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    /// p-Laplacian, `1 < p < N`.
    PLaplace(f64),
    /// k-Hessian, `2k < N`.
    KHessian(u32),
}

impl Operator {
    /// Wolff parameters `(α, β)` of the representation.
    pub fn wolff_params(&self) -> Result<(f64, f64)> {
        match *self {
            Operator::PLaplace(p) => Ok((1.0, p)),
            Operator::KHessian(k) => hessian_params(k),
        }
    }

    /// The exponent `β - 1` (`p - 1` or `k`).
    fn degree(&self) -> f64 {
        match *self {
            Operator::PLaplace(p) => p - 1.0,
            Operator::KHessian(k) => k as f64,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let n = dim as f64;
        match *self {
            Operator::PLaplace(p) if !(p > 1.0 && p < n) => param(format!("p-Laplace needs 1 < p < N, got p = {p}, N = {dim}")),
            Operator::KHessian(k) if k == 0 || 2 * k as usize >= dim => {
                param(format!("k-Hessian needs k >= 1 and 2k < N, got k = {k}, N = {dim}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Operator::PLaplace(p) => format!("p-laplace(p={p})"),
            Operator::KHessian(k) => format!("k-hessian(k={k})"),
        }
    }
}

/// `(2k/(k+1), k+1)`.
pub fn hessian_params(k: u32) -> Result<(f64, f64)> {
    if k == 0 {
        return param("k-Hessian needs k >= 1");
    }
    let k = k as f64;
    Ok((2.0 * k / (k + 1.0), k + 1.0))
}

/// Liouville region: `true` iff only the trivial nonnegative supersolution
/// exists on the whole space. For the p-Laplacian this is
/// `p(q1q2 + (p-1)max{q1,q2}) / (q1q2 - (p-1)^2) >= N`; the k-Hessian form
/// replaces `p` by `2k` and `p - 1` by `k`.
pub fn liouville_check(op: Operator, q1: f64, q2: f64, dim: usize) -> Result<bool> {
    if !(q1 > 0.0 && q2 > 0.0) {
        return param("exponents must be positive");
    }
    let d = op.degree();
    if !(d > 0.0) {
        return param("operator degree must be positive");
    }
    let prod = q1 * q2;
    if prod <= d * d {
        return param(format!("Liouville test needs q1 q2 > {}, got {prod}", d * d));
    }
    let lead = match op {
        Operator::PLaplace(p) => p,
        Operator::KHessian(k) => 2.0 * k as f64,
    };
    Ok(lead * (prod + d * q1.max(q2)) / (prod - d * d) >= dim as f64)
}

/// Subcritical range of `q1` for existence with small data:
/// `q1 < N(p-1)/(N-p)`, or `s1 < Nk/(N-2k)` for the k-Hessian with `s1 >= k`
/// on bounded domains and `s1 > 0` on the whole space.
pub fn subcritical_check(op: Operator, q1: f64, dim: usize, bounded: bool) -> Result<bool> {
    op.validate(dim)?;
    let n = dim as f64;
    Ok(match op {
        Operator::PLaplace(p) => q1 > 0.0 && q1 < n * (p - 1.0) / (n - p),
        Operator::KHessian(k) => {
            let k = k as f64;
            let floor_ok = if bounded { q1 >= k } else { q1 > 0.0 };
            floor_ok && q1 < n * k / (n - 2.0 * k)
        }
    })
}

/// Domain of the system.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemDomain {
    WholeSpace,
    /// Bounded box; potentials are truncated at `R = 2 diam`.
    Box(BoxDomain),
}

/// A Lane-Emden system with measure data.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub operator: Operator,
    pub dim: usize,
    /// Exponent in the `u` equation (`q1` or `s1`).
    pub q1: f64,
    /// Exponent in the `v` equation (`q2` or `s2`).
    pub q2: f64,
    pub mu: DiscreteMeasure,
    pub eta: DiscreteMeasure,
    pub domain: SystemDomain,
    pub c_star: f64,
    pub c71: f64,
}

impl SystemSpec {
    pub fn new(operator: Operator, dim: usize, q1: f64, q2: f64, mu: DiscreteMeasure, eta: DiscreteMeasure, domain: SystemDomain) -> Self {
        SystemSpec { operator, dim, q1, q2, mu, eta, domain, c_star: 1.0, c71: 1.0 }
    }

    pub fn with_c_star(mut self, c: f64) -> Self {
        self.c_star = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.operator.validate(self.dim)?;
        let d = self.operator.degree();
        if !(self.q1 > 0.0 && self.q2 > 0.0 && self.q1.is_finite() && self.q2.is_finite()) {
            return param("exponents must be positive and finite");
        }
        if self.q1 * self.q2 <= d * d {
            return param(format!("system needs q1 q2 > {}", d * d));
        }
        if !(self.c_star > 0.0 && self.c_star.is_finite() && self.c71 > 0.0 && self.c71.is_finite()) {
            return param("c_star and c71 must be positive");
        }
        if self.mu.dim() != self.dim || self.eta.dim() != self.dim {
            return param("data measures must live in R^N");
        }
        if let SystemDomain::Box(b) = &self.domain {
            if b.dim() != self.dim {
                return param("domain box dimension differs from N");
            }
        }
        Ok(())
    }

    /// Truncation radius of the iteration (`None` on the whole space).
    pub fn radius(&self) -> Option<f64> {
        match &self.domain {
            SystemDomain::WholeSpace => None,
            SystemDomain::Box(b) => Some(2.0 * b.diameter()),
        }
    }

    /// Potential parameters truncated at `factor · R` (full on the whole space).
    pub fn potential_params(&self, factor: f64) -> Result<PotentialParams> {
        let (alpha, beta) = self.operator.wolff_params()?;
        let truncation = match self.radius() {
            None => Truncation::Full,
            Some(r) => Truncation::Radius(factor * r),
        };
        Ok(PotentialParams { dim: self.dim, alpha, beta, truncation })
    }

    pub fn constants(&self) -> Result<IterationConstants> {
        let (_, beta) = self.operator.wolff_params()?;
        IterationConstants::new(self.c_star, beta, self.q1, self.q2, self.c71)
    }
}

/// Constants of the a-priori bounds
/// `v_m <= c69 W[ω]`, `u_m <= c70 W[(W[ω])^q] + c68 W[μ]`
/// and the smallness threshold `M★`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConstants {
    pub c68: f64,
    pub c69: f64,
    pub c70: f64,
    pub m_star: f64,
}

impl IterationConstants {
    pub fn new(c_star: f64, beta: f64, q: f64, s: f64, c71: f64) -> Result<Self> {
        if !(beta > 1.0 && q > 0.0 && s > 0.0 && c_star > 0.0 && c71 > 0.0) {
            return param("iteration constants need beta > 1 and positive q, s, c_star, c71");
        }
        let g = 1.0 / (beta - 1.0);
        let two_g = 2f64.powf(g);
        let c68 = c_star * two_g;
        let c69 = c_star * 2.0 * two_g * (c68.powf(s) * 2f64.powf(s - 1.0) + 1.0).powf(g);
        let c70 = c_star * two_g * c69.powf(q * g);
        // M★ in logs: c70^s overflows for β close to 1.
        let ln2 = std::f64::consts::LN_2;
        let ln_denom = ln2 + c_star.ln() + g * ln2 + g * (s * c70.ln() + (s - 1.0) * ln2) + c71.ln();
        let m_star = ((beta - 1.0).powi(3) / (q * s) * (c69.ln() - ln_denom)).exp();
        Ok(IterationConstants { c68, c69, c70, m_star })
    }

    /// All bound constants multiplied by `f` (`M★` unchanged).
    pub fn scaled(&self, f: f64) -> Self {
        IterationConstants { c68: self.c68 * f, c69: self.c69 * f, c70: self.c70 * f, m_star: self.m_star }
    }
}

/// `a^{1/(p-1)} (|x-x0|^{-(N-p)/(p-1)} - R^{-(N-p)/(p-1)})_+`; `R` may be
/// infinite.
pub fn corollary_d_majorant(a: f64, x0: &[f64], p: f64, dim: usize, r: f64, x: &[f64]) -> Result<f64> {
    let n = dim as f64;
    if !(p > 1.0 && p < n) {
        return param("majorant needs 1 < p < N");
    }
    if !(r > 0.0) || !(a >= 0.0) {
        return param("majorant needs R > 0 and a >= 0");
    }
    if x0.len() != dim || x.len() != dim {
        return param("points must lie in R^N");
    }
    let e = (n - p) / (p - 1.0);
    let d = crate::measure::dist2(x, x0).sqrt();
    let tail = if r.is_finite() { r.powf(-e) } else { 0.0 };
    let core = if d == 0.0 { f64::INFINITY } else { d.powf(-e) };
    Ok(a.powf(1.0 / (p - 1.0)) * (core - tail).max(0.0))
}
