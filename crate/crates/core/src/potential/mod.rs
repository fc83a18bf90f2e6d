//! Wolff potentials `W_{α,β}[μ](x) = ∫_0^∞ (μ(B_r(x)) / r^{N-αβ})^{1/(β-1)} dr/r`,
//! their truncations, and Riesz potentials in radial form.

mod engine;
mod field;
mod maximal;

pub use engine::WolffEvaluator;
pub use field::{wolff_field, wolff_field_with, GridField, Lattice};
pub use maximal::maximal_function;

use crate::error::{domain, param, Result};
use crate::measure::DiscreteMeasure;

/// Smallest admissible `β - 1`.
pub const BETA_GUARD: f64 = 1e-6;

/// Axis-aligned box domain with exact distance to its boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return domain("box needs matching finite corners with lo < hi");
        }
        Ok(BoxDomain { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Distance from `x` to the boundary; `None` outside the closed box.
    pub fn dist_to_boundary(&self, x: &[f64]) -> Option<f64> {
        if x.len() != self.dim() || !self.contains(x) {
            return None;
        }
        Some(x.iter().zip(self.lo.iter().zip(&self.hi)).map(|(v, (a, b))| (v - a).min(b - v)).fold(f64::INFINITY, f64::min))
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }
}

/// Upper limit of the radial integral.
#[derive(Debug, Clone, PartialEq)]
pub enum Truncation {
    Full,
    Radius(f64),
    /// Upper limit `δ · d(x)` with `d` the distance to the boundary of the box.
    DistanceAdapted { delta: f64, domain: BoxDomain },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialParams {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub truncation: Truncation,
}

impl PotentialParams {
    pub fn full(dim: usize, alpha: f64, beta: f64) -> Self {
        PotentialParams { dim, alpha, beta, truncation: Truncation::Full }
    }

    pub fn truncated(dim: usize, alpha: f64, beta: f64, r: f64) -> Self {
        PotentialParams { dim, alpha, beta, truncation: Truncation::Radius(r) }
    }

    pub fn with_truncation(&self, truncation: Truncation) -> Self {
        PotentialParams { truncation, ..self.clone() }
    }

    /// Decay rate `(N - αβ)/(β - 1)` of the integrand beyond the support.
    pub fn gamma(&self) -> f64 {
        (self.dim as f64 - self.alpha * self.beta) / (self.beta - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return param("dimension must be positive");
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return param(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta.is_finite() && self.beta >= 1.0 + BETA_GUARD) {
            return param(format!("beta must be at least 1 + {BETA_GUARD}, got {}", self.beta));
        }
        match &self.truncation {
            Truncation::Full => {
                if self.alpha * self.beta >= self.dim as f64 {
                    return param(format!(
                        "untruncated potential needs beta < N/alpha (alpha={}, beta={}, N={})",
                        self.alpha, self.beta, self.dim
                    ));
                }
            }
            Truncation::Radius(r) => {
                if !(r.is_finite() && *r > 0.0) {
                    return param(format!("truncation radius must be positive, got {r}"));
                }
            }
            Truncation::DistanceAdapted { delta, domain } => {
                if !(*delta > 0.0 && *delta < 1.0) {
                    return param(format!("delta must lie in (0,1), got {delta}"));
                }
                if domain.dim() != self.dim {
                    return param("domain dimension differs from N");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    Analytic,
    None,
}

/// Radial integration range: derived from the measure and the point, or fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialBounds {
    Auto,
    Fixed { r_min: f64, r_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub nodes: usize,
    pub tail: TailMode,
    pub bounds: RadialBounds,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule { nodes: 512, tail: TailMode::Analytic, bounds: RadialBounds::Auto }
    }
}

impl QuadratureRule {
    pub fn with_nodes(nodes: usize) -> Self {
        QuadratureRule { nodes, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return param(format!("quadrature needs at least 16 nodes, got {}", self.nodes));
        }
        if let RadialBounds::Fixed { r_min, r_max } = self.bounds {
            if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
                return param("fixed radial bounds need 0 < r_min < r_max < inf");
            }
        }
        Ok(())
    }
}

/// `W_{α,β}[m](x)`; `+∞` at atoms of positive weight.
pub fn wolff(m: &DiscreteMeasure, p: &PotentialParams, q: &QuadratureRule, x: &[f64]) -> Result<f64> {
    WolffEvaluator::new(m, p, q)?.eval(x)
}

/// Distance-adapted truncation `W^{δ d(·)}`; `x` must lie in the box.
pub fn wolff_truncated_dist(m: &DiscreteMeasure, p: &PotentialParams, q: &QuadratureRule, x: &[f64]) -> Result<f64> {
    match &p.truncation {
        Truncation::DistanceAdapted { domain, .. } => {
            if domain.dist_to_boundary(x).is_none() {
                return domain_err(x);
            }
        }
        _ => return param("wolff_truncated_dist needs a distance-adapted truncation"),
    }
    wolff(m, p, q, x)
}

fn domain_err<T>(x: &[f64]) -> Result<T> {
    domain(format!("point {x:?} lies outside the domain"))
}

/// Riesz potential in radial form, `∫ ν(B_r(x)) r^{α-N} dr/r`. This is
/// `W_{α/2,2}` and equals `Σ w |x-y|^{α-N} / (N-α)` for atoms.
pub fn riesz(m: &DiscreteMeasure, alpha: f64, q: &QuadratureRule, x: &[f64]) -> Result<f64> {
    riesz_params(m.dim(), alpha, Truncation::Full).and_then(|p| wolff(m, &p, q, x))
}

/// Parameters of the Riesz potential `I_α` as a Wolff potential.
pub fn riesz_params(dim: usize, alpha: f64, truncation: Truncation) -> Result<PotentialParams> {
    if !(alpha > 0.0 && alpha < dim as f64) {
        return param(format!("Riesz order must lie in (0, N), got {alpha} with N={dim}"));
    }
    Ok(PotentialParams { dim, alpha: alpha / 2.0, beta: 2.0, truncation })
}
