//! Riesz, truncated-Bessel and weighted half-space capacities.

mod cache;
mod condition;
mod conv;
mod variational;

pub use cache::{CapacityCache, CACHE_ENV};
pub use condition::{condition_check, condition_check_by, condition_check_with, dyadic_balls, support_centers, BallRecord, ConditionReport};
pub use variational::{capacity_variational, VariationalOptions};

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityKind {
    Riesz,
    /// Riesz kernel truncated at the scale `bessel_scale`.
    Bessel,
    /// Sources restricted to `x_N > 0` with weight `x_N`.
    WeightedHalfspace,
}

impl CapacityKind {
    pub fn name(self) -> &'static str {
        match self {
            CapacityKind::Riesz => "riesz",
            CapacityKind::Bessel => "bessel",
            CapacityKind::WeightedHalfspace => "weighted-halfspace",
        }
    }
}

/// `alpha` is the kernel order `A` of `I_A`, `s` the integrability exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityParams {
    pub kind: CapacityKind,
    pub alpha: f64,
    pub s: f64,
    pub bessel_scale: f64,
}

impl CapacityParams {
    pub fn riesz(alpha: f64, s: f64) -> Self {
        CapacityParams { kind: CapacityKind::Riesz, alpha, s, bessel_scale: 1.0 }
    }

    pub fn bessel(alpha: f64, s: f64) -> Self {
        CapacityParams { kind: CapacityKind::Bessel, alpha, s, bessel_scale: 1.0 }
    }

    pub fn weighted_halfspace(alpha: f64, s: f64) -> Self {
        CapacityParams { kind: CapacityKind::WeightedHalfspace, alpha, s, bessel_scale: 1.0 }
    }

    pub fn with_bessel_scale(mut self, r: f64) -> Self {
        self.bessel_scale = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return param("capacity order must be positive");
        }
        if !(self.s > 1.0 && self.s.is_finite()) {
            return param("capacity exponent s must exceed 1");
        }
        if !(self.bessel_scale > 0.0 && self.bessel_scale.is_finite()) {
            return param("bessel scale must be positive");
        }
        Ok(())
    }

    /// Exponent of `ρ` in `Cap(B_ρ)` for Riesz kernels.
    pub fn scaling_exponent(&self, dim: usize) -> f64 {
        dim as f64 - self.alpha * self.s
    }

    /// Radial kernel value at distance `d > 0`.
    pub(crate) fn kernel(&self, dim: usize, d: f64) -> f64 {
        let n = dim as f64;
        let a = self.alpha;
        match self.kind {
            CapacityKind::Riesz | CapacityKind::WeightedHalfspace => d.powf(a - n) / (n - a),
            CapacityKind::Bessel => {
                let r = self.bessel_scale;
                if d >= r {
                    0.0
                } else if (a - n).abs() < 1e-12 {
                    (r / d).ln()
                } else {
                    (d.powf(a - n) - r.powf(a - n)) / (n - a)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMethod {
    Variational,
    BallScaling,
    ZeroCriterion,
}

impl CapacityMethod {
    pub fn name(self) -> &'static str {
        match self {
            CapacityMethod::Variational => "variational",
            CapacityMethod::BallScaling => "ball-scaling",
            CapacityMethod::ZeroCriterion => "zero-criterion",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    /// Upper bound on the discrete capacity for variational solves.
    pub value: f64,
    pub method: CapacityMethod,
    /// `Cap(B̄_1)` used for ball scaling.
    pub reference: Option<f64>,
    /// Grid spacing of the underlying solve.
    pub resolution: Option<f64>,
    /// Dual lower bound on the discrete capacity.
    pub lower_bound: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl CapacityEstimate {
    pub fn zero() -> Self {
        CapacityEstimate {
            value: 0.0,
            method: CapacityMethod::ZeroCriterion,
            reference: None,
            resolution: None,
            lower_bound: Some(0.0),
            iterations: 0,
            converged: true,
        }
    }
}

/// True when every compact set is null: `A s ≥ N` for Riesz kernels.
/// Truncated kernels have positive capacity on nonempty sets.
pub fn capacity_zero_test(p: &CapacityParams, dim: usize) -> Result<bool> {
    p.validate()?;
    Ok(match p.kind {
        CapacityKind::Riesz => p.alpha * p.s >= dim as f64,
        _ => false,
    })
}

/// `Cap_{G_{A,s}}({x}) > 0` iff `A s > N`.
pub fn point_capacity_positive(p: &CapacityParams, dim: usize) -> Result<bool> {
    p.validate()?;
    if p.kind != CapacityKind::Bessel {
        return param("point capacity criterion applies to the bessel kind");
    }
    Ok(p.alpha * p.s > dim as f64)
}

/// Capacity of the closed ball of radius `rho` by scaling the unit-ball
/// reference. Riesz: `ρ^{N-As} Cap(B̄_1)`, zero once `As ≥ N`. Bessel: the
/// reference times [`bessel_profile`] normalized at `ρ = 1`.
pub fn capacity_ball(p: &CapacityParams, rho: f64, dim: usize, cache: &CapacityCache) -> Result<CapacityEstimate> {
    p.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return crate::error::domain("ball radius must be positive");
    }
    let n = dim as f64;
    match p.kind {
        CapacityKind::Riesz => {
            if p.alpha >= n {
                return Ok(CapacityEstimate::zero());
            }
            if p.alpha * p.s >= n {
                // Balls are null once As ≥ N.
                return Ok(CapacityEstimate::zero());
            }
            let r = cache.reference(p, dim)?;
            Ok(CapacityEstimate {
                value: rho.powf(p.scaling_exponent(dim)) * r.value,
                method: CapacityMethod::BallScaling,
                reference: Some(r.value),
                resolution: r.resolution,
                lower_bound: None,
                iterations: r.iterations,
                converged: r.converged,
            })
        }
        CapacityKind::Bessel => {
            let r = cache.reference(p, dim)?;
            let f = bessel_profile(p, dim, rho) / bessel_profile(p, dim, 1.0);
            Ok(CapacityEstimate {
                value: f * r.value,
                method: CapacityMethod::BallScaling,
                reference: Some(r.value),
                resolution: r.resolution,
                lower_bound: None,
                iterations: r.iterations,
                converged: r.converged,
            })
        }
        CapacityKind::WeightedHalfspace => {
            param("ball scaling for the weighted half-space capacity depends on the center; use weighted_ball_capacity")
        }
    }
}

/// Order-of-magnitude profile of `Cap_{G_{A,s}}(B̄_ρ)`, continuous in `ρ`.
pub fn bessel_profile(p: &CapacityParams, dim: usize, rho: f64) -> f64 {
    let n = dim as f64;
    let rb = p.bessel_scale;
    let t = rho.min(rb);
    let as_ = p.alpha * p.s;
    let small = if (as_ - n).abs() < 1e-12 {
        (2.0 * rb / t).ln().powf(1.0 - p.s)
    } else if as_ < n {
        t.powf(n - as_)
    } else {
        rb.powf(n - as_)
    };
    if rho > rb {
        small * (rho / rb).powf(n)
    } else {
        small
    }
}

/// Two-sided representative of `Cap^ρ_{α,s}(B̄_t(x))` for a ball centered in
/// the closed half-space: `t^{N-αs} max(x_N, t)^{1-s}`.
pub fn weighted_ball_capacity(alpha: f64, s: f64, dim: usize, x_n: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || x_n < 0.0 {
        return crate::error::domain("weighted ball needs t > 0 and x_N >= 0");
    }
    if !(s > 1.0) || !(alpha > 0.0) {
        return param("weighted capacity needs alpha > 0 and s > 1");
    }
    Ok(t.powf(dim as f64 - alpha * s) * x_n.max(t).powf(1.0 - s))
}
