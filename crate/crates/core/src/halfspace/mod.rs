//! Potentials on the half-space `R^N_+ = {x_N > 0}`: Poisson and Green
//! kernels (through their two-sided comparison forms with constant 1), the
//! weight `ρ(x) = x_N`, and checks of the boundary-trace estimates.

mod checks;

pub use checks::{
    boundary_capacity_equiv_check, riesz_compose_check, trace_condition_check, weighted_estimate_check, BoundaryCapReport,
    BoundaryCapSetup, LelaSetup, TraceReport, TraceSetup, WeightedReport, WeightedSetup,
};

use crate::error::{domain, param, Error, Result};
use crate::measure::{dist2, DiscreteMeasure, GridDensity};

/// A measure on the closed half-space: an interior part in `R^N` and a
/// boundary part on `x_N = 0`, stored in `N - 1` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceMeasure {
    pub interior: DiscreteMeasure,
    pub boundary: DiscreteMeasure,
}

impl HalfspaceMeasure {
    pub fn new(interior: DiscreteMeasure, boundary: DiscreteMeasure) -> Result<Self> {
        let n = interior.dim();
        if n < 2 || boundary.dim() + 1 != n {
            return param("half-space measures need N >= 2 and a boundary part in N-1 coordinates");
        }
        if interior.atoms().any(|(x, w)| w > 0.0 && x[n - 1] <= 0.0) {
            return domain("interior atoms must satisfy x_N > 0");
        }
        if let Some(d) = interior.density() {
            if d.origin[n - 1] < 0.0 {
                return domain("interior density must lie in x_N >= 0");
            }
        }
        Ok(HalfspaceMeasure { interior, boundary })
    }

    pub fn zero(dim: usize) -> Self {
        HalfspaceMeasure { interior: DiscreteMeasure::zero(dim), boundary: DiscreteMeasure::zero(dim - 1) }
    }

    pub fn from_boundary(boundary: DiscreteMeasure) -> Result<Self> {
        Self::new(DiscreteMeasure::zero(boundary.dim() + 1), boundary)
    }

    pub fn dim(&self) -> usize {
        self.interior.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.interior.is_zero() && self.boundary.is_zero()
    }

    /// Both parts as one measure on `R^N`.
    pub fn flatten(&self) -> Result<DiscreteMeasure> {
        self.interior.with_atoms(&embed_boundary(&self.boundary)?)
    }

    /// `ρ` times the interior part (the boundary part has `ρ = 0`).
    pub fn weighted_interior(&self) -> Result<DiscreteMeasure> {
        let n = self.dim();
        let atoms = self.interior.atoms().map(|(x, w)| (x.to_vec(), w * x[n - 1])).collect();
        let density = match self.interior.density() {
            None => None,
            Some(d) => {
                let values = (0..d.num_cells()).map(|i| d.values[i] * d.cell_center(i)[n - 1]).collect();
                Some(GridDensity::new(d.origin.clone(), d.h, d.shape.clone(), values)?)
            }
        };
        DiscreteMeasure::new(n, atoms, density)
    }
}

/// Boundary measure as atoms `(z, 0)` in `R^N`; density cells become atoms
/// at their centers.
pub fn embed_boundary(sigma: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let n = sigma.dim() + 1;
    let lift = |z: &[f64]| {
        let mut x = z.to_vec();
        x.push(0.0);
        x
    };
    let mut atoms: Vec<(Vec<f64>, f64)> = sigma.atoms().map(|(z, w)| (lift(z), w)).collect();
    if let Some(d) = sigma.density() {
        let masses = d.cell_masses();
        atoms.extend((0..d.num_cells()).map(|i| (lift(&d.cell_center(i)), masses[i])));
    }
    DiscreteMeasure::new(n, atoms, None)
}

fn interior_point(x: &[f64]) -> Result<()> {
    if x.len() < 2 || x.iter().any(|c| !c.is_finite()) {
        return domain("points need N >= 2 finite coordinates");
    }
    if !(x[x.len() - 1] > 0.0) {
        return domain("point must lie in the open half-space x_N > 0");
    }
    Ok(())
}

/// `P(x, z) = x_N / |x - z|^N` with `z` on the boundary.
pub fn poisson_kernel(x: &[f64], z: &[f64]) -> Result<f64> {
    interior_point(x)?;
    let n = x.len();
    if z.len() + 1 != n {
        return param("boundary point needs N-1 coordinates");
    }
    let mut d2 = x[n - 1] * x[n - 1];
    for k in 0..n - 1 {
        let t = x[k] - z[k];
        d2 += t * t;
    }
    Ok(x[n - 1] / d2.powf(0.5 * n as f64))
}

/// `x_N y_N / (|x-y|^{N-2} max{|x-y|, x_N, y_N}^2)`; `+∞` at `x = y`.
pub fn green_kernel(x: &[f64], y: &[f64]) -> Result<f64> {
    interior_point(x)?;
    interior_point(y)?;
    if x.len() != y.len() {
        return param("points must have the same dimension");
    }
    Ok(green_unchecked(x, y))
}

fn green_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let d = dist2(x, y).sqrt();
    if d == 0.0 {
        return f64::INFINITY;
    }
    let (a, b) = (x[n - 1], y[n - 1]);
    let m = d.max(a).max(b);
    a * b / (d.powi(n as i32 - 2) * m * m)
}

/// Midpoint rule over the cube `center ± side/2`, split into `2^dim`
/// children while `refine(center, side)` holds and `depth > 0`.
fn cube_rule(center: &[f64], side: f64, depth: u32, f: &dyn Fn(&[f64]) -> f64, refine: &dyn Fn(&[f64], f64) -> bool) -> f64 {
    if depth == 0 || !refine(center, side) {
        return f(center);
    }
    let dim = center.len();
    let q = 0.25 * side;
    let mut acc = 0.0;
    let mut c = center.to_vec();
    for corner in 0..(1usize << dim) {
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = center[k] + if corner >> k & 1 == 1 { q } else { -q };
        }
        acc += cube_rule(&c, 0.5 * side, depth - 1, f, refine);
    }
    acc / (1usize << dim) as f64
}

/// `P[σ](x) = ∫ P(x, z) dσ(z)`; density cells are refined until their side
/// is below `x_N / 4` near `x`.
pub fn poisson_potential(sigma: &DiscreteMeasure, x: &[f64]) -> Result<f64> {
    interior_point(x)?;
    let n = x.len();
    if sigma.dim() + 1 != n {
        return param("boundary measure needs N-1 coordinates");
    }
    let mut acc = 0.0;
    for (z, w) in sigma.atoms() {
        acc += w * poisson_kernel(x, z)?;
    }
    if let Some(d) = sigma.density() {
        let xn = x[n - 1];
        let xp = &x[..n - 1];
        let masses = d.cell_masses();
        let f = |z: &[f64]| poisson_kernel(x, z).unwrap_or(0.0);
        let refine = |c: &[f64], side: f64| side > 0.25 * xn && dist2(c, xp).sqrt() < 4.0 * side + 4.0 * xn;
        for (i, m) in masses.iter().enumerate() {
            if *m != 0.0 {
                acc += m * cube_rule(&d.cell_center(i), d.h, 10, &f, &refine);
            }
        }
    }
    Ok(acc)
}

/// `G[f](x) = ∫ G(x, y) f(y) dy` for a density on cells in `x_N >= 0`;
/// cells near `x` are refined (the sub-cell holding `x` itself is dropped).
pub fn green_potential(f: &GridDensity, x: &[f64]) -> Result<f64> {
    interior_point(x)?;
    let n = x.len();
    if f.dim() != n {
        return param("density dimension differs from the point");
    }
    if f.origin[n - 1] < 0.0 {
        return Err(Error::Domain("Green potential needs a density in x_N >= 0".into()));
    }
    let masses = f.cell_masses();
    let g = |y: &[f64]| {
        let v = green_unchecked(x, y);
        if v.is_finite() { v } else { 0.0 }
    };
    let refine = |c: &[f64], side: f64| dist2(c, x).sqrt() < 2.0 * side * (n as f64).sqrt();
    let mut acc = 0.0;
    for (i, m) in masses.iter().enumerate() {
        if *m != 0.0 {
            acc += m * cube_rule(&f.cell_center(i), f.h, 6, &g, &refine);
        }
    }
    Ok(acc)
}
