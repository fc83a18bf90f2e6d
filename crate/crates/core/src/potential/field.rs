use super::{BoxDomain, PotentialParams, QuadratureRule, WolffEvaluator};
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::par::{self, Execution};
use std::fmt::Write as _;

/// Regular evaluation lattice: node `i` sits at `origin + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub origin: Vec<f64>,
    pub h: f64,
    pub shape: Vec<usize>,
}

impl Lattice {
    pub fn new(origin: Vec<f64>, h: f64, shape: Vec<usize>) -> Result<Self> {
        if origin.len() != shape.len() || origin.is_empty() || shape.iter().any(|&s| s == 0) || !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter("lattice needs matching origin/shape, positive sizes and h > 0".into()));
        }
        Ok(Lattice { origin, h, shape })
    }

    /// Cell-centered lattice with `n` nodes per axis on the cube `[lo, hi]^dim`.
    pub fn cell_centered(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::Parameter("cell-centered lattice needs lo < hi and n > 0".into()));
        }
        let h = (hi - lo) / n as f64;
        Self::new(vec![lo + 0.5 * h; dim], h, vec![n; dim])
    }

    /// Cell-centered lattice on the box `b`: `n` nodes along its longest side
    /// and the same spacing along the others.
    pub fn covering(b: &BoxDomain, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("lattice needs n > 0".into()));
        }
        let dim = b.dim();
        let side = (0..dim).map(|k| b.hi[k] - b.lo[k]).fold(0.0, f64::max);
        let h = side / n as f64;
        let shape = (0..dim).map(|k| (((b.hi[k] - b.lo[k]) / h).round() as usize).max(1)).collect();
        let origin = (0..dim).map(|k| b.lo[k] + 0.5 * h).collect();
        Self::new(origin, h, shape)
    }

    /// Shifts the lattice by `h/2` along every axis if any node coincides
    /// with an atom of `m`.
    pub fn avoiding(self, m: &DiscreteMeasure) -> Self {
        let hits = m.atoms().any(|(y, _)| {
            (0..self.dim()).all(|k| {
                let t = (y[k] - self.origin[k]) / self.h;
                let j = t.round();
                (t - j).abs() < 1e-9 && j >= 0.0 && (j as usize) < self.shape[k]
            })
        });
        if !hits {
            return self;
        }
        let origin = self.origin.iter().map(|o| o + 0.5 * self.h).collect();
        Lattice { origin, ..self }
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, mut flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for k in (0..self.dim()).rev() {
            let i = flat % self.shape[k];
            flat /= self.shape[k];
            x[k] = self.origin[k] + i as f64 * self.h;
        }
        x
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Flat index of the node nearest to `x`, clamped into the lattice.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut flat = 0;
        for k in 0..self.dim() {
            let i = ((x[k] - self.origin[k]) / self.h).round().clamp(0.0, (self.shape[k] - 1) as f64) as usize;
            flat = flat * self.shape[k] + i;
        }
        flat
    }
}

/// Values on the nodes of a [`Lattice`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub lattice: Lattice,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(lattice: Lattice) -> Self {
        let n = lattice.len();
        GridField { lattice, values: vec![0.0; n] }
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |a: f64, v| a.max(*v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridField { lattice: self.lattice.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// Number of `+∞` sentinel nodes.
    pub fn sentinels(&self) -> usize {
        self.values.iter().filter(|v| v.is_infinite()).count()
    }

    /// Nodal values as cell densities on cells centered at the nodes.
    pub fn to_density(&self) -> Result<GridDensity> {
        if self.sentinels() > 0 {
            return Err(Error::Data(format!("field has {} divergent nodes; cannot form a density", self.sentinels())));
        }
        let origin = self.lattice.origin.iter().map(|o| o - 0.5 * self.lattice.h).collect();
        GridDensity::new(origin, self.lattice.h, self.lattice.shape.clone(), self.values.clone())
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        Ok(DiscreteMeasure::from_density(self.to_density()?))
    }

    /// Value at the node nearest to `x` (piecewise constant extension).
    pub fn sample_nearest(&self, x: &[f64]) -> f64 {
        self.values[self.lattice.nearest(x)]
    }

    /// CSV rows `x1,...,xN,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let header: Vec<String> = (1..=self.lattice.dim()).map(|k| format!("x{k}")).collect();
        let _ = writeln!(s, "{},value", header.join(","));
        for (i, v) in self.values.iter().enumerate() {
            for c in self.lattice.node(i) {
                let _ = write!(s, "{c},");
            }
            let _ = writeln!(s, "{v}");
        }
        s
    }
}

/// Evaluates the potential at every lattice node.
pub fn wolff_field(m: &DiscreteMeasure, p: &PotentialParams, q: &QuadratureRule, lattice: &Lattice) -> Result<GridField> {
    wolff_field_with(Execution::Parallel, m, p, q, lattice)
}

pub fn wolff_field_with(
    exec: Execution,
    m: &DiscreteMeasure,
    p: &PotentialParams,
    q: &QuadratureRule,
    lattice: &Lattice,
) -> Result<GridField> {
    if lattice.dim() != p.dim {
        return Err(Error::Parameter("lattice dimension differs from N".into()));
    }
    let ev = WolffEvaluator::new(m, p, q)?;
    let values = par::try_map_indexed(exec, lattice.len(), |i| ev.eval(&lattice.node(i)))?;
    Ok(GridField { lattice: lattice.clone(), values })
}
