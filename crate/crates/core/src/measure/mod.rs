//! Nonnegative measures as weighted point clouds plus an optional grid density.

mod index;
mod io;

pub use index::BallMassIndex;
pub use io::{parse_measure, read_measure_file, write_measure, MeasureFile};

use crate::error::{domain, Error, Result};
use std::cmp::Ordering;

/// Uniform cell-centered density on an axis-aligned grid. `origin` is the
/// lower corner of cell 0; cell `k` has center `origin + (k + 1/2) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub origin: Vec<f64>,
    pub h: f64,
    pub shape: Vec<usize>,
    /// Density per unit volume, row-major (last axis fastest).
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn new(origin: Vec<f64>, h: f64, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let n = origin.len();
        if !(1..=3).contains(&n) {
            return Err(Error::Data(format!("grid densities need 1 <= N <= 3, got {n}")));
        }
        if shape.len() != n || shape.iter().any(|&s| s == 0) {
            return Err(Error::Data("density shape must have N positive entries".into()));
        }
        if !(h.is_finite() && h > 0.0) || origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Data("density spacing and origin must be finite, h > 0".into()));
        }
        let cells: usize = shape.iter().product();
        if values.len() != cells {
            return Err(Error::Data(format!("density expects {cells} values, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Data(format!("density values must be finite and nonnegative, got {v}")));
        }
        Ok(GridDensity { origin, h, shape, values })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for i in (0..self.dim().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.shape[i + 1];
        }
        s
    }

    pub fn cell_center_1d(&self, axis: usize, k: usize) -> f64 {
        self.origin[axis] + (k as f64 + 0.5) * self.h
    }

    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for i in (0..self.dim()).rev() {
            out[i] = flat % self.shape[i];
            flat /= self.shape[i];
        }
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        idx.iter().enumerate().map(|(a, &k)| self.cell_center_1d(a, k)).collect()
    }

    /// Cell masses `value * h^N`, row-major.
    pub fn cell_masses(&self) -> Vec<f64> {
        let v = self.cell_volume();
        self.values.iter().map(|x| x * v).collect()
    }

    pub fn total_mass(&self) -> f64 {
        let v = self.cell_volume();
        self.values.iter().fold(0.0, |acc, x| acc + x * v)
    }

    /// Lower and upper corners of the grid.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = (0..self.dim()).map(|a| self.origin[a] + self.shape[a] as f64 * self.h).collect();
        (self.origin.clone(), hi)
    }
}

/// Region used by [`DiscreteMeasure::restrict`]. Both are closed.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Region {
    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Region::Ball { center, radius } => {
                if center.len() != dim || center.iter().any(|c| !c.is_finite()) {
                    return domain("ball center has wrong dimension or is not finite");
                }
                if !(radius.is_finite() && *radius >= 0.0) {
                    return domain("ball radius must be finite and nonnegative");
                }
            }
            Region::Box { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return domain("box corners have wrong dimension");
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
                    return domain("box corners must be finite with lo <= hi");
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { center, radius } => dist2(x, center) <= radius * radius,
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v <= *b),
        }
    }
}

/// Squared Euclidean distance, summed in axis order.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

/// Nonnegative measure: atoms in canonical order plus an optional density.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Atom coordinates, flattened (`dim` entries per atom).
    coords: Vec<f64>,
    weights: Vec<f64>,
    density: Option<GridDensity>,
}

impl DiscreteMeasure {
    pub fn zero(dim: usize) -> Self {
        DiscreteMeasure { dim, coords: Vec::new(), weights: Vec::new(), density: None }
    }

    /// Builds a measure from `(location, weight)` pairs; atoms are sorted
    /// lexicographically by location, then weight.
    pub fn new(dim: usize, atoms: Vec<(Vec<f64>, f64)>, density: Option<GridDensity>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Data("dimension must be at least 1".into()));
        }
        for (x, w) in &atoms {
            if x.len() != dim {
                return Err(Error::Data(format!("atom has {} coordinates, expected {dim}", x.len())));
            }
            if x.iter().any(|c| !c.is_finite()) {
                return Err(Error::Data("atom coordinates must be finite".into()));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Data(format!("atom weights must be finite and nonnegative, got {w}")));
            }
        }
        if let Some(d) = &density {
            if d.dim() != dim {
                return Err(Error::Data("density dimension differs from measure dimension".into()));
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| cmp_atom(a, b));
        let mut coords = Vec::with_capacity(atoms.len() * dim);
        let mut weights = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            coords.extend_from_slice(&x);
            weights.push(w);
        }
        Ok(DiscreteMeasure { dim, coords, weights, density })
    }

    pub fn dirac(x: Vec<f64>, w: f64) -> Result<Self> {
        let dim = x.len();
        Self::new(dim, vec![(x, w)], None)
    }

    pub fn from_density(d: GridDensity) -> Self {
        DiscreteMeasure { dim: d.dim(), coords: Vec::new(), weights: Vec::new(), density: Some(d) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn atom(&self, i: usize) -> (&[f64], f64) {
        (&self.coords[i * self.dim..(i + 1) * self.dim], self.weights[i])
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.num_atoms()).map(move |i| self.atom(i))
    }

    pub fn atom_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn density(&self) -> Option<&GridDensity> {
        self.density.as_ref()
    }

    /// Adds atoms to an existing measure, keeping canonical order.
    pub fn with_atoms(&self, extra: &DiscreteMeasure) -> Result<Self> {
        if extra.dim != self.dim {
            return Err(Error::Data("dimension mismatch when merging atoms".into()));
        }
        let atoms = self.atoms().chain(extra.atoms()).map(|(x, w)| (x.to_vec(), w)).collect();
        let density = match (&self.density, &extra.density) {
            (Some(_), Some(_)) => return Err(Error::Data("cannot merge two grid densities".into())),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Self::new(self.dim, atoms, density)
    }

    /// Replaces the density part.
    pub fn with_density(&self, density: Option<GridDensity>) -> Result<Self> {
        if let Some(d) = &density {
            if d.dim() != self.dim {
                return Err(Error::Data("density dimension differs from measure dimension".into()));
            }
        }
        Ok(DiscreteMeasure { density, ..self.clone() })
    }

    pub fn atom_mass(&self) -> f64 {
        self.weights.iter().fold(0.0, |a, w| a + w)
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_mass() + self.density.as_ref().map_or(0.0, |d| d.total_mass())
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|w| *w == 0.0)
            && self.density.as_ref().is_none_or(|d| d.values.iter().all(|v| *v == 0.0))
    }

    /// Exhaustive `m(B_r(x))` over the closed ball: atoms in canonical
    /// order, then cells in row-major order by the cell-center rule.
    pub fn ball_mass_brute(&self, x: &[f64], r: f64) -> Result<f64> {
        check_query(self.dim, x, r)?;
        let r2 = r * r;
        let mut a = 0.0;
        for (y, w) in self.atoms() {
            if dist2(x, y) <= r2 {
                a += w;
            }
        }
        let mut d = 0.0;
        if let Some(g) = &self.density {
            let vol = g.cell_volume();
            let mut c = vec![0.0; self.dim];
            let mut idx = vec![0; self.dim];
            for (flat, v) in g.values.iter().enumerate() {
                g.unravel(flat, &mut idx);
                for k in 0..self.dim {
                    c[k] = g.cell_center_1d(k, idx[k]);
                }
                if dist2(x, &c) <= r2 {
                    d += v * vol;
                }
            }
        }
        Ok(a + d)
    }

    /// `m(B_r(x))` through a fresh [`BallMassIndex`]. Build the index once
    /// when issuing many queries.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> Result<f64> {
        BallMassIndex::new(self).ball_mass(x, r)
    }

    /// Multiplies every weight and density value by `lambda`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return domain(format!("scale factor must be finite and nonnegative, got {lambda}"));
        }
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= lambda);
        if let Some(d) = &mut out.density {
            d.values.iter_mut().for_each(|v| *v *= lambda);
        }
        Ok(out)
    }

    /// Drops atoms and zeroes cells (by center) outside `region`.
    pub fn restrict(&self, region: &Region) -> Result<Self> {
        region.validate(self.dim)?;
        let atoms = self.atoms().filter(|(x, _)| region.contains(x)).map(|(x, w)| (x.to_vec(), w)).collect();
        let density = self.density.as_ref().map(|g| {
            let mut g = g.clone();
            let mut idx = vec![0; self.dim];
            let mut c = vec![0.0; self.dim];
            for flat in 0..g.values.len() {
                g.unravel(flat, &mut idx);
                for k in 0..self.dim {
                    c[k] = g.cell_center_1d(k, idx[k]);
                }
                if !region.contains(&c) {
                    g.values[flat] = 0.0;
                }
            }
            g
        });
        Self::new(self.dim, atoms, density)
    }

    /// Bounding box of atoms and grid cells (cell centers). `None` for an
    /// empty carrier.
    pub fn support_bbox(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        let mut any = false;
        for (x, _) in self.atoms() {
            any = true;
            for k in 0..self.dim {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
        }
        if let Some(g) = &self.density {
            any = true;
            for k in 0..self.dim {
                lo[k] = lo[k].min(g.cell_center_1d(k, 0));
                hi[k] = hi[k].max(g.cell_center_1d(k, g.shape[k] - 1));
            }
        }
        any.then_some((lo, hi))
    }
}

fn cmp_atom(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> Ordering {
    for (x, y) in a.0.iter().zip(&b.0) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.1.total_cmp(&b.1)
}

pub(crate) fn check_query(dim: usize, x: &[f64], r: f64) -> Result<()> {
    if x.len() != dim {
        return domain(format!("query point has {} coordinates, expected {dim}", x.len()));
    }
    if x.iter().any(|c| !c.is_finite()) {
        return domain("query point must be finite");
    }
    if r.is_nan() || r < 0.0 {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    Ok(())
}
