use super::{check_query, dist2, DiscreteMeasure};
use crate::error::{domain, Result};

/// Range-query structure over a [`DiscreteMeasure`]. Ball queries visit the
/// same atoms and cells, in the same order, as the exhaustive sum, so the
/// results agree bit for bit.
#[derive(Debug, Clone)]
pub struct BallMassIndex<'a> {
    m: &'a DiscreteMeasure,
    /// First coordinate of each atom; nondecreasing by canonical order.
    first: Vec<f64>,
    /// Inclusive prefix sums of cell masses, shape `n_i + 1` per axis.
    prefix: Vec<f64>,
    prefix_strides: Vec<usize>,
}

impl<'a> BallMassIndex<'a> {
    pub fn new(m: &'a DiscreteMeasure) -> Self {
        let dim = m.dim();
        let first = m.atoms().map(|(x, _)| x[0]).collect();
        let (prefix, prefix_strides) = match m.density() {
            None => (Vec::new(), Vec::new()),
            Some(g) => {
                let ext: Vec<usize> = g.shape.iter().map(|s| s + 1).collect();
                let mut strides = vec![1; dim];
                for i in (0..dim.saturating_sub(1)).rev() {
                    strides[i] = strides[i + 1] * ext[i + 1];
                }
                let total: usize = ext.iter().product();
                let mut p = vec![0.0; total];
                let masses = g.cell_masses();
                let mut idx = vec![0; dim];
                for (flat, mass) in masses.iter().enumerate() {
                    g.unravel(flat, &mut idx);
                    let off: usize = idx.iter().zip(&strides).map(|(i, s)| (i + 1) * s).sum();
                    p[off] = *mass;
                }
                for axis in 0..dim {
                    let st = strides[axis];
                    for off in 0..total {
                        let i = (off / st) % ext[axis];
                        if i > 0 {
                            p[off] += p[off - st];
                        }
                    }
                }
                (p, strides)
            }
        };
        BallMassIndex { m, first, prefix, prefix_strides }
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        self.m
    }

    /// `m(B̄_r(x))`, closed ball, cell-center rule for the density part.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> Result<f64> {
        check_query(self.m.dim(), x, r)?;
        let r2 = r * r;
        let pad = r * (1.0 + 1e-12) + 1e-300;
        let lo = self.first.partition_point(|v| *v < x[0] - pad);
        let hi = self.first.partition_point(|v| *v <= x[0] + pad);
        let mut a = 0.0;
        for i in lo..hi {
            let (y, w) = self.m.atom(i);
            if dist2(x, y) <= r2 {
                a += w;
            }
        }
        let mut d = 0.0;
        if let Some(g) = self.m.density() {
            let dim = g.dim();
            let vol = g.cell_volume();
            let mut ranges = Vec::with_capacity(dim);
            for k in 0..dim {
                let a_lo = ((x[k] - r - g.origin[k]) / g.h - 0.5).floor() - 1.0;
                let a_hi = ((x[k] + r - g.origin[k]) / g.h - 0.5).ceil() + 1.0;
                let n = g.shape[k] as f64;
                let l = a_lo.max(0.0).min(n);
                let h = (a_hi + 1.0).max(0.0).min(n);
                if l >= h {
                    return Ok(a + d);
                }
                ranges.push((l as usize, h as usize));
            }
            let strides = g.strides();
            let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
            let mut c = vec![0.0; dim];
            'outer: loop {
                for k in 0..dim {
                    c[k] = g.cell_center_1d(k, idx[k]);
                }
                if dist2(x, &c) <= r2 {
                    let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
                    d += g.values[flat] * vol;
                }
                let mut ax = dim;
                loop {
                    if ax == 0 {
                        break 'outer;
                    }
                    ax -= 1;
                    idx[ax] += 1;
                    if idx[ax] < ranges[ax].1 {
                        break;
                    }
                    idx[ax] = ranges[ax].0;
                }
            }
        }
        Ok(a + d)
    }

    /// Mass of atoms and cell centers inside the closed box `[lo, hi]`.
    /// The density part comes from the prefix-sum table.
    pub fn box_mass(&self, lo: &[f64], hi: &[f64]) -> Result<f64> {
        let dim = self.m.dim();
        if lo.len() != dim || hi.len() != dim || lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
            return domain("box corners must have the measure's dimension and satisfy lo <= hi");
        }
        let mut a = 0.0;
        for (y, w) in self.m.atoms() {
            if y.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v <= h) {
                a += w;
            }
        }
        let Some(g) = self.m.density() else { return Ok(a) };
        // Half-open index ranges [b0, b1) of cells whose centers lie in [lo, hi].
        let mut bounds = Vec::with_capacity(dim);
        for k in 0..dim {
            let n = g.shape[k];
            let mut b0 = (((lo[k] - g.origin[k]) / g.h - 0.5).ceil().max(0.0) as usize).min(n);
            while b0 > 0 && g.cell_center_1d(k, b0 - 1) >= lo[k] {
                b0 -= 1;
            }
            while b0 < n && g.cell_center_1d(k, b0) < lo[k] {
                b0 += 1;
            }
            let mut b1 = (((hi[k] - g.origin[k]) / g.h - 0.5).floor() + 1.0).clamp(0.0, n as f64) as usize;
            while b1 < n && g.cell_center_1d(k, b1) <= hi[k] {
                b1 += 1;
            }
            while b1 > 0 && g.cell_center_1d(k, b1 - 1) > hi[k] {
                b1 -= 1;
            }
            if b1 <= b0 {
                return Ok(a);
            }
            bounds.push((b0, b1));
        }
        let mut d = 0.0;
        for corner in 0..(1usize << dim) {
            let mut off = 0;
            let mut sign = 1.0;
            for k in 0..dim {
                if corner >> k & 1 == 1 {
                    off += bounds[k].1 * self.prefix_strides[k];
                } else {
                    off += bounds[k].0 * self.prefix_strides[k];
                    sign = -sign;
                }
            }
            d += sign * self.prefix[off];
        }
        Ok(a + d.max(0.0))
    }
}
