use super::{domain_err, PotentialParams, QuadratureRule, RadialBounds, TailMode, Truncation};
use crate::error::Result;
use crate::measure::{dist2, DiscreteMeasure};

/// Results above this are reported as `+∞`.
const OVERFLOW: f64 = 1e300;
/// Largest shell histogram used by the lattice-aligned path.
const MAX_SHELLS: usize = 1 << 22;

/// Prepared evaluator for one measure and one parameter set.
///
/// The radial profile `r ↦ μ(B̄_r(x))` is sampled at `M` log-uniform nodes
/// in `[r_min, r_end]`, atom distances are inserted as breakpoints, and the
/// integrand is integrated with the trapezoid rule in `log r` using
/// one-sided values at each breakpoint. Density masses between nodes are
/// interpolated linearly in `log r`.
#[derive(Debug, Clone)]
pub struct WolffEvaluator<'a> {
    m: &'a DiscreteMeasure,
    p: PotentialParams,
    q: QuadratureRule,
    cell_masses: Vec<f64>,
    total: f64,
    bbox: Option<(Vec<f64>, Vec<f64>)>,
    diam: f64,
    /// Exponent `1/(β-1)` applied to ball masses.
    e: f64,
    gamma: f64,
}

impl<'a> WolffEvaluator<'a> {
    pub fn new(m: &'a DiscreteMeasure, p: &PotentialParams, q: &QuadratureRule) -> Result<Self> {
        p.validate()?;
        q.validate()?;
        if m.dim() != p.dim {
            return Err(crate::Error::Parameter(format!("measure has dimension {}, parameters N={}", m.dim(), p.dim)));
        }
        let cell_masses = m.density().map(|g| g.cell_masses()).unwrap_or_default();
        let bbox = m.support_bbox();
        let diam = bbox.as_ref().map_or(0.0, |(lo, hi)| dist2(lo, hi).sqrt());
        Ok(WolffEvaluator {
            m,
            p: p.clone(),
            q: *q,
            cell_masses,
            total: m.total_mass(),
            bbox,
            diam,
            e: 1.0 / (p.beta - 1.0),
            gamma: p.gamma(),
        })
    }

    pub fn params(&self) -> &PotentialParams {
        &self.p
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        self.m
    }

    #[inline]
    fn mass_pow(&self, mass: f64) -> f64 {
        if self.e == 1.0 {
            mass
        } else if mass <= 0.0 {
            0.0
        } else {
            mass.powf(self.e)
        }
    }

    /// Evaluates the potential at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let dim = self.p.dim;
        if x.len() != dim || x.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::Domain(format!("evaluation point {x:?} must be finite with N={dim} coordinates")));
        }
        let upper = match &self.p.truncation {
            Truncation::Full => f64::INFINITY,
            Truncation::Radius(r) => *r,
            Truncation::DistanceAdapted { delta, domain } => match domain.dist_to_boundary(x) {
                Some(d) => delta * d,
                None => return domain_err(x),
            },
        };
        if upper <= 0.0 || self.total <= 0.0 {
            return Ok(0.0);
        }
        let Some((lo, hi)) = &self.bbox else { return Ok(0.0) };

        // Atom distances, sorted; positive-weight atom at x diverges.
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(self.m.num_atoms());
        let mut nearest = f64::INFINITY;
        for (y, w) in self.m.atoms() {
            let d = dist2(x, y).sqrt();
            if d == 0.0 {
                if w > 0.0 {
                    return Ok(f64::INFINITY);
                }
                continue;
            }
            nearest = nearest.min(d);
            atoms.push((d, w));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let (r_min, r_max) = match self.q.bounds {
            RadialBounds::Fixed { r_min, r_max } => (r_min, r_max),
            RadialBounds::Auto => {
                let mut r_min = f64::INFINITY;
                if let Some(g) = self.m.density() {
                    r_min = r_min.min(g.h / 4.0);
                }
                if nearest.is_finite() {
                    r_min = r_min.min(nearest / 8.0);
                }
                if !r_min.is_finite() {
                    return Ok(0.0);
                }
                let mut out2 = 0.0;
                for k in 0..dim {
                    let o = (lo[k] - x[k]).max(x[k] - hi[k]).max(0.0);
                    out2 += o * o;
                }
                let r_max = (2.0 * (self.diam + out2.sqrt())).max(2.0 * r_min);
                (r_min, r_max)
            }
        };

        let r_end = r_max.min(upper);
        let mut sum = 0.0;
        if r_end > r_min {
            sum += self.head(x, &atoms, r_min, r_end);
        }
        if self.q.tail == TailMode::Analytic && upper > r_max {
            let mp = self.mass_pow(self.total);
            let g = self.gamma;
            sum += if upper.is_infinite() {
                mp * r_max.powf(-g) / g
            } else if g == 0.0 {
                mp * (upper / r_max).ln()
            } else {
                mp * (r_max.powf(-g) - upper.powf(-g)) / g
            };
        }
        if !(sum < OVERFLOW) {
            return Ok(f64::INFINITY);
        }
        Ok(sum)
    }

    /// Trapezoid sum over `[r_min, r_end]`.
    fn head(&self, x: &[f64], atoms: &[(f64, f64)], r_min: f64, r_end: f64) -> f64 {
        let m = self.q.nodes;
        let u0 = r_min.ln();
        let u1 = r_end.ln();
        let du = (u1 - u0) / (m - 1) as f64;
        let node_u = |k: usize| if k == m - 1 { u1 } else { u0 + k as f64 * du };
        let radii: Vec<f64> = (0..m).map(|k| if k == m - 1 { r_end } else { node_u(k).exp() }).collect();
        let dens = self.density_profile(x, &radii, u0, du);

        // Atoms with distance <= r_min are present from the first node on.
        let mut ai = 0;
        let mut amass = 0.0;
        while ai < atoms.len() && atoms[ai].0 <= r_min {
            amass += atoms[ai].1;
            ai += 1;
        }
        let g = |u: f64, mass: f64| self.mass_pow(mass) * (-self.gamma * u).exp();

        let mut sum = 0.0;
        let mut ua = u0;
        let mut da = dens[0];
        for k in 0..m - 1 {
            let ub_node = node_u(k + 1);
            let rb_node = radii[k + 1];
            // Breakpoints strictly inside (r_k, r_{k+1}); atoms at r_{k+1} join at the node.
            while ai < atoms.len() && atoms[ai].0 < rb_node {
                let (d, _) = atoms[ai];
                let ub = d.ln().clamp(ua, ub_node);
                let t = if ub_node > node_u(k) { (ub - node_u(k)) / (ub_node - node_u(k)) } else { 0.0 };
                let db = dens[k] + (dens[k + 1] - dens[k]) * t;
                sum += 0.5 * (ub - ua) * (g(ua, amass + da) + g(ub, amass + db));
                while ai < atoms.len() && atoms[ai].0 == d {
                    amass += atoms[ai].1;
                    ai += 1;
                }
                ua = ub;
                da = db;
            }
            let db = dens[k + 1];
            sum += 0.5 * (ub_node - ua) * (g(ua, amass + da) + g(ub_node, amass + db));
            while ai < atoms.len() && atoms[ai].0 <= rb_node {
                amass += atoms[ai].1;
                ai += 1;
            }
            ua = ub_node;
            da = db;
        }
        sum
    }

    /// Density mass of the closed balls of the given radii.
    fn density_profile(&self, x: &[f64], radii: &[f64], u0: f64, du: f64) -> Vec<f64> {
        let mut out = vec![0.0; radii.len()];
        let Some(g) = self.m.density() else { return out };
        if let Some(v) = self.aligned_profile(x, radii) {
            return v;
        }
        let m = radii.len();
        let r2: Vec<f64> = radii.iter().map(|r| r * r).collect();
        let mut bins = vec![0.0; m + 1];
        let dim = g.dim();
        let mut idx = vec![0usize; dim];
        let mut c = vec![0.0; dim];
        for (flat, mass) in self.cell_masses.iter().enumerate() {
            g.unravel(flat, &mut idx);
            for k in 0..dim {
                c[k] = g.cell_center_1d(k, idx[k]);
            }
            let d2 = dist2(x, &c);
            let est = ((0.5 * d2.ln() - u0) / du).ceil();
            let mut k = if est.is_nan() || est < 0.0 { 0 } else { (est as usize).min(m) };
            while k > 0 && r2[k - 1] >= d2 {
                k -= 1;
            }
            while k < m && r2[k] < d2 {
                k += 1;
            }
            bins[k] += mass;
        }
        let mut acc = 0.0;
        for k in 0..m {
            acc += bins[k];
            out[k] = acc;
        }
        out
    }

    /// Shell histogram over integer squared offsets when `x` sits on a cell
    /// center (or its lattice continuation).
    fn aligned_profile(&self, x: &[f64], radii: &[f64]) -> Option<Vec<f64>> {
        let g = self.m.density()?;
        let dim = g.dim();
        let mut sq: Vec<Vec<usize>> = Vec::with_capacity(3);
        let mut max_s = 0usize;
        for k in 0..dim {
            let t = (x[k] - g.origin[k]) / g.h - 0.5;
            let j = t.round();
            if (t - j).abs() > 1e-9 * t.abs().max(1.0) || j.abs() > 1e6 {
                return None;
            }
            let j = j as i64;
            let v: Vec<usize> = (0..g.shape[k] as i64).map(|i| ((i - j) * (i - j)) as usize).collect();
            max_s += *v.iter().max().unwrap();
            sq.push(v);
        }
        if max_s >= MAX_SHELLS {
            return None;
        }
        while sq.len() < 3 {
            sq.insert(0, vec![0]);
        }
        let mut hist = vec![0.0; max_s + 1];
        let (s0, s1, s2) = (&sq[0], &sq[1], &sq[2]);
        let n2 = s2.len();
        let mut row = 0;
        for &a in s0 {
            for &b in s1 {
                let ab = a + b;
                let masses = &self.cell_masses[row..row + n2];
                for (c, mass) in s2.iter().zip(masses) {
                    hist[ab + c] += mass;
                }
                row += n2;
            }
        }
        let h2 = g.h * g.h;
        let mut out = vec![0.0; radii.len()];
        let mut acc = 0.0;
        let mut s = 0usize;
        for (k, r) in radii.iter().enumerate() {
            let lim = r * r / h2;
            while s <= max_s && (s as f64) <= lim {
                acc += hist[s];
                s += 1;
            }
            out[k] = acc;
        }
        Some(out)
    }
}
