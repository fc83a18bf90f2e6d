//! Discrete capacity by dual ascent.
//!
//! The discrete problem is `min Σ m_j f_j^s` subject to `(A f)_e ≥ 1` on the
//! nodes of `K`, with `(A f)_e = Σ_j k(e, j) m_j f_j`. For a charge `λ ≥ 0`
//! on `K` with `U = Aᵀλ` and `E = Σ m_j U_j^{s'}`, the value
//! `(Σλ)^s / E^{s-1}` is a lower bound, and `f = U^{s'-1}` scaled by
//! `1 / min_K A f` is feasible, giving the upper bound `E / (min_K A f)^s`.
//! The charge is updated multiplicatively towards equal potential on its
//! support.

use super::conv::Convolver;
use super::{CapacityEstimate, CapacityKind, CapacityMethod, CapacityParams};
use crate::error::{domain, param, Result};
use crate::measure::Region;

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalOptions {
    pub h: f64,
    /// Width of the source region around `K`, relative to the half-extent of `K`.
    pub margin: f64,
    /// Explicit source box; overrides `margin`. Nodes sit at `lo + i h`.
    pub domain: Option<(Vec<f64>, Vec<f64>)>,
    pub max_iter: usize,
    /// Stop once upper/lower − 1 falls below this.
    pub gap_tol: f64,
}

impl VariationalOptions {
    pub fn new(h: f64) -> Self {
        VariationalOptions { h, margin: 1.0, domain: None, max_iter: 2000, gap_tol: 1e-2 }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_domain(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        self.domain = Some((lo, hi));
        self
    }
}

struct Setup {
    /// Node positions along each axis for evaluation points.
    eval_axes: Vec<Vec<f64>>,
    shape: Vec<usize>,
    /// Source offset relative to the evaluation node with the same index.
    src_offset: Vec<f64>,
}

fn bbox(k: &Region) -> (Vec<f64>, Vec<f64>) {
    match k {
        Region::Ball { center, radius } => {
            (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
        }
        Region::Box { lo, hi } => (lo.clone(), hi.clone()),
    }
}

fn setup(p: &CapacityParams, k: &Region, dim: usize, o: &VariationalOptions) -> Result<Setup> {
    let h = o.h;
    let (klo, khi) = bbox(k);
    let half = (0..dim).map(|i| 0.5 * (khi[i] - klo[i])).fold(0.0, f64::max);
    let pad = (o.margin * half).max(4.0 * h) + h;
    let halfspace = p.kind == CapacityKind::WeightedHalfspace;
    if halfspace && klo[dim - 1] < 0.0 {
        return domain("weighted half-space capacity needs K inside x_N >= 0");
    }
    let mut eval_axes = Vec::with_capacity(dim);
    for i in 0..dim {
        let axis: Vec<f64> = match &o.domain {
            Some((lo, hi)) => {
                if lo.len() != dim || hi.len() != dim || !(hi[i] > lo[i]) {
                    return param("capacity domain must be a nondegenerate box of the right dimension");
                }
                let n = ((hi[i] - lo[i]) / h + 1e-9).floor() as usize + 1;
                (0..n).map(|j| lo[i] + j as f64 * h).collect()
            }
            None if halfspace && i == dim - 1 => {
                let n = ((khi[i] + pad) / h).ceil() as usize + 1;
                (0..n).map(|j| j as f64 * h).collect()
            }
            None => {
                let c = 0.5 * (klo[i] + khi[i]);
                let m = ((0.5 * (khi[i] - klo[i]) + pad) / h).ceil() as i64;
                (-m..=m).map(|j| c + j as f64 * h).collect()
            }
        };
        eval_axes.push(axis);
    }
    if halfspace && o.domain.is_some() && eval_axes[dim - 1][0] < 0.0 {
        return domain("weighted half-space domain must lie in x_N >= 0");
    }
    let shape = eval_axes.iter().map(|a| a.len()).collect();
    let mut src_offset = vec![0.0; dim];
    if halfspace {
        src_offset[dim - 1] = 0.5 * h;
    }
    Ok(Setup { eval_axes, shape, src_offset })
}

/// Average of the kernel over the cube of side `side` centered at `c`.
fn cell_average(p: &CapacityParams, dim: usize, c: &[f64], side: f64, depth: u32) -> f64 {
    let r = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let diag = side * (dim as f64).sqrt();
    if r > 2.0 * diag || depth == 0 {
        // Tensor midpoint rule with 4 points per axis.
        let pts = 4usize.pow(dim as u32);
        let mut acc = 0.0;
        let mut y = vec![0.0; dim];
        for flat in 0..pts {
            let mut f = flat;
            for i in 0..dim {
                let q = f % 4;
                f /= 4;
                y[i] = c[i] + side * ((q as f64 + 0.5) / 4.0 - 0.5);
            }
            let d = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            acc += p.kernel(dim, d);
        }
        return acc / pts as f64;
    }
    let kids = 1usize << dim;
    let mut acc = 0.0;
    let mut y = vec![0.0; dim];
    for b in 0..kids {
        for i in 0..dim {
            y[i] = c[i] + if b >> i & 1 == 1 { 0.25 * side } else { -0.25 * side };
        }
        acc += cell_average(p, dim, &y, 0.5 * side, depth - 1);
    }
    acc / kids as f64
}

fn kernel_entry(p: &CapacityParams, dim: usize, h: f64, off: &[f64], d: &[i64]) -> f64 {
    let disp: Vec<f64> = (0..dim).map(|i| -(d[i] as f64) * h + off[i]).collect();
    let r = disp.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r > 4.0 * h * (dim as f64).sqrt() {
        p.kernel(dim, r)
    } else {
        cell_average(p, dim, &disp, h, 10)
    }
}

/// Variational capacity of the closed ball or box `k` on a lattice of
/// spacing `opts.h`.
pub fn capacity_variational(p: &CapacityParams, k: &Region, dim: usize, opts: &VariationalOptions) -> Result<CapacityEstimate> {
    p.validate()?;
    k.validate(dim)?;
    if !(1..=3).contains(&dim) {
        return param("capacity solver supports dimensions 1 to 3");
    }
    if !(opts.h > 0.0 && opts.h.is_finite()) || opts.max_iter == 0 || !(opts.margin >= 0.0) {
        return param("capacity solver needs h > 0, margin >= 0 and at least one iteration");
    }
    if p.kind != CapacityKind::Bessel && p.alpha >= dim as f64 {
        return param("riesz capacity solver needs kernel order below the dimension");
    }
    let st = setup(p, k, dim, opts)?;
    let h = opts.h;
    let n: usize = st.shape.iter().product();
    let strides: Vec<usize> = (0..dim).map(|i| st.shape[i + 1..].iter().product()).collect();

    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let mut mass = vec![0.0; n];
    let mut in_k = Vec::new();
    let cell = h.powi(dim as i32);
    for flat in 0..n {
        let mut f = flat;
        for i in 0..dim {
            idx[i] = f / strides[i];
            f %= strides[i];
            x[i] = st.eval_axes[i][idx[i]];
        }
        let w = if p.kind == CapacityKind::WeightedHalfspace { x[dim - 1] + st.src_offset[dim - 1] } else { 1.0 };
        mass[flat] = w * cell;
        if k.contains(&x) {
            in_k.push(flat);
        }
    }
    if in_k.is_empty() {
        // K falls between nodes: use the node nearest to its center.
        let (lo, hi) = bbox(k);
        let mut flat = 0;
        for i in 0..dim {
            let c = 0.5 * (lo[i] + hi[i]);
            let j = ((c - st.eval_axes[i][0]) / h).round().clamp(0.0, (st.shape[i] - 1) as f64) as usize;
            flat += j * strides[i];
        }
        in_k.push(flat);
    }

    let conv = Convolver::new(&st.shape, |d| kernel_entry(p, dim, h, &st.src_offset, d));
    let s = p.s;
    let sp = s / (s - 1.0);

    let evaluate = |lam: &[f64]| -> Eval {
        let mut full = vec![0.0; n];
        for (&e, &l) in in_k.iter().zip(lam) {
            full[e] = l;
        }
        let u: Vec<f64> = conv.adjoint(&full).into_iter().map(|v| v.max(0.0)).collect();
        let mut e_sum = 0.0;
        let mut fm = vec![0.0; n];
        for j in 0..n {
            let up = u[j].powf(sp - 1.0);
            e_sum += mass[j] * up * u[j];
            fm[j] = up * mass[j];
        }
        let vfull = conv.forward(&fm);
        let v: Vec<f64> = in_k.iter().map(|&e| vfull[e]).collect();
        let total: f64 = lam.iter().sum();
        let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
        Eval { lower: total.powf(s) / e_sum.powf(s - 1.0), upper: e_sum / vmin.powf(s), avg: e_sum / total, v }
    };

    let mut lam = vec![1.0 / in_k.len() as f64; in_k.len()];
    let mut cur = evaluate(&lam);
    let mut best_lower = cur.lower;
    let mut best_upper = cur.upper;
    let mut theta = 1.0;
    let mut iterations = 1;
    let mut converged = best_upper / best_lower - 1.0 < opts.gap_tol;
    while !converged && iterations < opts.max_iter {
        let step = theta * (s - 1.0);
        let mut next: Vec<f64> = lam.iter().zip(&cur.v).map(|(l, v)| l * (cur.avg / v).powf(step)).collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|l| *l /= total);
        let cand = evaluate(&next);
        iterations += 1;
        best_upper = best_upper.min(cand.upper);
        if cand.lower >= cur.lower * (1.0 - 1e-12) {
            best_lower = best_lower.max(cand.lower);
            lam = next;
            cur = cand;
            theta = (theta * THETA_GROW).min(THETA_MAX);
        } else {
            theta *= 0.5;
            if theta < 1e-6 {
                break;
            }
        }
        converged = best_upper / best_lower - 1.0 < opts.gap_tol;
    }
    Ok(CapacityEstimate {
        value: best_upper,
        method: CapacityMethod::Variational,
        reference: None,
        resolution: Some(h),
        lower_bound: Some(best_lower),
        iterations,
        converged,
    })
}

struct Eval {
    lower: f64,
    upper: f64,
    avg: f64,
    v: Vec<f64>,
}
const THETA_GROW: f64 = 1.5;
const THETA_MAX: f64 = 16.0;
