//! Checks `ω(E) ≤ c Cap(E)` on families of closed balls.

use super::{capacity_ball, weighted_ball_capacity, CapacityCache, CapacityKind, CapacityParams};
use crate::error::{param, Result};
use crate::measure::DiscreteMeasure;

#[derive(Debug, Clone, PartialEq)]
pub struct BallRecord {
    pub center: Vec<f64>,
    pub radius: f64,
    pub mass: f64,
    pub capacity: f64,
    /// `mass / capacity`; infinite when a null ball carries mass.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub records: Vec<BallRecord>,
    pub max_ratio: f64,
    /// Largest ratio growth over three dyadic shrinks at a fixed center.
    pub max_growth: f64,
    /// Centers where ratios grow monotonically by more than 10x over the
    /// last three shrinks.
    pub diverging: Vec<Vec<f64>>,
    pub threshold: Option<f64>,
}

impl ConditionReport {
    /// `None` when no threshold was given.
    pub fn passed(&self) -> Option<bool> {
        self.threshold.map(|c| self.max_ratio <= c && self.diverging.is_empty())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("center,radius,mass,capacity,ratio\n");
        for r in &self.records {
            let c: Vec<String> = r.center.iter().map(|v| format!("{v}")).collect();
            out.push_str(&format!("{},{:e},{:e},{:e},{:e}\n", c.join(" "), r.radius, r.mass, r.capacity, r.ratio));
        }
        out
    }
}

/// Balls `B̄(c, 2^{-j} r0)` for `j = 0..levels` around each center.
pub fn dyadic_balls(centers: &[Vec<f64>], r0: f64, levels: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::with_capacity(centers.len() * levels);
    for c in centers {
        for j in 0..levels {
            out.push((c.clone(), r0 * 0.5f64.powi(j as i32)));
        }
    }
    out
}

/// Atom locations plus at most `max_cells` positive density cells, evenly thinned.
pub fn support_centers(omega: &DiscreteMeasure, max_cells: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = omega.atoms().filter(|(_, w)| *w > 0.0).map(|(x, _)| x.to_vec()).collect();
    if let Some(d) = omega.density() {
        let cells: Vec<usize> = (0..d.num_cells()).filter(|&i| d.values[i] > 0.0).collect();
        if !cells.is_empty() && max_cells > 0 {
            let stride = cells.len().div_ceil(max_cells);
            out.extend(cells.iter().step_by(stride).map(|&i| d.cell_center(i)));
        }
    }
    out
}

/// Ratios `ω(B)/Cap(B)` with capacities of balls from [`capacity_ball`]
/// (or the weighted representative for the half-space kind).
pub fn condition_check(
    omega: &DiscreteMeasure,
    p: &CapacityParams,
    family: &[(Vec<f64>, f64)],
    cache: &CapacityCache,
    threshold: Option<f64>,
) -> Result<ConditionReport> {
    let dim = omega.dim();
    condition_check_with(
        omega,
        family,
        |c, r| match p.kind {
            CapacityKind::WeightedHalfspace => weighted_ball_capacity(p.alpha, p.s, dim, c[dim - 1].max(0.0), r),
            _ => capacity_ball(p, r, dim, cache).map(|e| e.value),
        },
        threshold,
    )
}

/// As [`condition_check`] with a caller-supplied ball capacity.
pub fn condition_check_with(
    omega: &DiscreteMeasure,
    family: &[(Vec<f64>, f64)],
    capacity: impl Fn(&[f64], f64) -> Result<f64>,
    threshold: Option<f64>,
) -> Result<ConditionReport> {
    let index = crate::measure::BallMassIndex::new(omega);
    condition_check_by(family, |c, r| index.ball_mass(c, r), capacity, threshold)
}

/// As [`condition_check_with`] with caller-supplied ball masses.
pub fn condition_check_by(
    family: &[(Vec<f64>, f64)],
    mass: impl Fn(&[f64], f64) -> Result<f64>,
    capacity: impl Fn(&[f64], f64) -> Result<f64>,
    threshold: Option<f64>,
) -> Result<ConditionReport> {
    if family.is_empty() {
        return param("condition check needs a nonempty family of balls");
    }
    let mut records = Vec::with_capacity(family.len());
    for (c, r) in family {
        let mass = mass(c, *r)?;
        let cap = capacity(c, *r)?;
        let ratio = if mass == 0.0 {
            0.0
        } else if cap > 0.0 {
            mass / cap
        } else {
            f64::INFINITY
        };
        records.push(BallRecord { center: c.clone(), radius: *r, mass, capacity: cap, ratio });
    }
    let max_ratio = records.iter().map(|r| r.ratio).fold(0.0, f64::max);

    // Group consecutive records sharing a center, ordered by shrinking radius.
    let mut max_growth: f64 = 0.0;
    let mut diverging = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let mut end = start + 1;
        while end < records.len() && records[end].center == records[start].center {
            end += 1;
        }
        let mut seq: Vec<&BallRecord> = records[start..end].iter().collect();
        seq.sort_by(|a, b| b.radius.total_cmp(&a.radius));
        if seq.len() >= 4 {
            let mut flagged = false;
            for w in seq.windows(4) {
                let (a, b) = (w[0].ratio, w[3].ratio);
                let g = if a > 0.0 { b / a } else if b > 0.0 { f64::INFINITY } else { 1.0 };
                max_growth = max_growth.max(g);
                let monotone = w.windows(2).all(|p| p[1].ratio >= p[0].ratio);
                if monotone && g > 10.0 {
                    flagged = true;
                }
            }
            if flagged {
                diverging.push(records[start].center.clone());
            }
        }
        start = end;
    }
    Ok(ConditionReport { records, max_ratio, max_growth, diverging, threshold })
}
