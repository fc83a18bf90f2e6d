use crate::error::{Error, Result};
use crate::measure::{dist2, DiscreteMeasure};

/// Centered maximal function `sup_t ω(B_t(x))^{-1} ∫_{B_t(x)} |f| dω` for a
/// discrete `ω`, taken over the radii at which the ball contents change.
/// Cells enter by their centers and carry `f` at the center.
pub fn maximal_function(omega: &DiscreteMeasure, f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
    if x.len() != omega.dim() {
        return Err(Error::Domain("evaluation point has wrong dimension".into()));
    }
    let mut items: Vec<(f64, f64, f64)> = Vec::new();
    for (y, w) in omega.atoms() {
        if w > 0.0 {
            items.push((dist2(x, y), w, w * f(y).abs()));
        }
    }
    if let Some(g) = omega.density() {
        let masses = g.cell_masses();
        for (i, mass) in masses.iter().enumerate() {
            if *mass > 0.0 {
                let c = g.cell_center(i);
                items.push((dist2(x, &c), *mass, mass * f(&c).abs()));
            }
        }
    }
    if items.is_empty() {
        return Err(Error::Data("maximal function of the zero measure is undefined".into()));
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut wsum, mut fsum, mut best) = (0.0, 0.0, 0.0f64);
    let mut i = 0;
    while i < items.len() {
        let d = items[i].0;
        while i < items.len() && items[i].0 == d {
            wsum += items[i].1;
            fsum += items[i].2;
            i += 1;
        }
        best = best.max(fsum / wsum);
    }
    Ok(best)
}
