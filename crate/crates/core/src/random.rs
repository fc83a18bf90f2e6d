//! Seeded random measures.

use crate::error::Result;
use crate::measure::DiscreteMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` atoms uniform in the unit box `[0,1]^dim` with weights uniform in `[0.1, 1]`.
pub fn random_atoms(seed: u64, count: usize, dim: usize) -> Result<DiscreteMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            (x, rng.gen_range(0.1..=1.0))
        })
        .collect();
    DiscreteMeasure::new(dim, atoms, None)
}

/// Points uniform in the box `[lo, hi]^dim`.
pub fn random_points(seed: u64, count: usize, dim: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(lo..hi)).collect()).collect()
}
