use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wolffkit::capacity::{CapacityCache, CapacityKind};
use wolffkit::halfspace::*;
use wolffkit::measure::{DiscreteMeasure, GridDensity};
use wolffkit::potential::{riesz, QuadratureRule};
use wolffkit::Error;

fn boundary_dirac(a: f64) -> HalfspaceMeasure {
    HalfspaceMeasure::from_boundary(DiscreteMeasure::dirac(vec![0.0; 2], a).unwrap()).unwrap()
}

fn interior_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.05..2.0)]
}

#[test]
fn poisson_kernel_examples() {
    assert_eq!(poisson_kernel(&[0.0, 1.0], &[0.0]).unwrap(), 1.0);
    assert!(matches!(poisson_kernel(&[0.3, 0.0], &[0.0]), Err(Error::Domain(_))));
    assert!(matches!(poisson_kernel(&[0.3, -1.0], &[0.0]), Err(Error::Domain(_))));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let x = interior_point(&mut rng);
        let z = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let p = poisson_kernel(&x, &z).unwrap();
        let d = ((x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2) + x[2] * x[2]).sqrt();
        assert!(p <= d.powi(-2) * (1.0 + 1e-14));
        // Homogeneity of degree 1 - N.
        let t = 2.5;
        let xt: Vec<f64> = x.iter().map(|v| v * t).collect();
        let pt = poisson_kernel(&xt, &[z[0] * t, z[1] * t]).unwrap();
        assert!((pt / p - t.powi(-2)).abs() < 1e-12 * t.powi(-2));
    }
}

#[test]
fn green_kernel_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let x = interior_point(&mut rng);
        let y = interior_point(&mut rng);
        let g = green_kernel(&x, &y).unwrap();
        assert_eq!(g, green_kernel(&y, &x).unwrap());
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        assert!(g <= y[2] / (d * d) * (1.0 + 1e-14));
    }
    assert_eq!(green_kernel(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap(), f64::INFINITY);
    assert!(matches!(green_kernel(&[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]), Err(Error::Domain(_))));
}

#[test]
fn green_kernel_far_field_decay() {
    let x = [0.0, 0.0, 1.0];
    let pts: Vec<(f64, f64)> = [10.0f64, 20.0, 40.0, 80.0, 160.0]
        .iter()
        .map(|&r| (r.ln(), green_kernel(&x, &[r, 0.0, 1.0]).unwrap().ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 3.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn poisson_potential_of_a_dirac() {
    let sigma = DiscreteMeasure::dirac(vec![0.0, 0.0], 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x = interior_point(&mut rng);
        let v = poisson_potential(&sigma, &x).unwrap();
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let exact = x[2] / r2.powf(1.5);
        assert!((v / exact - 1.0).abs() < 1e-12);
    }
    assert!(matches!(poisson_potential(&sigma, &[0.0, 0.0, 0.0]), Err(Error::Domain(_))));
}

#[test]
fn potentials_are_linear() {
    let s1 = DiscreteMeasure::new(2, vec![(vec![0.0, 0.0], 1.0), (vec![0.5, -0.3], 0.4)], None).unwrap();
    let s2 = DiscreteMeasure::dirac(vec![-1.0, 0.2], 2.0).unwrap();
    let sum = s1.with_atoms(&s2).unwrap();
    let x = [0.2, 0.1, 0.7];
    let lhs = poisson_potential(&sum, &x).unwrap();
    let rhs = poisson_potential(&s1, &x).unwrap() + poisson_potential(&s2, &x).unwrap();
    assert!((lhs - rhs).abs() < 1e-13 * rhs);

    let f = GridDensity::new(vec![1.0, 1.0, 0.5], 0.25, vec![4, 4, 4], vec![1.0; 64]).unwrap();
    let f3 = GridDensity::new(vec![1.0, 1.0, 0.5], 0.25, vec![4, 4, 4], vec![3.0; 64]).unwrap();
    let g = green_potential(&f, &x).unwrap();
    assert!((green_potential(&f3, &x).unwrap() - 3.0 * g).abs() < 1e-13 * g);
}

#[test]
fn green_potential_matches_fine_quadrature() {
    // f ≡ 1 on [1,2]^2 × [0.5,1.5], x away from the support.
    let x = [0.0, 0.0, 1.0];
    let coarse = GridDensity::new(vec![1.0, 1.0, 0.5], 0.125, vec![8, 8, 8], vec![1.0; 512]).unwrap();
    let v = green_potential(&coarse, &x).unwrap();
    let m = 64;
    let h = 1.0 / m as f64;
    let mut brute = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let y = [1.0 + (i as f64 + 0.5) * h, 1.0 + (j as f64 + 0.5) * h, 0.5 + (k as f64 + 0.5) * h];
                brute += green_kernel(&x, &y).unwrap() * h * h * h;
            }
        }
    }
    assert!((v / brute - 1.0).abs() < 0.01, "{v} vs {brute}");
    // Density through the evaluation point stays finite and converges.
    let near = GridDensity::new(vec![-0.5, -0.5, 0.5], 0.25, vec![4, 4, 4], vec![1.0; 64]).unwrap();
    let fine = GridDensity::new(vec![-0.5, -0.5, 0.5], 0.125, vec![8, 8, 8], vec![1.0; 512]).unwrap();
    let (a, b) = (green_potential(&near, &x).unwrap(), green_potential(&fine, &x).unwrap());
    assert!(a.is_finite() && (a / b - 1.0).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn boundary_density_poisson_potential_converges() {
    // σ = 1 on [-1,1]^2: P[σ](x) tends to 2π x_N-normalized limits; compare two
    // resolutions of the same density.
    let coarse = DiscreteMeasure::from_density(GridDensity::new(vec![-1.0, -1.0], 0.5, vec![4, 4], vec![1.0; 16]).unwrap());
    let fine = DiscreteMeasure::from_density(GridDensity::new(vec![-1.0, -1.0], 0.0625, vec![32, 32], vec![1.0; 1024]).unwrap());
    for x in [[0.0, 0.0, 0.05], [0.3, 0.2, 0.3], [2.0, 0.0, 1.0]] {
        let (a, b) = (poisson_potential(&coarse, &x).unwrap(), poisson_potential(&fine, &x).unwrap());
        assert!((a / b - 1.0).abs() < 5e-3, "{x:?}: {a} vs {b}");
    }
}

#[test]
fn riesz_radial_form_matches_kernel_sum() {
    let q = QuadratureRule::with_nodes(512);
    let m = wolffkit::random::random_atoms(5, 6, 3).unwrap();
    let atoms: Vec<(Vec<f64>, f64)> = m.atoms().map(|(y, w)| (y.to_vec(), w)).collect();
    for alpha in [0.5, 1.0, 2.0] {
        for x in [[2.0, 0.1, -0.3], [0.5, 0.5, 1.5]] {
            let direct: f64 = atoms.iter().map(|(y, w)| {
                let d: f64 = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                w * d.powf(alpha - 3.0)
            }).sum::<f64>() / (3.0 - alpha);
            let radial = riesz(&m, alpha, &q, &x).unwrap();
            assert!((radial / direct - 1.0).abs() < 1e-3, "alpha {alpha}: {radial} vs {direct}");
        }
    }
}

#[test]
fn halfspace_measure_invariants() {
    let bad = DiscreteMeasure::dirac(vec![0.0, 0.0, 0.0], 1.0).unwrap();
    assert!(matches!(HalfspaceMeasure::new(bad, DiscreteMeasure::zero(2)), Err(Error::Domain(_))));
    assert!(HalfspaceMeasure::new(DiscreteMeasure::zero(3), DiscreteMeasure::zero(3)).is_err());
    let inner = DiscreteMeasure::dirac(vec![0.0, 0.0, 2.0], 1.5).unwrap();
    let m = HalfspaceMeasure::new(inner, DiscreteMeasure::dirac(vec![1.0, 1.0], 0.5).unwrap()).unwrap();
    let flat = m.flatten().unwrap();
    assert_eq!(flat.num_atoms(), 2);
    assert_eq!(flat.total_mass(), 2.0);
    assert_eq!(m.weighted_interior().unwrap().total_mass(), 3.0);
}

#[test]
fn lela_examples() {
    let samples: Vec<Vec<f64>> = [0.5, 1.0, 2.0, 4.0].iter().map(|r| vec![0.6 * r, 0.0, 0.8 * r]).collect();
    let rep = riesz_compose_check(&boundary_dirac(1.0), &LelaSetup::new(1.25), &samples).unwrap();
    assert!(rep.ratio.is_finite() && rep.ratio > 0.0);
    assert!(rep.drift() < 2.0, "drift {}", rep.drift());
    assert_eq!(rep.rows.len(), 4);
    // Both sides scale as λ^{q1}.
    let st = LelaSetup { levels: 0, field_n: 16, ..LelaSetup::new(1.25) };
    let a = riesz_compose_check(&boundary_dirac(1.0), &st, &samples).unwrap();
    let b = riesz_compose_check(&boundary_dirac(3.0), &st, &samples).unwrap();
    assert!((a.ratio / b.ratio - 1.0).abs() < 1e-9);
    for q1 in [1.5, 1.0, 0.8, 2.0] {
        assert!(matches!(riesz_compose_check(&boundary_dirac(1.0), &LelaSetup::new(q1), &samples), Err(Error::Parameter(_))), "q1 {q1}");
    }
}

#[test]
fn weighted_estimate_examples() {
    let samples = vec![vec![0.0, 0.0, 0.5], vec![0.5, 0.0, 0.5], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]];
    let st = WeightedSetup { field_n: 16, ..WeightedSetup::new(1.25, 6.0) };
    let zero = weighted_estimate_check(&HalfspaceMeasure::zero(3), &st, &samples).unwrap();
    assert!(zero.report.rows.iter().all(|r| r.lhs == 0.0 && r.rhs == 0.0));
    assert!(zero.hypothesis_held());

    let small = weighted_estimate_check(&boundary_dirac(1e-2), &st, &samples).unwrap();
    assert!(small.hypothesis_held());
    assert!(small.report.ratio.is_finite() && small.report.ratio < 1.0);
    assert!(small.report.drift() < 2.0, "drift {}", small.report.drift());

    let big = weighted_estimate_check(&boundary_dirac(1e3), &st, &samples).unwrap();
    assert!(!big.hypothesis_held());
    assert!(big.report.ratio > small.report.ratio);

    let empty = WeightedSetup { family: Some(Vec::new()), ..st.clone() };
    assert!(matches!(weighted_estimate_check(&boundary_dirac(1e-2), &empty, &samples), Err(Error::Parameter(_))));
    for (q1, q2) in [(0.9, 3.0), (1.0, 6.0), (1.25, 0.5)] {
        let bad = WeightedSetup { q1, q2, ..st.clone() };
        assert!(matches!(weighted_estimate_check(&boundary_dirac(1e-2), &bad, &samples), Err(Error::Parameter(_))));
    }
}

#[test]
fn boundary_capacity_equivalence() {
    let st = BoundaryCapSetup { h: 1.0 / 8.0, levels: 1, margin: 1.0 };
    let r = boundary_capacity_equiv_check(&[-0.5, -0.5], &[0.5, 0.5], 1.0, 2.0, &st).unwrap();
    assert!(r.critical);
    assert!(r.report.rows.iter().all(|row| row.lhs > 0.0 && row.rhs > 0.0));
    assert!(r.report.drift() < 2.0);
    // Dilating E together with the resolution leaves the ratio unchanged.
    let st2 = BoundaryCapSetup { h: 1.0 / 4.0, levels: 0, margin: 1.0 };
    let big = boundary_capacity_equiv_check(&[-1.0, -1.0], &[1.0, 1.0], 1.0, 2.0, &st2).unwrap();
    assert!((big.report.ratio / r.report.ratio - 1.0).abs() < 1e-6, "{} vs {}", big.report.ratio, r.report.ratio);
    assert!(matches!(boundary_capacity_equiv_check(&[0.0, 0.0], &[1.0, 1.0], 1.5, 2.0, &st), Err(Error::Parameter(_))));
}

#[test]
fn boundary_capacity_of_a_point() {
    let st = BoundaryCapSetup { h: 1.0 / 8.0, levels: 2, margin: 1.0 };
    // Subcritical: both discrete capacities shrink with the mesh.
    let sub = boundary_capacity_equiv_check(&[0.0, 0.0], &[0.0, 0.0], 0.5, 2.0, &st).unwrap();
    for w in sub.report.rows.windows(2) {
        assert!(w[1].lhs < w[0].lhs && w[1].rhs < w[0].rhs, "{:?}", sub.report.rows);
    }
    // Critical: a single node has a mesh-independent capacity.
    let crit = boundary_capacity_equiv_check(&[0.0, 0.0], &[0.0, 0.0], 1.0, 2.0, &st).unwrap();
    let r0 = &crit.report.rows[0];
    for r in &crit.report.rows {
        assert!((r.lhs / r0.lhs - 1.0).abs() < 1e-6 && (r.rhs / r0.rhs - 1.0).abs() < 1e-6);
    }
}

#[test]
fn subcritical_boundary_capacity_is_not_flagged() {
    // N = 3, α = 0.5, s = 2: α + 2/s' = 1.5 < 2.
    let st = BoundaryCapSetup { h: 1.0 / 8.0, levels: 1, margin: 1.0 };
    let r = boundary_capacity_equiv_check(&[-0.5, -0.5], &[0.5, 0.5], 0.5, 2.0, &st).unwrap();
    assert!(!r.critical);
    assert!(r.report.drift() < 2.0);
}

#[test]
fn trace_conditions() {
    let cache = CapacityCache::in_memory(0.125);
    let zero = DiscreteMeasure::zero(2);
    let st = TraceSetup { boundary_kind: CapacityKind::Bessel, ..TraceSetup::default() };
    let r = trace_condition_check(&zero, &zero, 1.0, 2.0, &st, &cache).unwrap();
    assert_eq!((r.interior.max_ratio, r.boundary.max_ratio), (0.0, 0.0));
    assert_eq!(r.admits(), Some(true));

    let s2 = DiscreteMeasure::dirac(vec![0.0, 0.0], 1e-3).unwrap();
    let r = trace_condition_check(&zero, &s2, 1.0, 2.0, &st, &cache).unwrap();
    assert!(r.boundary.max_ratio.is_finite() && r.boundary.max_ratio < 1.0);
    assert!(r.boundary.diverging.is_empty());
    assert_eq!(r.admits(), Some(true));
    // The Riesz capacity of condition (ii) is null here (order 3 >= N-1).
    let riesz = trace_condition_check(&zero, &s2, 1.0, 2.0, &TraceSetup::default(), &cache).unwrap();
    assert_eq!(riesz.boundary.max_ratio, f64::INFINITY);
    assert_eq!(riesz.admits(), Some(false));

    let s1 = DiscreteMeasure::dirac(vec![0.0, 0.0], 1e-2).unwrap();
    let r = trace_condition_check(&s1, &s2, 1.0, 2.0, &st, &cache).unwrap();
    assert!(r.interior.records.iter().all(|b| b.mass > 0.0));
    // ∫ x_N P[aδ]^2 over B((0,2t), t) is scale invariant.
    let m0 = r.interior.records[0].mass;
    assert!(r.interior.records.iter().all(|b| (b.mass / m0 - 1.0).abs() < 1e-9));
    assert!(r.to_csv().lines().last().unwrap().starts_with("# interior_max="));

    assert!(matches!(trace_condition_check(&s1, &s2, 1.5, 2.0, &st, &cache), Err(Error::Parameter(_))));
    assert!(matches!(trace_condition_check(&s1, &s2, 0.9, 2.0, &st, &cache), Err(Error::Parameter(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn poisson_potential_scales_linearly(a in 0.01f64..100.0, x0 in -2.0f64..2.0, xn in 0.01f64..3.0) {
        let s = DiscreteMeasure::dirac(vec![0.3, -0.2], 1.0).unwrap();
        let sa = DiscreteMeasure::dirac(vec![0.3, -0.2], a).unwrap();
        let x = [x0, 0.1, xn];
        let (p, pa) = (poisson_potential(&s, &x).unwrap(), poisson_potential(&sa, &x).unwrap());
        prop_assert!((pa - a * p).abs() <= 1e-13 * pa);
    }
}
