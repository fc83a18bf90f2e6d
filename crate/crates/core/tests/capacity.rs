use proptest::prelude::*;
use std::f64::consts::PI;
use wolffkit::capacity::*;
use wolffkit::measure::{DiscreteMeasure, GridDensity, Region};
use wolffkit::Error;

fn ball(r: f64) -> Region {
    Region::Ball { center: vec![0.0; 3], radius: r }
}

#[test]
fn zero_test_examples() {
    assert!(capacity_zero_test(&CapacityParams::riesz(3.0, 1.5), 3).unwrap());
    assert!(capacity_zero_test(&CapacityParams::riesz(3.5, 2.0), 3).unwrap());
    assert!(capacity_zero_test(&CapacityParams::riesz(1.5, 2.0), 3).unwrap());
    assert!(!capacity_zero_test(&CapacityParams::riesz(1.0, 2.0), 3).unwrap());
    assert!(!capacity_zero_test(&CapacityParams::riesz(1.4, 2.0), 3).unwrap());
    assert!(!capacity_zero_test(&CapacityParams::bessel(3.0, 2.0), 3).unwrap());
    assert!(matches!(capacity_zero_test(&CapacityParams::riesz(1.0, 1.0), 3), Err(Error::Parameter(_))));
}

#[test]
fn point_test_examples() {
    let pos = |a: f64, s: f64| point_capacity_positive(&CapacityParams::bessel(a, s), 3).unwrap();
    assert!(!pos(1.5, 2.0));
    assert!(pos(1.75, 2.0));
    assert!(!pos(1.0, 2.0));
    assert!(matches!(point_capacity_positive(&CapacityParams::riesz(2.0, 2.0), 3), Err(Error::Parameter(_))));
}

#[test]
fn ball_scaling_is_exact() {
    let cache = CapacityCache::in_memory(0.25);
    let p = CapacityParams::riesz(1.0, 2.0);
    let one = capacity_ball(&p, 1.0, 3, &cache).unwrap();
    assert_eq!(one.method, CapacityMethod::BallScaling);
    assert_eq!(Some(one.value), one.reference);
    let two = capacity_ball(&p, 2.0, 3, &cache).unwrap();
    assert!(((two.value / one.value) / 2.0 - 1.0).abs() < 1e-12);
    assert_eq!(cache.len(), 1);
}

#[test]
fn null_balls_report_zero_criterion() {
    let cache = CapacityCache::in_memory(0.25);
    for p in [CapacityParams::riesz(3.0, 2.0), CapacityParams::riesz(1.5, 2.0)] {
        let e = capacity_ball(&p, 0.5, 3, &cache).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.method, CapacityMethod::ZeroCriterion);
    }
    assert!(cache.is_empty());
}

#[test]
fn cache_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("capcache.txt");
    let p = CapacityParams::riesz(1.0, 2.0);
    let first = CapacityCache::with_file(&path, 0.25).unwrap().reference(&p, 3).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let fields: Vec<&str> = text.trim().split(' ').collect();
    assert_eq!(fields.len(), 7);
    assert_eq!(&fields[..4], &["3", "1.0", "2.0", "0.25"]);
    let again = CapacityCache::with_file(&path, 0.25).unwrap();
    assert_eq!(again.len(), 1);
    let second = again.reference(&p, 3).unwrap();
    assert_eq!(first.value, second.value);
    assert_eq!(first.iterations, second.iterations);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn corrupt_cache_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("capcache.txt");
    std::fs::write(&path, "3 1 2 0.25 abc 5 true\n").unwrap();
    assert!(matches!(CapacityCache::with_file(&path, 0.25), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn bounds_bracket_and_converge() {
    let e = capacity_variational(&CapacityParams::riesz(1.0, 2.0), &ball(1.0), 3, &VariationalOptions::new(0.125)).unwrap();
    let lo = e.lower_bound.unwrap();
    assert!(e.converged);
    assert!(lo <= e.value && e.value / lo - 1.0 < 1e-2);
    assert_eq!(e.resolution, Some(0.125));
}

// I_1 * I_1 = (π³/4)|x|^{-1} in R³ for the kernel |x|^{-2}/2, and the unit
// ball has Newtonian energy 1, so the continuum value is 4/π³.
#[test]
fn unit_ball_near_continuum_value() {
    let e = capacity_variational(&CapacityParams::riesz(1.0, 2.0), &ball(1.0), 3, &VariationalOptions::new(0.125).with_margin(3.0)).unwrap();
    let exact = 4.0 / PI.powi(3);
    assert!(e.value > 0.9 * exact && e.value < 1.2 * exact, "{} vs {}", e.value, exact);
}

#[test]
fn unit_ball_refinement_within_ten_percent() {
    let p = CapacityParams::riesz(1.0, 2.0);
    let a = capacity_variational(&p, &ball(1.0), 3, &VariationalOptions::new(0.125)).unwrap().value;
    let b = capacity_variational(&p, &ball(1.0), 3, &VariationalOptions::new(0.0625)).unwrap().value;
    assert!((a / b - 1.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn single_node_capacity_decreases_under_refinement() {
    let p = CapacityParams::riesz(1.0, 2.0);
    let vals: Vec<f64> = [0.25, 0.125, 0.0625]
        .iter()
        .map(|&h| capacity_variational(&p, &ball(0.0), 3, &VariationalOptions::new(h)).unwrap().value)
        .collect();
    assert!(vals[1] < vals[0] && vals[2] < vals[1], "{vals:?}");
}

#[test]
fn nested_boxes_are_monotone() {
    let p = CapacityParams::riesz(1.0, 2.0);
    let opts = VariationalOptions::new(0.125).with_domain(vec![-2.0; 3], vec![2.0; 3]);
    let mut prev = 0.0;
    for w in [0.25, 0.5, 0.75, 1.0] {
        let k = Region::Box { lo: vec![-w; 3], hi: vec![w; 3] };
        let v = capacity_variational(&p, &k, 3, &opts).unwrap().value;
        assert!(v > prev, "{w}: {v} <= {prev}");
        prev = v;
    }
}

#[test]
fn solver_is_homogeneous() {
    let p = CapacityParams::riesz(1.0, 2.0);
    let a = capacity_variational(&p, &ball(1.0), 3, &VariationalOptions::new(0.25)).unwrap();
    let b = capacity_variational(&p, &ball(0.5), 3, &VariationalOptions::new(0.125)).unwrap();
    assert!((b.value / a.value - 0.5).abs() < 1e-9);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn truncated_kernel_needs_more_capacity() {
    let opts = VariationalOptions::new(0.125);
    let r = capacity_variational(&CapacityParams::riesz(1.0, 2.0), &ball(0.5), 3, &opts).unwrap();
    let b = capacity_variational(&CapacityParams::bessel(1.0, 2.0), &ball(0.5), 3, &opts).unwrap();
    assert!(b.lower_bound.unwrap() > r.value);
}

#[test]
fn weighted_halfspace_boundary_set() {
    let p = CapacityParams::weighted_halfspace(1.0, 2.0);
    let k = Region::Box { lo: vec![-0.5, -0.5, 0.0], hi: vec![0.5, 0.5, 0.0] };
    let e = capacity_variational(&p, &k, 3, &VariationalOptions::new(0.125)).unwrap();
    assert!(e.value > 0.0 && e.converged);
    let below = Region::Box { lo: vec![0.0, 0.0, -0.5], hi: vec![0.5, 0.5, 0.0] };
    assert!(matches!(capacity_variational(&p, &below, 3, &VariationalOptions::new(0.125)), Err(Error::Domain(_))));
}

#[test]
fn variational_parameter_errors() {
    let o = VariationalOptions::new(0.25);
    assert!(matches!(capacity_variational(&CapacityParams::riesz(3.0, 2.0), &ball(1.0), 3, &o), Err(Error::Parameter(_))));
    assert!(matches!(capacity_variational(&CapacityParams::riesz(1.0, 1.0), &ball(1.0), 3, &o), Err(Error::Parameter(_))));
    assert!(matches!(capacity_variational(&CapacityParams::riesz(1.0, 2.0), &ball(-1.0), 3, &o), Err(Error::Domain(_))));
}

#[test]
fn condition_zero_measure_all_ratios_zero() {
    let cache = CapacityCache::in_memory(0.25);
    let fam = dyadic_balls(&[vec![0.0; 3], vec![0.5, 0.0, 0.0]], 1.0, 4);
    let r = condition_check(&DiscreteMeasure::zero(3), &CapacityParams::riesz(1.0, 2.0), &fam, &cache, Some(1e-9)).unwrap();
    assert!(r.records.iter().all(|b| b.ratio == 0.0));
    assert_eq!(r.max_ratio, 0.0);
    assert_eq!(r.passed(), Some(true));
}

// ω with density c·ref/(4π|x|²) has ω(B̄_r(0)) = c·ref·r = c·Cap(B̄_r).
#[test]
fn synthesized_measure_recovers_constant() {
    let (c, reference) = (3.0, 0.15);
    let n = 128;
    let h = 2.0 / n as f64;
    let mut values = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = [i, j, k].map(|t| -1.0 + (t as f64 + 0.5) * h);
                let r2 = x.iter().map(|v| v * v).sum::<f64>();
                values.push(c * reference / (4.0 * PI * r2));
            }
        }
    }
    let omega = DiscreteMeasure::from_density(GridDensity::new(vec![-1.0; 3], h, vec![n; 3], values).unwrap());
    let fam = dyadic_balls(&[vec![0.0; 3]], 0.75, 3);
    let r = condition_check_with(&omega, &fam, |_, rad| Ok(reference * rad), None).unwrap();
    assert!((r.max_ratio / c - 1.0).abs() < 0.1, "{}", r.max_ratio);
    assert_eq!(r.passed(), None);
}

#[test]
fn dirac_ratios_follow_point_capacity() {
    let cache = CapacityCache::in_memory(0.25);
    let omega = DiscreteMeasure::dirac(vec![0.0; 3], 1.0).unwrap();
    let fam = dyadic_balls(&[vec![0.0; 3]], 0.5, 6);

    let positive = CapacityParams::bessel(2.0, 2.0);
    let r = condition_check(&omega, &positive, &fam, &cache, None).unwrap();
    assert!(r.max_ratio.is_finite() && r.diverging.is_empty());

    let null = CapacityParams::bessel(1.0, 1.5);
    let r = condition_check(&omega, &null, &fam, &cache, Some(1e6)).unwrap();
    assert_eq!(r.diverging.len(), 1);
    assert!(r.max_growth > 10.0);
    assert_eq!(r.passed(), Some(false));
}

#[test]
fn null_capacity_with_mass_is_infinite_ratio() {
    let cache = CapacityCache::in_memory(0.25);
    let omega = DiscreteMeasure::dirac(vec![0.0; 3], 1.0).unwrap();
    let fam = dyadic_balls(&[vec![0.0; 3]], 1.0, 2);
    let r = condition_check(&omega, &CapacityParams::riesz(2.0, 2.0), &fam, &cache, Some(10.0)).unwrap();
    assert!(r.max_ratio.is_infinite());
    assert_eq!(r.passed(), Some(false));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn ball_scaling_ratio(r1 in 0.01f64..10.0, r2 in 0.01f64..10.0, s in 1.1f64..2.9) {
        let cache = CapacityCache::in_memory(0.5);
        let p = CapacityParams::riesz(1.0, s);
        let a = capacity_ball(&p, r1, 3, &cache).unwrap().value;
        let b = capacity_ball(&p, r2, 3, &cache).unwrap().value;
        let want = (r2 / r1).powf(3.0 - s);
        prop_assert!(((b / a) / want - 1.0).abs() < 1e-12);
    }
}
