use proptest::prelude::*;
use wolffkit::capacity::CapacityCache;
use wolffkit::inequality::*;
use wolffkit::measure::DiscreteMeasure;
use wolffkit::potential::{BoxDomain, Truncation};
use wolffkit::random::random_atoms;
use wolffkit::Error;

#[test]
fn hardy_zero_function() {
    let r = hardy_check(&HardyProbe::constant(1.0, 1.0, 1.0, 1.0, 0.0)).unwrap();
    assert_eq!((r.rows[0].lhs, r.rows[0].rhs, r.ratio), (0.0, 0.0, 0.0));
}

#[test]
fn hardy_preset_closed_form() {
    let r = hardy_check(&HardyProbe::constant(1.0, 1.0, 1.0, 1.0, 1.0)).unwrap();
    assert!((r.rows[0].lhs - 0.5).abs() < 1e-6);
    assert!((r.rows[0].rhs - 2.0).abs() < 1e-6);
    assert!((r.ratio - 0.25).abs() < 1e-6);
    assert!(r.ratio <= r.bound.unwrap());
}

// h ≡ 1, κ=2, θ=1, γ=2, R=1: LHS = ∫_0^1 t (1-t)^2 dt = B(2,3) = 1/12, RHS = ∫_0^2 t^3 dt = 4.
#[test]
fn hardy_beta_function_oracle() {
    let r = hardy_check(&HardyProbe::constant(2.0, 2.0, 1.0, 1.0, 1.0)).unwrap();
    assert!((r.rows[0].lhs - 1.0 / 12.0).abs() < 1e-10);
    assert!((r.rows[0].rhs - 4.0).abs() < 1e-12);
}

// h ≡ 1, θ = 0, κ = 1, γ = 1: H(t) = ln(1/t), LHS = ∫_0^1 ln(1/t) dt = 1.
#[test]
fn hardy_log_inner_integral() {
    let r = hardy_check(&HardyProbe::constant(1.0, 1.0, 0.0, 1.0, 1.0)).unwrap();
    assert!((r.rows[0].lhs - 1.0).abs() < 1e-8, "{}", r.rows[0].lhs);
    assert!((r.rows[0].rhs - 2.0).abs() < 1e-12);
}

// h = 0 on (0,1], 1 after, R = 2, κ=γ=θ=1: H(t) = 1 for t ≤ 1 and 2 - t after,
// so LHS = ∫_0^1 dt + ∫_1^2 (2-t) dt = 3/2; RHS = ∫_1^4 t^2 dt/t = 15/2.
#[test]
fn hardy_step_closed_form() {
    let p = HardyProbe { kappa: 1.0, gamma: 1.0, theta: 1.0, r: 2.0, breaks: vec![1.0], values: vec![0.0, 1.0] };
    let r = hardy_check(&p).unwrap();
    assert!((r.rows[0].lhs - 1.5).abs() < 1e-9);
    assert!((r.rows[0].rhs - 7.5).abs() < 1e-12);
}

#[test]
fn hardy_infinite_range_divergence_is_flagged() {
    let r = hardy_check(&HardyProbe::constant(1.0, 1.0, -2.0, f64::INFINITY, 1.0)).unwrap();
    assert!(r.divergent);
}

#[test]
fn hardy_rejects_bad_step_functions() {
    let dec = HardyProbe { kappa: 1.0, gamma: 1.0, theta: 1.0, r: 1.0, breaks: vec![0.5], values: vec![2.0, 1.0] };
    assert!(matches!(hardy_check(&dec), Err(Error::Domain(_))));
    let neg = HardyProbe::constant(1.0, 1.0, 1.0, 1.0, -1.0);
    assert!(matches!(hardy_check(&neg), Err(Error::Domain(_))));
    let bad = HardyProbe::constant(0.0, 1.0, 1.0, 1.0, 1.0);
    assert!(matches!(hardy_check(&bad), Err(Error::Domain(_))));
}

#[test]
fn hardy_sampled_identity_is_refinement_stable() {
    let a = hardy_check(&HardyProbe::sampled(2.0, 2.0, 0.0, 1.0, 64, |t| t)).unwrap().ratio;
    let b = hardy_check(&HardyProbe::sampled(2.0, 2.0, 0.0, 1.0, 128, |t| t)).unwrap().ratio;
    assert!(a.is_finite() && (a / b - 1.0).abs() < 0.05, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn hardy_ratio_respects_constant(
        kappa in 0.2f64..3.0,
        gamma in 0.3f64..3.0,
        theta in -0.5f64..2.0,
        r in 0.2f64..3.0,
        steps in proptest::collection::vec((0.01f64..1.0, 0.0f64..2.0), 0..6),
        v0 in 0.0f64..1.0,
    ) {
        prop_assume!(kappa + theta * gamma > 0.05);
        let mut breaks = Vec::new();
        let mut values = vec![v0];
        let (mut b, mut v) = (0.0, v0);
        for (db, dv) in steps {
            b += db;
            v += dv;
            breaks.push(b);
            values.push(v);
        }
        let rep = hardy_check(&HardyProbe { kappa, gamma, theta, r, breaks, values }).unwrap();
        prop_assert!(rep.ratio <= rep.bound.unwrap() * (1.0 + 1e-9), "{} > {}", rep.ratio, rep.bound.unwrap());
    }
}

fn corners() -> Vec<Vec<f64>> {
    let mut s = Vec::new();
    for a in [0.25, 0.75] {
        for b in [0.25, 0.75] {
            for c in [0.25, 0.75] {
                s.push(vec![a, b, c]);
            }
        }
    }
    s
}

fn quick(alpha: f64, beta: f64, q: f64) -> ComposeSetup {
    ComposeSetup { field_n: 12, nodes: 256, levels: 0, ..ComposeSetup::unit_box(alpha, beta, q) }
}

#[test]
fn composed_parameters() {
    assert_eq!(composed_params(1.0, 2.0, 1.0), (2.0, 2.0));
    let (a, b) = composed_params(1.0, 1.5, 1.0);
    assert!((a - 1.8).abs() < 1e-15 && (b - 1.25).abs() < 1e-15);
}

#[test]
fn compose_ratios_are_scale_invariant() {
    let m = random_atoms(7, 5, 3).unwrap();
    let s = quick(1.0, 2.0, 1.0);
    let base = compose_lower_check(&m, &s, &corners()).unwrap();
    let up = compose_upper_check(&m, &s, &corners()).unwrap();
    for lam in [0.5, 4.0] {
        let ml = m.scale(lam).unwrap();
        let l = compose_lower_check(&ml, &s, &corners()).unwrap();
        let u = compose_upper_check(&ml, &s, &corners()).unwrap();
        assert!((l.ratio / base.ratio - 1.0).abs() < 1e-10);
        assert!((u.ratio / up.ratio - 1.0).abs() < 1e-10);
    }
}

#[test]
fn compose_upper_range() {
    let m = random_atoms(3, 5, 3).unwrap();
    let ok = compose_upper_check(&m, &quick(1.0, 2.0, 2.9), &corners()).unwrap();
    assert!(ok.ratio.is_finite() && ok.ratio > 0.0);
    assert!(matches!(compose_upper_check(&m, &quick(1.0, 2.0, 3.0), &corners()), Err(Error::Parameter(_))));
    assert!(matches!(compose_lower_check(&m, &quick(1.0, 3.0, 1.0), &corners()), Err(Error::Parameter(_))));
}

#[test]
fn vanishing_single_side_is_skipped() {
    // W^{1/2}[δ_0] vanishes at |x| = 1/2; the lower estimate holds there trivially.
    let m = DiscreteMeasure::dirac(vec![0.0; 3], 1.0).unwrap();
    let s = ComposeSetup { levels: 1, ..quick(1.0, 2.0, 1.0) };
    let r = compose_lower_check(&m, &s, &[vec![0.5, 0.0, 0.0]]).unwrap();
    assert_eq!(r.rows[0].lhs, 0.0);
    assert!(r.rows[0].ratio.is_nan() && r.ratio.is_nan());
    assert_eq!(r.skipped(), 1);
    assert_eq!(r.drift(), 1.0);
    let r = compose_lower_check(&m, &s, &[vec![0.5, 0.0, 0.0], vec![0.25, 0.0, 0.0]]).unwrap();
    assert_eq!(r.skipped(), 1);
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
}

#[test]
fn compose_full_space_needs_subcritical_composite() {
    let m = random_atoms(3, 5, 3).unwrap();
    let s = ComposeSetup { radius: None, ..quick(1.0, 2.0, 1.0) };
    assert!(matches!(compose_lower_check(&m, &s, &corners()), Err(Error::Parameter(_))));
}

#[test]
fn large_radius_reproduces_whole_space() {
    let m = random_atoms(11, 5, 3).unwrap().scale(0.25).unwrap();
    let samples = vec![vec![0.1, 0.1, 0.1], vec![0.2, 0.05, 0.15]];
    let full = ComposeSetup { radius: None, ..quick(1.0, 1.5, 1.0) };
    let trunc = ComposeSetup { radius: Some(40.0), ..full.clone() };
    let a = compose_lower_check(&m, &full, &samples).unwrap();
    let b = compose_lower_check(&m, &trunc, &samples).unwrap();
    assert!((a.ratio / b.ratio - 1.0).abs() < 0.01, "{} {}", a.ratio, b.ratio);
    let full = ComposeSetup { radius: None, ..quick(1.0, 1.4, 0.5) };
    let trunc = ComposeSetup { radius: Some(40.0), ..full.clone() };
    let a = compose_upper_check(&m, &full, &samples).unwrap();
    let b = compose_upper_check(&m, &trunc, &samples).unwrap();
    assert!((a.ratio / b.ratio - 1.0).abs() < 0.01, "{} {}", a.ratio, b.ratio);
}

#[test]
fn distance_adapted_boundary_sweep() {
    let omega = BoxDomain::cube(3, 0.0, 1.0).unwrap();
    let m = DiscreteMeasure::new(3, vec![(vec![0.5, 0.5, 0.5], 1.0), (vec![0.3, 0.6, 0.4], 0.5)], None).unwrap();
    let s = ComposeSetup { field_box: omega.clone(), field_n: 16, ..quick(1.0, 2.0, 1.0) };
    let samples: Vec<Vec<f64>> = [0.45, 0.25, 0.1, 0.02].iter().map(|&d| vec![0.5, 0.5 + 0.05, 1.0 - d]).collect();
    let t = Truncation::DistanceAdapted { delta: 0.5, domain: omega };
    let (lower, upper) = compose_truncated_check(&m, &s, &t, &samples).unwrap();
    assert!(lower.rows.iter().all(|r| r.lhs.is_finite() && r.rhs.is_finite()));
    assert!(upper.ratio.is_finite());
    let near = &lower.rows[3];
    assert!(near.lhs <= lower.rows[0].lhs && near.rhs <= lower.rows[0].rhs);
    let out = vec![vec![1.5, 0.5, 0.5]];
    assert!(matches!(compose_truncated_check(&m, &s, &t, &out), Err(Error::Domain(_))));
}

fn combo_samples() -> Vec<Vec<f64>> {
    vec![vec![0.1, 0.0, 0.0], vec![0.2, 0.2, 0.0], vec![0.0, 0.3, 0.1], vec![0.25, 0.1, 0.2]]
}

#[test]
fn combination_zero_data() {
    let cache = CapacityCache::in_memory(0.25);
    let st = CombinationSetup { levels: 0, field_n: 8, ..CombinationSetup::local(1.0, 2.0, 2.0, 2.0) };
    let r = combination_check(&DiscreteMeasure::zero(3), &DiscreteMeasure::zero(3), &st, &combo_samples(), &cache).unwrap();
    assert!(r.report.rows.iter().all(|row| row.lhs == 0.0 && row.rhs == 0.0));
    assert!(r.hypothesis_held());
}

#[test]
fn combination_small_dirac_and_inflated_hypothesis() {
    let cache = CapacityCache::in_memory(0.25);
    let st = CombinationSetup { field_n: 12, ..CombinationSetup::local(1.0, 2.0, 2.0, 2.0) };
    let small = DiscreteMeasure::dirac(vec![0.0; 3], 0.05).unwrap();
    let r = combination_check(&DiscreteMeasure::zero(3), &small, &st, &combo_samples(), &cache).unwrap();
    assert!(r.hypothesis_held());
    assert!(r.report.ratio.is_finite() && r.report.drift() < 2.0);
    let big = small.scale(1e3).unwrap();
    let r = combination_check(&DiscreteMeasure::zero(3), &big, &st, &combo_samples(), &cache).unwrap();
    assert!(!r.hypothesis_held());
    assert!(r.report.notes.iter().any(|n| n == "hypothesis-violated"));
}

#[test]
fn combination_parameter_ranges() {
    let cache = CapacityCache::in_memory(0.25);
    let z = DiscreteMeasure::zero(3);
    let bad_q = CombinationSetup::local(1.0, 2.0, 3.0, 2.0);
    assert!(matches!(combination_check(&z, &z, &bad_q, &combo_samples(), &cache), Err(Error::Parameter(_))));
    let bad_qs = CombinationSetup::local(1.0, 2.0, 0.5, 1.5);
    assert!(matches!(combination_check(&z, &z, &bad_qs, &combo_samples(), &cache), Err(Error::Parameter(_))));
}

#[test]
fn report_csv_has_rows_and_summary() {
    let r = hardy_check(&HardyProbe::constant(1.0, 1.0, 1.0, 1.0, 1.0)).unwrap();
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "sample,lhs,rhs,ratio");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("# max ratio="));
}
