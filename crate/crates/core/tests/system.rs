use proptest::prelude::*;
use wolffkit::capacity::{dyadic_balls, CapacityCache};
use wolffkit::measure::DiscreteMeasure;
use wolffkit::potential::{wolff, BoxDomain, PotentialParams, QuadratureRule};
use wolffkit::system::*;
use wolffkit::Error;

fn unit_box() -> SystemDomain {
    SystemDomain::Box(BoxDomain::cube(3, -1.0, 1.0).unwrap())
}

fn dirac_system(op: Operator, a: f64) -> SystemSpec {
    let eta = DiscreteMeasure::dirac(vec![0.0; 3], a).unwrap();
    SystemSpec::new(op, 3, 2.0, 2.0, DiscreteMeasure::zero(3), eta, unit_box())
}

fn small_opts() -> PicardOptions {
    PicardOptions { n: 13, ..PicardOptions::default() }
}

#[test]
fn hessian_parameterization() {
    assert_eq!(hessian_params(1).unwrap(), (1.0, 2.0));
    assert_eq!(hessian_params(2).unwrap(), (4.0 / 3.0, 3.0));
    assert_eq!(hessian_params(3).unwrap(), (1.5, 4.0));
    assert!(matches!(hessian_params(0), Err(Error::Parameter(_))));
}

#[test]
fn liouville_examples() {
    assert!(liouville_check(Operator::PLaplace(2.0), 3.0, 3.0, 3).unwrap());
    assert!(!liouville_check(Operator::PLaplace(2.0), 10.0, 10.0, 3).unwrap());
    assert!(liouville_check(Operator::KHessian(1), 3.0, 3.0, 3).unwrap());
    assert!(matches!(liouville_check(Operator::PLaplace(2.0), 1.0, 1.0, 3), Err(Error::Parameter(_))));
    assert!(matches!(liouville_check(Operator::PLaplace(3.0), 1.5, 2.0, 7), Err(Error::Parameter(_))));
}

/// Cross-multiplied form of the Liouville inequality, `None` outside
/// `q1 q2 > (p-1)^2`.
fn liouville_table(p: f64, q1: f64, q2: f64, n: f64) -> Option<bool> {
    let d = p - 1.0;
    let den = q1 * q2 - d * d;
    if den <= 0.0 {
        return None;
    }
    let m = if q1 > q2 { q1 } else { q2 };
    Some(p * (q1 * q2 + d * m) >= n * den)
}

#[test]
fn liouville_grid_matches_recomputation() {
    let qs = [1.5, 2.0, 3.0, 10.0];
    let mut checked = 0;
    for p in [2.0, 3.0] {
        for n in [3usize, 5, 7] {
            for &q1 in &qs {
                for &q2 in &qs {
                    let got = liouville_check(Operator::PLaplace(p), q1, q2, n).ok();
                    assert_eq!(got, liouville_table(p, q1, q2, n as f64), "p={p} N={n} q=({q1},{q2})");
                    if p == 2.0 {
                        let k1 = liouville_check(Operator::KHessian(1), q1, q2, n).ok();
                        assert_eq!(k1, got, "k=1 vs p=2 at N={n} q=({q1},{q2})");
                    }
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 96);
    // Spot values: p=2, N=3 switches between q = 3 (equality) and q = 10.
    assert_eq!(liouville_table(2.0, 3.0, 3.0, 3.0), Some(true));
    assert_eq!(liouville_table(3.0, 10.0, 10.0, 7.0), Some(false));
}

#[test]
fn subcritical_examples() {
    let p2 = Operator::PLaplace(2.0);
    assert!(subcritical_check(p2, 2.0, 3, true).unwrap());
    assert!(!subcritical_check(p2, 3.0, 3, true).unwrap());
    assert!(subcritical_check(p2, 2.999, 3, true).unwrap());
    let k1 = Operator::KHessian(1);
    for s in [0.5, 1.0, 2.0, 2.999, 3.0, 4.0] {
        assert_eq!(subcritical_check(k1, s, 3, false).unwrap(), subcritical_check(p2, s, 3, true).unwrap(), "s = {s}");
    }
    // Bounded k-Hessian problems need s1 >= k.
    assert!(!subcritical_check(k1, 0.5, 3, true).unwrap());
    assert!(subcritical_check(Operator::KHessian(2), 2.0, 5, true).unwrap());
    assert!(!subcritical_check(Operator::KHessian(2), 10.0, 5, true).unwrap());
    assert!(subcritical_check(Operator::KHessian(2), 3.0, 4, true).is_err());
    assert!(subcritical_check(Operator::PLaplace(3.0), 1.0, 3, true).is_err());
}

#[test]
fn constants_at_laplace_quadratic() {
    let c = IterationConstants::new(1.0, 2.0, 2.0, 2.0, 1.0).unwrap();
    assert_eq!((c.c68, c.c69, c.c70), (2.0, 36.0, 2592.0));
    // 2 (2592^2 * 2) M^4 = 18
    let m = (18.0f64 / (2.0 * 2592.0 * 2592.0 * 2.0)).powf(0.25);
    assert!((c.m_star / m - 1.0).abs() < 1e-12);
    let h = c.scaled(0.5);
    assert_eq!((h.c68, h.c69, h.c70, h.m_star), (1.0, 18.0, 1296.0, c.m_star));
}

proptest! {
    #[test]
    fn m_star_solves_its_equation(
        cs in 0.2f64..5.0, beta in 1.2f64..4.0, q in 0.3f64..3.0, s in 0.3f64..3.0, c71 in 0.2f64..5.0,
    ) {
        let c = IterationConstants::new(cs, beta, q, s, c71).unwrap();
        let g = 1.0 / (beta - 1.0);
        let ln2 = 2f64.ln();
        // Logarithm of c★ 2^g (c70^s 2^{s-1})^g c71 M★^{qs/(β-1)^3} against ln(c69/2).
        let lhs = cs.ln() + g * ln2 + g * (s * c.c70.ln() + (s - 1.0) * ln2) + c71.ln()
            + q * s / (beta - 1.0).powi(3) * c.m_star.ln();
        let rhs = c.c69.ln() - ln2;
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
        prop_assert!(c.m_star > 0.0 && c.m_star.is_finite());
        prop_assert!(c.c69 > c.c68 && c.c68 > 0.0 && c.c70 > 0.0);
    }
}

#[test]
fn zero_data_is_a_fixed_point() {
    let spec = SystemSpec::new(Operator::PLaplace(2.0), 3, 2.0, 2.0, DiscreteMeasure::zero(3), DiscreteMeasure::zero(3), unit_box());
    let run = picard_iterate(&spec, &small_opts()).unwrap();
    assert_eq!(run.outcome, Outcome::Converged);
    for st in &run.states {
        assert!(st.u.values.iter().chain(&st.v.values).all(|x| *x == 0.0));
    }
    assert_eq!(run.residual, Some((0.0, 0.0)));
    let b = solution_bounds(&run, &run.constants);
    assert!(b.passed());
    assert_eq!((b.max_ratio_u, b.max_ratio_v), (0.0, 0.0));
}

#[test]
fn small_dirac_converges_within_bounds() {
    let spec = dirac_system(Operator::PLaplace(2.0), 1e-3);
    let run = picard_iterate(&spec, &small_opts()).unwrap();
    assert_eq!(run.outcome, Outcome::Converged);
    assert!(run.states.len() <= 50);
    assert!(run.states.iter().all(|s| s.monotone && !s.bound_violation));
    assert!(run.last().increment < 1e-6);
    let (ru, rv) = run.residual.unwrap();
    assert!(ru < 1e-3 && rv < 1e-3, "residuals {ru} {rv}");
    assert!(run.last().u.values.iter().all(|x| *x >= 0.0));
    assert!(solution_bounds(&run, &run.constants).passed());
}

#[test]
fn shrunken_constants_are_detected() {
    let run = picard_iterate(&dirac_system(Operator::PLaplace(2.0), 1e-3), &small_opts()).unwrap();
    // One halving stays inside the slack of the bounds; repeated halving
    // eventually crosses the iterate.
    assert!(solution_bounds(&run, &run.constants.scaled(0.5)).passed());
    let mut f = 1.0;
    let mut halvings = 0;
    while solution_bounds(&run, &run.constants.scaled(f)).passed() {
        f *= 0.5;
        halvings += 1;
        assert!(halvings < 30);
    }
    let b = solution_bounds(&run, &run.constants.scaled(f));
    assert!(b.max_ratio_u > 1.0 || b.max_ratio_v > 1.0);
    // v_m = W[η] while c69 = 36, so five halvings stay below and six cross.
    assert_eq!(halvings, 6);
}

#[test]
fn large_dirac_diverges() {
    let run = picard_iterate(&dirac_system(Operator::PLaplace(2.0), 1e6), &small_opts()).unwrap();
    assert!(run.outcome.diverged(), "{:?}", run.outcome);
    assert!(run.states.len() <= 50);
    assert!(run.residual.is_none());
}

#[test]
fn plain_mode_and_hessian_k1_match_laplace_run() {
    let base = picard_iterate(&dirac_system(Operator::PLaplace(2.0), 1e-2), &small_opts()).unwrap();
    let plain = picard_iterate(&dirac_system(Operator::PLaplace(2.0), 1e-2), &PicardOptions { mode: PicardMode::Plain, ..small_opts() }).unwrap();
    let hess = picard_iterate(&dirac_system(Operator::KHessian(1), 1e-2), &small_opts()).unwrap();
    assert_eq!(base.states, plain.states);
    assert_eq!(base.states, hess.states);
}

#[test]
fn c_star_scales_the_first_iterate() {
    let a = picard_iterate(&dirac_system(Operator::PLaplace(2.0), 1e-3), &small_opts()).unwrap();
    let b = picard_iterate(&dirac_system(Operator::PLaplace(2.0), 1e-3).with_c_star(2.0), &small_opts()).unwrap();
    for (x, y) in a.states[0].v.values.iter().zip(&b.states[0].v.values) {
        assert!((2.0 * x - y).abs() <= 1e-15 * y.abs());
    }
    assert_eq!(b.constants.c68, 4.0);
}

#[test]
fn whole_space_runs_need_a_window() {
    let mut spec = dirac_system(Operator::PLaplace(2.0), 1e-3);
    spec.domain = SystemDomain::WholeSpace;
    assert!(matches!(picard_iterate(&spec, &small_opts()), Err(Error::Parameter(_))));
    let opts = PicardOptions { n: 9, window: Some(BoxDomain::cube(3, -1.0, 1.0).unwrap()), ..PicardOptions::default() };
    let run = picard_iterate(&spec, &opts).unwrap();
    assert_eq!(run.outcome, Outcome::Converged);
    assert!(run.states.iter().all(|s| !s.bound_violation));
}

#[test]
fn invalid_systems_are_rejected() {
    let mut spec = dirac_system(Operator::PLaplace(3.0), 1e-3);
    assert!(matches!(picard_iterate(&spec, &small_opts()), Err(Error::Parameter(_))));
    spec.operator = Operator::PLaplace(2.0);
    spec.q1 = 0.5;
    spec.q2 = 1.5;
    assert!(matches!(picard_iterate(&spec, &small_opts()), Err(Error::Parameter(_))));
    let spec = dirac_system(Operator::KHessian(2), 1e-3);
    assert!(matches!(picard_iterate(&spec, &small_opts()), Err(Error::Parameter(_))));
}

#[test]
fn hypothesis_holds_for_small_data() {
    let spec = dirac_system(Operator::PLaplace(2.0), 1e-3);
    let run = picard_iterate(&spec, &small_opts()).unwrap();
    let cache = CapacityCache::in_memory(0.25);
    let family = dyadic_balls(&[vec![0.0; 3]], 0.5, 4);
    let rep = hypothesis_check(&spec, &run, &family, &cache).unwrap();
    assert_eq!(rep.passed(), Some(true), "max ratio {}", rep.max_ratio);
    assert!(rep.diverging.is_empty());
    let big = dirac_system(Operator::PLaplace(2.0), 1e6);
    let run = picard_iterate(&big, &small_opts()).unwrap();
    let rep = hypothesis_check(&big, &run, &family, &cache).unwrap();
    assert_eq!(rep.passed(), Some(false));
}

#[test]
fn majorant_examples() {
    let x0 = [0.0; 3];
    assert_eq!(corollary_d_majorant(1.0, &x0, 2.0, 3, 1.0, &[1.0, 0.0, 0.0]).unwrap(), 0.0);
    assert_eq!(corollary_d_majorant(1.0, &x0, 2.0, 3, 1.0, &[0.0, 2.0, 0.0]).unwrap(), 0.0);
    let v = corollary_d_majorant(1.0, &x0, 2.0, 3, f64::INFINITY, &[0.0, 0.0, 0.5]).unwrap();
    assert!((v - 2.0).abs() < 1e-15);
    for p in [1.5, 2.0, 2.5] {
        let x = [0.3, 0.1, 0.0];
        let a0 = corollary_d_majorant(0.7, &x0, p, 3, 2.0, &x).unwrap();
        let a1 = corollary_d_majorant(0.7 * 2f64.powf(p - 1.0), &x0, p, 3, 2.0, &x).unwrap();
        assert!((a1 / a0 - 2.0).abs() < 1e-12);
    }
    assert!(corollary_d_majorant(1.0, &x0, 3.0, 3, 1.0, &[0.5, 0.0, 0.0]).is_err());
}

#[test]
fn majorant_matches_truncated_dirac_potential() {
    // W^R_{1,p}[aδ](x) = a^{1/(p-1)} (p-1)/(N-p) (|x|^{-(N-p)/(p-1)} - R^{-(N-p)/(p-1)})
    let q = QuadratureRule::with_nodes(512);
    for (p, n) in [(2.0, 3usize), (1.5, 3), (3.0, 5)] {
        let a = 0.8;
        let m = DiscreteMeasure::dirac(vec![0.0; n], a).unwrap();
        let params = PotentialParams::truncated(n, 1.0, p, 3.0);
        let n_f = n as f64;
        for r in [0.25, 1.0, 2.5] {
            let mut x = vec![0.0; n];
            x[0] = r;
            let w = wolff(&m, &params, &q, &x).unwrap();
            let maj = corollary_d_majorant(a, &vec![0.0; n], p, n, 3.0, &x).unwrap();
            let expect = (p - 1.0) / (n_f - p);
            assert!((w / maj / expect - 1.0).abs() < 1e-3, "p={p} N={n} r={r}: {}", w / maj);
        }
    }
}

#[test]
fn run_csv_layout() {
    let run = picard_iterate(&dirac_system(Operator::PLaplace(2.0), 1e-3), &small_opts()).unwrap();
    let csv = run.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,sup_u,sup_v,increment,bound_margin");
    assert_eq!(lines.len(), run.states.len() + 2);
    assert!(lines.last().unwrap().starts_with("# outcome=converged mode=monotone"));
    assert!(lines[1].starts_with("1,0e0,"));
    let fields = run.fields_csv();
    assert_eq!(fields.lines().count(), 13 * 13 * 13 + 1);
    assert!(fields.starts_with("x1,x2,x3,u,v\n"));
}

const CONFIG: &str = "\
# dichotomy, small side
operator = p-laplace
p = 2
q1 = 2
q2 = 2
N = 3
domain = box
lo = -1,-1,-1
hi = 1,1,1
lattice = 13
eta = dirac 1e-3 at 0,0,0
mu = zero
c_star = 1
max_m = 50
tol_conv = 1e-6
mode = monotone
";

#[test]
fn config_round_trip() {
    let cfg = parse_run_config(CONFIG, None).unwrap();
    assert_eq!(cfg.spec, dirac_system(Operator::PLaplace(2.0), 1e-3));
    assert_eq!(cfg.options, small_opts());
    let hess = CONFIG.replace("operator = p-laplace\np = 2", "operator = k-hessian\nk = 1").replace("q1", "s1").replace("q2", "s2");
    let cfg = parse_run_config(&hess, None).unwrap();
    assert_eq!(cfg.spec.operator, Operator::KHessian(1));
    assert_eq!((cfg.spec.q1, cfg.spec.q2), (2.0, 2.0));
}

#[test]
fn config_reads_measure_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("eta.msr"), "measure N=3\natom 0 0 0 0.001\n").unwrap();
    let text = CONFIG.replace("eta = dirac 1e-3 at 0,0,0", "eta = file eta.msr");
    let cfg = parse_run_config(&text, Some(dir.path())).unwrap();
    assert_eq!(cfg.spec.eta, DiscreteMeasure::dirac(vec![0.0; 3], 1e-3).unwrap());
    let missing = CONFIG.replace("eta = dirac 1e-3 at 0,0,0", "eta = file nope.msr");
    assert!(matches!(parse_run_config(&missing, Some(dir.path())), Err(Error::Io(_))));
}

#[test]
fn config_errors() {
    assert!(matches!(parse_run_config(&format!("{CONFIG}bogus = 1\n"), None), Err(Error::Parse { line: 17, .. })));
    assert!(matches!(parse_run_config(&CONFIG.replace("q1 = 2", "q1 = two"), None), Err(Error::Parse { line: 4, .. })));
    assert!(matches!(parse_run_config(&CONFIG.replace("mode = monotone", "mode = fast"), None), Err(Error::Parse { .. })));
    assert!(matches!(parse_run_config(&CONFIG.replace("p = 2", "p = 3"), None), Err(Error::Parameter(_))));
    assert!(matches!(parse_run_config(&format!("{CONFIG}p = 2\n"), None), Err(Error::Parse { .. })));
    assert!(matches!(parse_run_config("N = 3\n", None), Err(Error::Parse { .. })));
}
