//! The thirteen acceptance criteria at their stated tolerances and time
//! limits. Prints one line per criterion.

use wolffkit::suite::{run_suite, time_limit, CRITERIA};

#[test]
fn acceptance_criteria() {
    let ids: Vec<usize> = CRITERIA.iter().map(|c| c.0).collect();
    let report = run_suite(&ids, 8, |_| {}).expect("valid criteria");
    println!();
    let mut failed = Vec::new();
    for r in &report.results {
        let ok = r.passed && r.within_limit();
        let limit = time_limit(r.id).map(|t| format!(" (limit {t} s)")).unwrap_or_default();
        println!(
            "criterion {:>2} {:<22} {} measured={:e} threshold={:e} time={:.2}s{limit} {}",
            r.id,
            r.name,
            if ok { "PASS" } else { "FAIL" },
            r.measured,
            r.threshold,
            r.timed,
            r.detail
        );
        if !ok {
            failed.push(r.id);
        }
    }
    println!("{}", report.to_csv());
    assert_eq!(report.results.len(), 13);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
