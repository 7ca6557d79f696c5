use fasperf::golden::{check_all, parse, SPECFUN_GOLDEN};

#[test]
fn every_golden_record_matches() {
    let records = parse(SPECFUN_GOLDEN).unwrap();
    let outcomes = check_all(&records);
    let failures: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
    for f in &failures {
        eprintln!(
            "{} {:?}: expected {} got {} (err {:e})",
            f.record.function, f.record.inputs, f.record.expected, f.computed, f.abs_error
        );
    }
    assert!(failures.is_empty(), "{} golden mismatches", failures.len());
    let max_err = outcomes.iter().map(|o| o.abs_error).fold(0.0, f64::max);
    eprintln!("max golden error {max_err:e}");
}
