use std::fs;

use specden::io::{emit_csv, load_csv, load_series, CSV_HEADER};
use specden::{ErrorRecord, HarnessError};

fn records(n: usize) -> Vec<ErrorRecord> {
    (0..n)
        .map(|i| {
            let x = i as f64;
            ErrorRecord {
                trial: i % 7,
                k: 1 << (i % 17),
                s: -0.5 + x / 99.0,
                empirical_error: (x + 0.1).sqrt() / 3.0,
                expected_bound: 1.0e4 / (x + 1.0).sqrt(),
                highprob_threshold: std::f64::consts::E * 1.0e4 / (x + 1.0).cbrt(),
            }
        })
        .collect()
}

#[test]
fn csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let recs = records(100);
    emit_csv(&recs, &path).unwrap();
    let back = load_csv(&path).unwrap();
    assert_eq!(back.len(), 100);
    for (a, b) in recs.iter().zip(&back) {
        assert_eq!((a.trial, a.k), (b.trial, b.k));
        for (x, y) in [
            (a.s, b.s),
            (a.empirical_error, b.empirical_error),
            (a.expected_bound, b.expected_bound),
            (a.highprob_threshold, b.highprob_threshold),
        ] {
            assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
        }
    }
}

#[test]
fn empty_records_give_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    emit_csv(&[], &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
    assert!(load_csv(&path).unwrap().is_empty());
}

#[test]
fn wrong_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    fs::write(&path, "trial,k,s,error\n0,1,0.0,1.0\n").unwrap();
    assert!(matches!(load_csv(&path), Err(HarnessError::Parse { line: 1, .. })));
}

#[test]
fn bad_record_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    fs::write(&path, format!("{CSV_HEADER}\n0,1,0.0,1.0,2.0,3.0\n0,2,0.0,oops,2.0,3.0\n")).unwrap();
    match load_csv(&path) {
        Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn fixture_loads_as_three_component_series() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/three_columns.csv");
    let series = load_series(path.as_ref()).unwrap();
    assert_eq!((series.dim(), series.len()), (3, 50));
    assert_eq!(series.sample(0), [-0.704669, -1.396603, 0.603738]);
}

#[test]
fn series_parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    fs::write(&path, "# comment\n1.0,2.0\n3.0,x\n").unwrap();
    match load_series(&path) {
        Err(HarnessError::Parse { line, message, .. }) => {
            assert_eq!(line, 3);
            assert!(message.contains('x'));
        }
        other => panic!("{other:?}"),
    }
    fs::write(&path, "1.0,2.0\n3.0\n").unwrap();
    assert!(matches!(load_series(&path), Err(HarnessError::Parse { line: 2, .. })));
    fs::write(&path, "1.0\nNaN\n").unwrap();
    assert!(matches!(load_series(&path), Err(HarnessError::Parse { line: 2, .. })));
    fs::write(&path, "a,b\n").unwrap();
    assert!(load_series(&path).is_err());
}
