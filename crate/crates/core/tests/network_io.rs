use bivirus::network_io::{threshold_and_normalize, IngestReport};
use bivirus::{load_matrix, save_matrix, Error, Matrix, MatrixFormat, NormalizeOptions, RawNetwork};

#[test]
fn files_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let m = Matrix::from_f64_rows(&[[0.1, 2.5e-7, 3.0], [1.0 / 3.0, 0.0, 7.25], [4.0, 5.0, 6.0]]);
    let labels: Vec<String> = ["Lombardia", "Veneto", "Lazio"].iter().map(|s| s.to_string()).collect();
    for name in ["m.csv", "m.json"] {
        let p = dir.path().join(name);
        let fmt = MatrixFormat::from_path(&p).unwrap();
        save_matrix(&m, Some(&labels), &p, fmt).unwrap();
        let back = load_matrix::<f64>(&p, fmt).unwrap();
        assert_eq!(back.entries, m);
        assert_eq!(back.labels.as_deref(), Some(labels.as_slice()));
    }
}

#[test]
fn loading_reports_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "1,2\n3,x\n").unwrap();
    let err = load_matrix::<f64>(&p, MatrixFormat::Csv).unwrap_err().to_string();
    assert!(err.contains('x'), "{err}");
    assert!(load_matrix::<f64>(&dir.path().join("missing.csv"), MatrixFormat::Csv).is_err());
    assert!(MatrixFormat::from_path(std::path::Path::new("m.txt")).is_err());
}

#[test]
fn threshold_keeps_strong_links_and_reports() {
    let raw = RawNetwork::new(
        Matrix::from_f64_rows(&[[10.0, 5.0, 0.01], [0.01, 10.0, 5.0], [5.0, 0.01, 10.0]]),
        None,
    )
    .unwrap();
    let (a, report): (_, IngestReport<f64>) = threshold_and_normalize(&raw, &NormalizeOptions::new(0.01, 2.0)).unwrap();
    assert_eq!(report.entries_zeroed, 3);
    assert!(report.irreducible && !report.positive);
    for s in a.matrix().row_sums() {
        assert!((s - 2.0).abs() <= 1e-12);
    }

    // A threshold above every off-diagonal weight leaves isolated nodes.
    let err = threshold_and_normalize(&raw, &NormalizeOptions::new(0.7, 2.0)).unwrap_err();
    assert!(matches!(err, Error::Reducible { .. }));
}
