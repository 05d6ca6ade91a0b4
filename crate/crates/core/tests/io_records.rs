use std::fs;

use rbki::io::{encode_raw, IoError};
use rbki::random::{gaussian_matrix, rng_for};
use rbki::records::{COLUMNS, SCHEMA_VERSION};
use rbki::{emit_records, read_matrix, write_matrix, Error, Mat, MatrixFormat, TrialRecord};

fn sample() -> Mat {
    let mut m = gaussian_matrix(7, 5, &mut rng_for(1, 0));
    m[(0, 0)] = 1e-300;
    m[(6, 4)] = -1.234_567_890_123_456_7e200;
    m
}

#[test]
fn files_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let m = sample();
    for (name, format) in [("a.mtx", MatrixFormat::MatrixMarket), ("a.bin", MatrixFormat::RawBinary)] {
        let path = dir.path().join(name);
        assert_eq!(MatrixFormat::from_path(&path), format);
        write_matrix(&path, &m, format).unwrap();
        assert_eq!(read_matrix(&path, format).unwrap(), m);
    }
}

#[test]
fn damaged_raw_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    let bytes = encode_raw(&sample());

    fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    let err = read_matrix(&path, MatrixFormat::RawBinary).unwrap_err();
    assert!(matches!(err, IoError::InPath { ref source, .. } if matches!(**source, IoError::Truncated { .. })));
    assert!(err.to_string().contains("m.bin"));

    let mut long = bytes.clone();
    long.push(0);
    fs::write(&path, &long).unwrap();
    let err = read_matrix(&path, MatrixFormat::RawBinary).unwrap_err();
    assert!(matches!(err, IoError::InPath { ref source, .. } if matches!(**source, IoError::TrailingBytes { .. })));

    let mut bad = bytes;
    bad[0] = b'X';
    fs::write(&path, &bad).unwrap();
    let err = read_matrix(&path, MatrixFormat::RawBinary).unwrap_err();
    assert!(matches!(err, IoError::InPath { ref source, .. } if matches!(**source, IoError::BadMagic { .. })));
}

#[test]
fn malformed_matrix_market_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mtx");
    fs::write(&path, "%%MatrixMarket matrix array real general\n2 2\n1.0\n2.0\nnope\n4.0\n").unwrap();
    let err = read_matrix(&path, MatrixFormat::MatrixMarket).unwrap_err();
    match err {
        IoError::InPath { source, .. } => assert!(matches!(*source, IoError::Parse { line: 5, .. }), "{source}"),
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = read_matrix(std::path::Path::new("/nonexistent/m.bin"), MatrixFormat::RawBinary).unwrap_err();
    assert!(matches!(err, IoError::Io { .. }));
}

#[test]
fn ten_thousand_records_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    let mut records = Vec::new();
    for i in (0..10_000u64).rev() {
        let mut r = TrialRecord::new(if i % 2 == 0 { "even" } else { "odd" }, i % 7, i);
        r.k = 20;
        r.b = (i % 5 + 1) as usize;
        r.frobenius_ratio = 1.0 + (i as f64).sqrt() * 1e-3 + 1e-17 * i as f64;
        r.log_bound = -(i as f64) * std::f64::consts::PI;
        r.wall_time = (i % 3 == 0).then_some(0.5);
        r.pass = i % 11 != 0;
        records.push(r);
    }
    emit_records(&records, &path).unwrap();

    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, COLUMNS);
    let col = |name: &str| COLUMNS.iter().position(|c| *c == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10_000);

    let mut expected = records.clone();
    expected.sort_by(|a, b| (a.experiment.as_str(), a.seed, a.trial).cmp(&(b.experiment.as_str(), b.seed, b.trial)));
    for (row, r) in rows.iter().zip(&expected) {
        assert_eq!(row[col("schema_version")].parse::<u32>().unwrap(), SCHEMA_VERSION);
        assert_eq!(&row[col("experiment")], r.experiment);
        assert_eq!(row[col("trial")].parse::<u64>().unwrap(), r.trial);
        assert_eq!(row[col("frobenius_ratio")].parse::<f64>().unwrap(), r.frobenius_ratio);
        assert_eq!(row[col("log_bound")].parse::<f64>().unwrap(), r.log_bound);
        assert!(row[col("sigma_min")].parse::<f64>().unwrap().is_nan());
        assert_eq!(row[col("wall_time_s")].is_empty(), r.wall_time.is_none());
        assert_eq!(row[col("pass")].parse::<bool>().unwrap(), r.pass);
    }
}

#[test]
fn unwritable_record_path_is_reported() {
    let err = emit_records(&[], std::path::Path::new("/nonexistent/dir/out.csv")).unwrap_err();
    assert!(matches!(err, Error::Io(IoError::Io { .. })));
}
