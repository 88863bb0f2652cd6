use std::path::Path;

use matchsim::coherent::{simulate_batch, BatchSpec, InputPolicy, RunRecord};
use matchsim::output::{
    read_json_lines, resource_csv, write_json_lines, write_resource_csv, RESOURCE_CSV_HEADER,
};
use matchsim::resource::resource_curve;
use matchsim::{CoherentConfig, ImperfectionModel, Protocol, SimOptions, TiMetric};

fn dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("matchsim-output-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn records_round_trip_through_json_lines() {
    let spec = BatchSpec {
        protocol: Protocol::Sm,
        config: CoherentConfig::new(50, 3.0).unwrap(),
        model: ImperfectionModel::table1_detector_only(),
        options: SimOptions::default(),
        input: InputPolicy::Random,
        trials: 200,
        seed: 5,
    };
    let records = simulate_batch(&spec).unwrap();
    let path = dir().join("records.jsonl");
    write_json_lines(&path, &records).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 200);
    assert!(!text.contains('\r'));
    let back: Vec<RunRecord> = read_json_lines(&path).unwrap();
    assert_eq!(back, records);
}

#[test]
fn csv_has_fixed_columns() {
    let pts = resource_curve(
        Protocol::Hm,
        &ImperfectionModel::ideal(),
        0.1,
        TiMetric::LogNPlusE,
        &[16, 32],
        false,
    )
    .unwrap();
    let csv = resource_csv(&pts);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(RESOURCE_CSV_HEADER));
    for line in lines {
        assert_eq!(line.split(',').count(), 9);
        assert!(line.ends_with(",log_n_plus_e,hm,false"));
    }
}

#[test]
fn io_errors_name_the_path() {
    let bad = Path::new("/nonexistent-dir/for/sure/out.csv");
    let err = write_resource_csv(bad, &[]).unwrap_err().to_string();
    assert!(err.contains("/nonexistent-dir/for/sure/out.csv"), "{err}");
    let err = read_json_lines::<RunRecord>(bad).unwrap_err().to_string();
    assert!(err.contains("out.csv"));
}

#[test]
fn malformed_json_line_reports_line_number() {
    let path = dir().join("bad.jsonl");
    std::fs::write(&path, "{}\n").unwrap();
    let err = read_json_lines::<RunRecord>(&path).unwrap_err().to_string();
    assert!(err.contains(":1:"), "{err}");
}
