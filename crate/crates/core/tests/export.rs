use std::f64::consts::TAU;

use adiabatic_cs::chern_simons::adiabatic_sweep;
use adiabatic_cs::export::{export_results, parse_record_json, parse_results_csv, ExportFormat, ResultRow, RunRecord};
use adiabatic_cs::presets::{build_preset, PresetName, PresetSpec};

fn sweep_record() -> RunRecord {
    let p = build_preset(&PresetSpec { grid: [16, 16], ..PresetSpec::new(PresetName::Hopf) }).unwrap();
    let sweep = adiabatic_sweep(&p.kk, &[1.0, 0.5, 0.1], &p.domain, &p.quadrature).unwrap();
    let mut rec = RunRecord::new(p.spec, TAU);
    rec.results = sweep.results.iter().map(ResultRow::from).collect();
    rec.fit = Some(sweep.fit);
    rec
}

#[test]
fn files_roundtrip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let rec = sweep_record();

    let json = dir.path().join("run.json");
    export_results(&rec, ExportFormat::Json, &json).unwrap();
    assert_eq!(parse_record_json(&std::fs::read_to_string(&json).unwrap()).unwrap(), rec);

    let csv = dir.path().join("run.csv");
    export_results(&rec, ExportFormat::Csv, &csv).unwrap();
    assert_eq!(parse_results_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap(), rec.results);
}

#[test]
fn unwritable_path_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("run.json");
    let err = export_results(&sweep_record(), ExportFormat::Json, &path).unwrap_err();
    assert!(matches!(err, adiabatic_cs::Error::Io(_)));
}
