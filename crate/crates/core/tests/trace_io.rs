//! Round trips through the on-disk formats.

use sle_core::curvespace::io::{load_slc1, read_csv, save_slc1, write_csv};
use sle_core::harness::{ingest_traces, write_trace, TraceSidecar};
use sle_core::loewner::{sample_chordal_path, CONVENTION};
use sle_core::measures::io::{load_ensemble, save_ensemble};
use sle_core::measures::PathEnsemble;

#[test]
fn sampled_traces_survive_slc1_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (curve, _) = sample_chordal_path(8.0 / 3.0, 0.5, 1e-3, 11, 0).unwrap();
    let path = dir.path().join("one.slc1");
    save_slc1(&path, &curve).unwrap();
    assert_eq!(load_slc1(&path).unwrap(), curve);

    let mut buf = Vec::new();
    write_csv(&mut buf, &curve).unwrap();
    let back = read_csv(&buf[..]).unwrap();
    assert_eq!(back.len(), curve.len());
    for (p, q) in back.points().iter().zip(curve.points()) {
        assert!((p - q).norm() <= 1e-12 * (1.0 + q.norm()));
    }
}

#[test]
fn archive_of_samples_ingests_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let curves: Vec<_> = (0..5).map(|k| sample_chordal_path(2.0, 0.25, 1e-3, 5, k).unwrap().0).collect();
    for (k, cv) in curves.iter().enumerate() {
        let meta = TraceSidecar { dt: Some(1e-3), ..TraceSidecar::new(2.0, 5, k as u64) };
        write_trace(dir.path(), &format!("trace-{k:05}"), cv, &meta).unwrap();
    }
    let sidecar: TraceSidecar =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace-00003.json")).unwrap()).unwrap();
    assert_eq!(sidecar.convention, CONVENTION);
    assert_eq!((sidecar.path, sidecar.dt, sidecar.h), (3, Some(1e-3), None));

    let got = ingest_traces(dir.path()).unwrap();
    assert!(got.failures.is_empty() && got.warnings.is_empty());
    assert_eq!(got.kappa, Some(2.0));
    assert_eq!(got.ensemble.curves(), &curves[..]);

    let ens_path = dir.path().join("all.ens");
    save_ensemble(&ens_path, &got.ensemble).unwrap();
    let back: PathEnsemble = load_ensemble(&ens_path).unwrap();
    assert_eq!(back.curves(), got.ensemble.curves());
    assert_eq!(back.weights(), got.ensemble.weights());
}

#[test]
fn missing_sidecar_is_skipped_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let (curve, _) = sample_chordal_path(4.0, 0.1, 1e-3, 1, 0).unwrap();
    write_trace(dir.path(), "a", &curve, &TraceSidecar::new(4.0, 1, 0)).unwrap();
    save_slc1(&dir.path().join("b.slc1"), &curve).unwrap();
    let got = ingest_traces(dir.path()).unwrap();
    assert_eq!(got.ensemble.len(), 1);
    assert_eq!(got.failures.len(), 1);
    assert!(got.failures[0].0.ends_with("b.slc1"));
}
