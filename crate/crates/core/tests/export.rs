use qgroup_core::builders::GroupTable;
use qgroup_core::export::{export_qg, import_qg, ExportFile};
use qgroup_core::pipeline::{run_pipeline, PipelineConfig};
use qgroup_core::spec_file::{QGSpecFile, SpecKind};
use qgroup_core::{Error, Tolerance};

#[test]
fn round_trip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s3.json");
    let spec = QGSpecFile::group(SpecKind::GroupAlgebra, &GroupTable::symmetric3(), "L(S3)");
    let out = run_pipeline(&spec, &PipelineConfig::default()).unwrap();
    export_qg(&out, &path).unwrap();
    let back = import_qg(&path, Tolerance::default()).unwrap();
    let a = out.analysis.as_ref().unwrap();
    let g = back.group.as_ref().unwrap();
    assert_eq!(g.w.to_matrix().unwrap(), a.w);
    assert_eq!(g.nabla.to_matrix().unwrap(), a.modular.nabla.matrix());
    assert_eq!(g.j.to_matrix().unwrap(), *a.modular.j.mat());
    assert_eq!(back, ExportFile::from_pipeline(&out));
}

#[test]
fn imports_revalidate_and_pass_pontryagin() {
    let tol = Tolerance::default();
    for spec in
        [QGSpecFile::kac_paljutkin(), QGSpecFile::group(SpecKind::GroupFunction, &GroupTable::cyclic(4), "C(Z4)")]
    {
        let out = run_pipeline(&spec, &PipelineConfig::default()).unwrap();
        let text = ExportFile::from_pipeline(&out).to_json();
        let file = ExportFile::parse(&text, tol).unwrap();
        let rep = file.revalidate(tol).unwrap();
        let fails: Vec<_> = rep.failures().iter().map(|r| r.check_id.clone()).collect();
        assert!(fails.is_empty(), "{}: {fails:?}", spec.name());
        assert!(rep.get("pontryagin.algebra").is_some());
    }
}

#[test]
fn tampered_unitary_fails_validation() {
    let spec = QGSpecFile::group(SpecKind::GroupFunction, &GroupTable::symmetric3(), "C(S3)");
    let out = run_pipeline(&spec, &PipelineConfig::default()).unwrap();
    let mut f = ExportFile::from_pipeline(&out);
    f.dual.as_mut().unwrap().w.entries[5][1] = 0.3;
    assert!(matches!(ExportFile::parse(&f.to_json(), Tolerance::default()), Err(Error::ValidationFailed(_))));
}
