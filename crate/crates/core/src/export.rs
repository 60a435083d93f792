//! Versioned JSON persistence of computed quantum groups.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::duality::{self, PredualData};
use crate::error::{Error, Result};
use crate::numlin::{self, c64, CMatrix, Tolerance};
use crate::pipeline::PipelineOutput;
use crate::report::VerificationReport;
use crate::spec_file::QGSpecFile;

pub const EXPORT_VERSION: u32 = 1;

/// Row-major entries as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixData {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixData { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, got: self.entries.len() });
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i * self.cols + j];
            c64(re, im)
        }))
    }

    fn column(v: &crate::CVector) -> Self {
        MatrixData::from_matrix(&CMatrix::from_column_slice(v.len(), 1, v.as_slice()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSection {
    pub phi: MatrixData,
    pub psi: MatrixData,
    pub gram: MatrixData,
    pub lambda: MatrixData,
    pub w: MatrixData,
    pub v: MatrixData,
    pub nabla: MatrixData,
    /// Matrix `A` of the antilinear `v ↦ A conj(v)`.
    pub j: MatrixData,
    pub n: MatrixData,
    pub i: MatrixData,
    pub delta: MatrixData,
    pub nu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSection {
    /// `λ(ε_k)` for the basis functionals `ε_k`.
    pub basis: Vec<MatrixData>,
    pub lambda: MatrixData,
    pub w: MatrixData,
    pub nabla: MatrixData,
    pub j: MatrixData,
    pub n: MatrixData,
    pub i: MatrixData,
    pub delta: MatrixData,
    pub nu: f64,
}

/// Missing sections are `null` and listed in `absent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportFile {
    pub version: u32,
    pub spec: QGSpecFile,
    pub group: Option<GroupSection>,
    pub dual: Option<DualSection>,
    pub absent: Vec<String>,
}

fn group_section(a: &Analysis) -> GroupSection {
    let m = MatrixData::from_matrix;
    GroupSection {
        phi: MatrixData::column(&a.phi().coeffs),
        psi: MatrixData::column(&a.psi.coeffs),
        gram: m(&a.gns.gram),
        lambda: m(&a.gns.lam),
        w: m(&a.w),
        v: m(&a.v),
        nabla: m(&a.modular.nabla.matrix()),
        j: m(a.modular.j.mat()),
        n: m(&a.polar.n.matrix()),
        i: m(a.polar.i.mat()),
        delta: m(&a.delta.mat),
        nu: a.nu,
    }
}

fn dual_section(d: &Analysis, pre: &PredualData) -> DualSection {
    let m = MatrixData::from_matrix;
    DualSection {
        basis: pre.b.iter().map(m).collect(),
        lambda: m(pre.lambda_hat()),
        w: m(&d.w),
        nabla: m(&d.modular.nabla.matrix()),
        j: m(d.modular.j.mat()),
        n: m(&d.polar.n.matrix()),
        i: m(d.polar.i.mat()),
        delta: m(&d.delta.mat),
        nu: d.nu,
    }
}

impl ExportFile {
    pub fn from_pipeline(out: &PipelineOutput) -> Self {
        let group = out.analysis.as_ref().map(group_section);
        let dual = out.dual.as_ref().map(|(d, pre)| dual_section(d, pre));
        let mut absent = Vec::new();
        if group.is_none() {
            absent.push("group".to_string());
        }
        if dual.is_none() {
            absent.push("dual".to_string());
        }
        ExportFile { version: EXPORT_VERSION, spec: out.spec.clone(), group, dual, absent }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("export serializes")
    }

    /// Parses and runs the fast validation: algebra axioms and unitarity of `W`.
    pub fn parse(text: &str, tol: Tolerance) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::SpecInvalid(e.to_string()))?;
        let version = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != EXPORT_VERSION {
            return Err(Error::VersionUnsupported(version));
        }
        let file: ExportFile = serde_json::from_value(value).map_err(|e| Error::SpecInvalid(e.to_string()))?;
        file.validate(tol)?;
        Ok(file)
    }

    pub fn validate(&self, tol: Tolerance) -> Result<()> {
        let raw = self.spec.structure()?;
        let axioms = raw.alg.axioms_check(tol);
        if let Some(r) = axioms.failures().first() {
            return Err(Error::ValidationFailed(format!("algebra axiom {} fails", r.check_id)));
        }
        let mut unitaries = vec![];
        if let Some(g) = &self.group {
            unitaries.push(("W", g.w.to_matrix()?));
        }
        if let Some(d) = &self.dual {
            unitaries.push(("dual W", d.w.to_matrix()?));
        }
        for (name, u) in unitaries {
            let defect = numlin::unitary_defect(&u);
            if defect > tol.effective(u.nrows()) {
                return Err(Error::ValidationFailed(format!("{name} is not unitary (defect {defect:.3e})")));
            }
        }
        Ok(())
    }

    /// Recomputes everything from the spec and compares the stored operators,
    /// then reruns the Pontryagin check.
    pub fn revalidate(&self, tol: Tolerance) -> Result<VerificationReport> {
        let a = Analysis::new(self.spec.build(tol)?, tol)?;
        let mut rep = VerificationReport::new();
        let cmp = |rep: &mut VerificationReport, id: &str, stored: &MatrixData, fresh: &CMatrix| -> Result<()> {
            let m = stored.to_matrix()?;
            let r = if m.shape() == fresh.shape() { numlin::dist(&m, fresh) } else { f64::INFINITY };
            rep.check(
                format!("import.{id}"),
                format!("stored {id} = recomputed {id}"),
                r,
                tol.effective(m.nrows()) * fresh.norm().max(1.0),
            );
            Ok(())
        };
        if let Some(g) = &self.group {
            let f = group_section(&a);
            cmp(&mut rep, "w", &g.w, &f.w.to_matrix()?)?;
            cmp(&mut rep, "v", &g.v, &f.v.to_matrix()?)?;
            cmp(&mut rep, "gram", &g.gram, &a.gns.gram)?;
            cmp(&mut rep, "nabla", &g.nabla, &f.nabla.to_matrix()?)?;
            cmp(&mut rep, "j", &g.j, &f.j.to_matrix()?)?;
            cmp(&mut rep, "n", &g.n, &f.n.to_matrix()?)?;
            cmp(&mut rep, "i", &g.i, &f.i.to_matrix()?)?;
            cmp(&mut rep, "delta", &g.delta, &a.delta.mat)?;
            rep.check("import.nu", "stored ν = recomputed ν", (g.nu - a.nu).abs(), tol.effective(1));
        }
        let (d, pre) = duality::dual_of(&a)?;
        if let Some(ds) = &self.dual {
            let f = dual_section(&d, &pre);
            cmp(&mut rep, "dual.w", &ds.w, &d.w)?;
            cmp(&mut rep, "dual.lambda", &ds.lambda, &f.lambda.to_matrix()?)?;
        }
        rep.merge(duality::pontryagin_check(&a, &d));
        rep.set_example(a.name());
        Ok(rep)
    }
}

pub fn export_qg(out: &PipelineOutput, path: &Path) -> Result<()> {
    std::fs::write(path, ExportFile::from_pipeline(out).to_json())?;
    Ok(())
}

pub fn import_qg(path: &Path, tol: Tolerance) -> Result<ExportFile> {
    ExportFile::parse(&std::fs::read_to_string(path)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::GroupTable;
    use crate::pipeline::{run_pipeline, PipelineConfig};
    use crate::spec_file::SpecKind;

    fn z2(skip_dual: bool) -> PipelineOutput {
        let spec = QGSpecFile::group(SpecKind::GroupFunction, &GroupTable::cyclic(2), "z2");
        run_pipeline(&spec, &PipelineConfig { skip_dual, ..Default::default() }).unwrap()
    }

    #[test]
    fn w_of_c_z2_is_a_permutation() {
        let f = ExportFile::from_pipeline(&z2(false));
        let w = &f.group.unwrap().w;
        assert_eq!((w.rows, w.cols), (4, 4));
        for [re, im] in &w.entries {
            assert!(im.abs() < 1e-12);
            assert!(re.abs() < 1e-12 || (re - 1.0).abs() < 1e-12, "{re}");
        }
    }

    #[test]
    fn partial_export_marks_absent_dual() {
        let f = ExportFile::from_pipeline(&z2(true));
        assert_eq!(f.absent, vec!["dual".to_string()]);
        let v: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        assert!(v["dual"].is_null());
    }

    #[test]
    fn version_and_tampering_are_rejected() {
        let tol = Tolerance::default();
        let f = ExportFile::from_pipeline(&z2(false));
        let mut bad = f.clone();
        bad.version = 7;
        assert!(matches!(ExportFile::parse(&bad.to_json(), tol), Err(Error::VersionUnsupported(7))));
        let mut bad = f.clone();
        bad.group.as_mut().unwrap().w.entries[0][0] += 0.1;
        match ExportFile::parse(&bad.to_json(), tol) {
            Err(Error::ValidationFailed(m)) => assert!(m.contains("unitary")),
            other => panic!("{other:?}"),
        }
        assert_eq!(ExportFile::parse(&f.to_json(), tol).unwrap(), f);
    }
}
