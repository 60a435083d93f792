use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use qgroup_core::analysis::Analysis;
use qgroup_core::builders::GroupTable;
use qgroup_core::duality::dual_of;
use qgroup_core::export::ExportFile;
use qgroup_core::pipeline::{run_analysis, run_pipeline, PipelineConfig, PipelineOutput};
use qgroup_core::report::VerificationReport;
use qgroup_core::spec_file::{builtin, QGSpecFile, SpecKind, BUILTIN_NAMES};
use qgroup_core::{CMatrix, CVector, Error, Tolerance};

create_exception!(qgroup, QGroupError, PyException);

fn err(e: Error) -> PyErr {
    QGroupError::new_err(e.to_string())
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn tolerance(rel: f64) -> PyResult<Tolerance> {
    Tolerance::new(rel, Tolerance::default().abs.min(rel)).map_err(err)
}

/// A finite quantum group with its GNS data, multiplicative unitary and
/// antipode already computed.
#[pyclass(module = "qgroup", frozen)]
struct QuantumGroup {
    spec: Option<QGSpecFile>,
    inner: Analysis,
}

#[pymethods]
impl QuantumGroup {
    /// One of the bundled examples, e.g. "c-s3", "l-q8", "kp".
    #[staticmethod]
    #[pyo3(signature = (name, tol = 1e-10))]
    fn example(name: &str, tol: f64) -> PyResult<Self> {
        QuantumGroup::from_spec(builtin(name).map_err(err)?, tol)
    }

    /// Parses a JSON spec (version 1).
    #[staticmethod]
    #[pyo3(signature = (text, tol = 1e-10))]
    fn from_json(text: &str, tol: f64) -> PyResult<Self> {
        QuantumGroup::from_spec(QGSpecFile::parse(text).map_err(err)?, tol)
    }

    /// Finite groups given by a Cayley table: the function algebra, or the
    /// group algebra when `dual` is true.
    #[staticmethod]
    #[pyo3(signature = (table, dual = false, name = "G", tol = 1e-10))]
    fn from_table(table: Vec<Vec<usize>>, dual: bool, name: &str, tol: f64) -> PyResult<Self> {
        let g = GroupTable::from_rows(table).map_err(err)?;
        let kind = if dual { SpecKind::GroupAlgebra } else { SpecKind::GroupFunction };
        QuantumGroup::from_spec(QGSpecFile::group(kind, &g, name), tol)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Scaling constant.
    #[getter]
    fn nu(&self) -> f64 {
        self.inner.nu
    }

    /// Left Haar functional on the basis.
    fn phi(&self) -> Vec<Complex64> {
        self.inner.phi().coeffs.iter().copied().collect()
    }

    /// Right Haar functional on the basis.
    fn psi(&self) -> Vec<Complex64> {
        self.inner.psi.coeffs.iter().copied().collect()
    }

    /// Coefficients of `Δ(x)` in the basis `e_i ⊗ e_j`, index `i * dim + j`.
    fn comultiply(&self, x: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        let n = self.inner.dim();
        if x.len() != n {
            return Err(err(Error::DimensionMismatch { expected: n, got: x.len() }));
        }
        Ok((&self.inner.qg.comul * CVector::from_vec(x)).iter().copied().collect())
    }

    /// Multiplicative unitary on `H ⊗ H`.
    fn w(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.w)
    }

    fn v(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.v)
    }

    fn gram(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.gns.gram)
    }

    /// `π(e_k)` for every basis element.
    fn representation(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.pi().iter().map(rows).collect()
    }

    fn modular_operator(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.modular.nabla.matrix())
    }

    /// Matrix `A` of the conjugation `v ↦ A conj(v)`.
    fn modular_conjugation(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.modular.j.mat())
    }

    fn modular_element(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.delta.mat)
    }

    fn dual(&self) -> PyResult<QuantumGroup> {
        let (d, _) = dual_of(&self.inner).map_err(err)?;
        Ok(QuantumGroup { spec: None, inner: d })
    }

    /// Runs every verification suite.
    #[pyo3(signature = (seed = 2024, batch = 20, kdims = vec![1, 2, 3]))]
    fn verify(&self, py: Python<'_>, seed: u64, batch: usize, kdims: Vec<usize>) -> PyResult<Report> {
        let cfg = PipelineConfig { tol: self.inner.tol, seed, batch, kdims, ..Default::default() };
        let report = py.detach(|| match &self.spec {
            Some(spec) => run_pipeline(spec, &cfg).map(|o| o.report),
            None => Ok(run_analysis(&self.inner, &cfg).0),
        });
        Ok(Report { inner: report.map_err(err)? })
    }

    /// Versioned JSON with the computed operators; needs a spec.
    fn export_json(&self, py: Python<'_>) -> PyResult<String> {
        let spec = self
            .spec
            .clone()
            .ok_or_else(|| QGroupError::new_err("only quantum groups built from a spec can be exported"))?;
        let out = py.detach(|| run_pipeline(&spec, &PipelineConfig { tol: self.inner.tol, ..Default::default() }));
        let out: PipelineOutput = out.map_err(err)?;
        Ok(ExportFile::from_pipeline(&out).to_json())
    }

    fn __repr__(&self) -> String {
        format!("QuantumGroup({:?}, dim={})", self.inner.name(), self.inner.dim())
    }
}

impl QuantumGroup {
    fn from_spec(spec: QGSpecFile, tol: f64) -> PyResult<Self> {
        let tol = tolerance(tol)?;
        let qg = spec.build(tol).map_err(err)?;
        let inner = Analysis::new(qg, tol).map_err(err)?;
        Ok(QuantumGroup { spec: Some(spec), inner })
    }
}

#[pyclass(module = "qgroup", frozen)]
struct Report {
    inner: VerificationReport,
}

#[pymethods]
impl Report {
    fn all_pass(&self) -> bool {
        self.inner.all_pass()
    }

    /// `(total, passed, failed, skipped)`.
    fn summary(&self) -> (usize, usize, usize, usize) {
        let s = self.inner.summary();
        (s.total, s.passed, s.failed, s.skipped)
    }

    /// `(check_id, residual, tolerance, pass)` per record; residual is None when skipped.
    fn records(&self) -> Vec<(String, Option<f64>, f64, bool)> {
        self.inner.records.iter().map(|r| (r.check_id.clone(), r.residual, r.tolerance, r.pass)).collect()
    }

    fn failures(&self) -> Vec<String> {
        self.inner.failures().iter().map(|r| r.check_id.clone()).collect()
    }

    fn worst(&self, prefix: &str) -> Option<f64> {
        self.inner.worst(prefix)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }
}

/// Validates an exported file and recomputes its operators.
#[pyfunction]
#[pyo3(signature = (text, tol = 1e-10))]
fn import_json(py: Python<'_>, text: &str, tol: f64) -> PyResult<Report> {
    let tol = tolerance(tol)?;
    let rep = py.detach(|| ExportFile::parse(text, tol).and_then(|f| f.revalidate(tol)));
    Ok(Report { inner: rep.map_err(err)? })
}

#[pyfunction]
fn examples() -> Vec<&'static str> {
    BUILTIN_NAMES.to_vec()
}

#[pymodule]
fn qgroup(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<QuantumGroup>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(import_json, m)?)?;
    m.add_function(wrap_pyfunction!(examples, m)?)?;
    m.add("QGroupError", m.py().get_type::<QGroupError>())?;
    Ok(())
}
