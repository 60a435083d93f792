//! End to end run: spec → quantum group → GNS, W, antipode → dual → all suites.

use std::time::Instant;

use crate::analysis::Analysis;
use crate::antipode;
use crate::builders::FiniteQuantumGroup;
use crate::duality::{self, PredualData};
use crate::error::{Error, Result};
use crate::invariance::{self, InvarianceConfig};
use crate::numlin::Tolerance;
use crate::report::VerificationReport;
use crate::spec_file::QGSpecFile;
use crate::variants;

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub tol: Tolerance,
    pub seed: u64,
    pub kdims: Vec<usize>,
    pub batch: usize,
    pub predual_samples: usize,
    /// Stop after the quantum group itself (no dual, no duality suites).
    pub skip_dual: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tol: Tolerance::default(),
            seed: 2024,
            kdims: vec![1, 2, 3],
            batch: 20,
            predual_samples: 20,
            skip_dual: false,
        }
    }
}

impl PipelineConfig {
    pub fn invariance(&self) -> InvarianceConfig {
        InvarianceConfig { kdims: self.kdims.clone(), batch: self.batch, seed: self.seed }
    }
}

pub struct PipelineOutput {
    pub spec: QGSpecFile,
    pub report: VerificationReport,
    pub analysis: Option<Analysis>,
    pub dual: Option<(Analysis, PredualData)>,
}

impl PipelineOutput {
    pub fn all_pass(&self) -> bool {
        self.report.all_pass()
    }
}

const GROUP_STAGES: [&str; 4] = ["haar", "w_structure", "strong_invariance_check", "delta_identity"];
const DUAL_STAGES: [&str; 9] = [
    "dual_haar",
    "dual_unitaries",
    "duality_theorem",
    "predual",
    "pontryagin",
    "commutation_table",
    "intersection",
    "variants",
    "strong_invariance",
];

fn skip_all(rep: &mut VerificationReport, stages: &[&str], reason: &str) {
    for s in stages {
        rep.skip(format!("{s}.skipped"), "not run", reason);
    }
}

fn timed<T>(rep: &mut VerificationReport, stage: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    rep.add_timing(stage, start.elapsed().as_secs_f64());
    out
}

fn haar_records(rep: &mut VerificationReport, prefix: &str, left: usize, right: usize) {
    rep.check(format!("{prefix}.left_unique"), "θ = r φ for left invariant θ", (left as f64 - 1.0).abs(), 0.0);
    rep.check(format!("{prefix}.right_unique"), "θ = r ψ for right invariant θ", (right as f64 - 1.0).abs(), 0.0);
}

/// Runs every stage. Only an invalid spec is an error; a failing stage is
/// recorded and the stages depending on it are marked as skipped.
pub fn run_pipeline(spec: &QGSpecFile, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let raw = spec.structure()?;
    let name = raw.name.clone();
    let tol = cfg.tol;
    let mut rep = VerificationReport::new();
    let out = |rep: VerificationReport, analysis, dual| -> Result<PipelineOutput> {
        let mut rep = rep;
        rep.set_example(&name);
        Ok(PipelineOutput { spec: spec.clone(), report: rep, analysis, dual })
    };

    let axioms = timed(&mut rep, "axioms", || raw.alg.axioms_check(tol));
    let comul =
        timed(&mut rep, "comultiplication", || crate::builders::comultiplication_check(&raw.alg, &raw.comul, tol));
    let ok = axioms.all_pass() && comul.all_pass();
    let first_failure = axioms.failures().first().map(|r| format!("axioms.{} failed", r.check_id));
    rep.merge(axioms.prefixed("axioms"));
    rep.merge(comul.prefixed("comultiplication"));
    if !ok {
        let reason = first_failure.unwrap_or_else(|| "comultiplication check failed".into());
        skip_all(&mut rep, &GROUP_STAGES, &reason);
        skip_all(&mut rep, &DUAL_STAGES, &reason);
        return out(rep, None, None);
    }

    let qg = match timed(&mut rep, "haar", || {
        FiniteQuantumGroup::new(raw.name.clone(), raw.alg.clone(), raw.comul.clone(), tol)
    }) {
        Ok(qg) => qg,
        Err(e) => {
            if let Error::NonUnique { nullity } = e {
                rep.check("haar.unique", "θ = r φ", nullity as f64 - 1.0, 0.0);
            } else {
                rep.skip("haar.unique", "θ = r φ", e.to_string());
            }
            skip_all(&mut rep, &GROUP_STAGES[1..], &e.to_string());
            skip_all(&mut rep, &DUAL_STAGES, &e.to_string());
            return out(rep, None, None);
        }
    };
    haar_records(&mut rep, "haar", qg.left_nullity, qg.right_nullity);

    let a = match timed(&mut rep, "analysis", || Analysis::new(qg, tol)) {
        Ok(a) => a,
        Err(e) => {
            let reason = e.to_string();
            skip_all(&mut rep, &GROUP_STAGES[1..], &reason);
            skip_all(&mut rep, &DUAL_STAGES, &reason);
            return out(rep, None, None);
        }
    };
    let (r, dual) = run_analysis(&a, cfg);
    rep.merge(r);
    out(rep, Some(a), dual)
}

/// All suites for an already assembled quantum group, including its dual.
pub fn run_analysis(a: &Analysis, cfg: &PipelineConfig) -> (VerificationReport, Option<(Analysis, PredualData)>) {
    let mut rep = VerificationReport::new();
    let r = timed(&mut rep, "w_structure", || a.w_structure_suite());
    rep.merge(r.prefixed("w_structure"));
    let r = timed(&mut rep, "strong_invariance_check", || antipode::strong_invariance_check(a));
    rep.merge(r.prefixed("strong_invariance_check"));
    let r = timed(&mut rep, "delta_identity", || antipode::delta_identity_suite(a));
    rep.merge(r.prefixed("delta_identity"));

    if cfg.skip_dual {
        let r = timed(&mut rep, "strong_invariance", || invariance::strong_invariance_suite(a, &cfg.invariance()));
        rep.merge(r.prefixed("strong_invariance"));
        return (rep, None);
    }

    let (d, pre) = match timed(&mut rep, "dual", || duality::dual_of(a)) {
        Ok(x) => x,
        Err(e) => {
            let reason = e.at("dual").to_string();
            skip_all(&mut rep, &DUAL_STAGES, &reason);
            return (rep, None);
        }
    };
    haar_records(&mut rep, "dual_haar", d.qg.left_nullity, d.qg.right_nullity);
    let r = timed(&mut rep, "dual_unitaries", || duality::dual_unitaries_suite(a, &d));
    rep.merge(r.prefixed("dual_unitaries"));
    let r = timed(&mut rep, "duality_theorem", || duality::duality_theorem_suite(a, &d, &pre));
    rep.merge(r.prefixed("duality_theorem"));
    let r = timed(&mut rep, "predual", || duality::predual_suite(a, &d, &pre, cfg.seed, cfg.predual_samples));
    rep.merge(r.prefixed("predual"));
    let r = timed(&mut rep, "pontryagin", || duality::pontryagin_check(a, &d));
    rep.merge(r.prefixed("pontryagin"));
    let r = timed(&mut rep, "commutation_table", || duality::commutation_table(a, &d));
    rep.merge(r.prefixed("commutation_table"));
    let r = timed(&mut rep, "intersection", || duality::intersection_suite(a, &d));
    rep.merge(r.prefixed("intersection"));
    let r = timed(&mut rep, "variants", || variants::variants_suite(a, &d));
    rep.merge(r.prefixed("variants"));
    let r = timed(&mut rep, "strong_invariance", || invariance::strong_invariance_suite(a, &cfg.invariance()));
    rep.merge(r.prefixed("strong_invariance"));
    rep.set_example(a.name());
    (rep, Some((d, pre)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::GroupTable;
    use crate::spec_file::SpecKind;

    #[test]
    fn trivial_group_passes() {
        let spec = QGSpecFile::group(SpecKind::GroupFunction, &GroupTable::trivial(), "trivial");
        let out = run_pipeline(&spec, &PipelineConfig::default()).unwrap();
        let fails: Vec<_> = out.report.failures().iter().map(|r| r.check_id.clone()).collect();
        assert!(fails.is_empty(), "{fails:?}");
        assert!(out.report.records.len() > 40);
        assert!(out.report.records.iter().all(|r| r.example_id == "trivial"));
    }

    #[test]
    fn broken_involution_stops_at_axioms() {
        let raw = QGSpecFile::group(SpecKind::GroupFunction, &GroupTable::cyclic(2), "z2").structure().unwrap();
        let mut spec = QGSpecFile::from_structure("z2", &raw.alg, &raw.comul);
        for e in &mut spec.involution {
            e.2 = 2.0;
        }
        let out = run_pipeline(&spec, &PipelineConfig::default()).unwrap();
        assert!(!out.all_pass());
        assert!(!out.report.get("axioms.involutive").unwrap().pass);
        assert!(out.analysis.is_none());
        let skipped = out.report.get("pontryagin.skipped").unwrap();
        assert!(skipped.residual.is_none());
        assert!(skipped.note.as_deref().unwrap().contains("axioms"));
    }
}
