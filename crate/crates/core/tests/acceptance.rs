//! Acceptance criteria over every example and its dual. Prints one PASS/FAIL
//! line per criterion and exits nonzero on any failure.

use std::process::ExitCode;

use qgroup_core::analysis::Analysis;
use qgroup_core::builders::{function_algebra, GroupTable};
use qgroup_core::duality::{commutation_table_with, dual_of, CommutationInputs};
use qgroup_core::export::ExportFile;
use qgroup_core::numlin::{c64, CMatrix, PositiveOperator, ZERO};
use qgroup_core::pipeline::{run_analysis, run_pipeline, PipelineConfig};
use qgroup_core::report::VerificationReport;
use qgroup_core::spec_file::{QGSpecFile, SpecKind};
use qgroup_core::{Error, Tolerance};

const BATCH: usize = 20;

struct Run {
    name: String,
    report: VerificationReport,
    nu: f64,
}

fn specs() -> Vec<QGSpecFile> {
    let mut out = Vec::new();
    for (name, g) in [
        ("trivial", GroupTable::trivial()),
        ("Z2", GroupTable::cyclic(2)),
        ("Z3", GroupTable::cyclic(3)),
        ("Z4", GroupTable::cyclic(4)),
        ("S3", GroupTable::symmetric3()),
        ("Q8", GroupTable::quaternion8()),
    ] {
        out.push(QGSpecFile::group(SpecKind::GroupFunction, &g, &format!("C({name})")));
        out.push(QGSpecFile::group(SpecKind::GroupAlgebra, &g, &format!("L({name})")));
    }
    out.push(QGSpecFile::kac_paljutkin());
    out
}

fn haar(rep: &mut VerificationReport, a: &Analysis) {
    rep.check("haar.left_unique", "θ = r φ", (a.qg.left_nullity as f64 - 1.0).abs(), 0.0);
    rep.check("haar.right_unique", "θ = r ψ", (a.qg.right_nullity as f64 - 1.0).abs(), 0.0);
}

/// The example and its dual, each with the full set of suites.
fn runs_for(spec: &QGSpecFile, cfg: &PipelineConfig) -> Vec<Run> {
    let out = run_pipeline(spec, cfg).expect("spec is valid");
    let mut runs = Vec::new();
    let nu = out.analysis.as_ref().map_or(f64::NAN, |a| a.nu);
    runs.push(Run { name: spec.name(), report: out.report, nu });
    if let Some((d, _)) = &out.dual {
        let (mut report, _) = run_analysis(d, cfg);
        haar(&mut report, d);
        runs.push(Run { name: d.name().to_string(), report, nu: d.nu });
    }
    runs
}

struct Outcome {
    pass: bool,
    worst: f64,
    count: usize,
    detail: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, worst: 0.0, count: 0, detail: Vec::new() }
    }

    fn value(&mut self, label: String, residual: f64, bound: f64) {
        self.count += 1;
        self.worst = self.worst.max(residual);
        if residual.is_nan() || residual > bound {
            self.pass = false;
            self.detail.push(format!("{label}: {residual:.3e} > {bound:.0e}"));
        }
    }

    fn flag(&mut self, label: String, ok: bool) {
        self.count += 1;
        if !ok {
            self.pass = false;
            self.detail.push(label);
        }
    }

    /// Every record under each prefix must exist, pass, and sit below `bound`.
    fn records(&mut self, runs: &[Run], prefixes: &[&str], bound: f64) {
        for run in runs {
            for p in prefixes {
                let mut seen = false;
                for r in run.report.matching(p) {
                    seen = true;
                    let label = format!("{} {}", run.name, r.check_id);
                    match r.residual {
                        Some(v) if r.pass => self.value(label, v, bound),
                        Some(v) => {
                            self.flag(format!("{label}: {v:.3e} fails its own tolerance {:.1e}", r.tolerance), false)
                        }
                        None => self.flag(format!("{label}: skipped ({})", r.note.as_deref().unwrap_or("")), false),
                    }
                }
                if !seen {
                    self.flag(format!("{} has no record {p}", run.name), false);
                }
            }
        }
    }
}

fn defects() -> Outcome {
    let mut o = Outcome::new();
    let tol = Tolerance::default();

    let raw = QGSpecFile::group(SpecKind::GroupFunction, &GroupTable::cyclic(3), "C(Z3)").structure().unwrap();
    let mut spec = QGSpecFile::from_structure("broken", &raw.alg, &raw.comul);
    for e in &mut spec.involution {
        e.2 *= 2.0;
    }
    let out = run_pipeline(&spec, &PipelineConfig::default()).unwrap();
    let axioms_fail = out.report.matching("axioms.").any(|r| !r.pass);
    let skipped = out.report.records.iter().filter(|r| r.residual.is_none()).count();
    o.flag("broken involution is caught by axioms".into(), axioms_fail && out.analysis.is_none() && skipped > 0);

    let a = Analysis::new(function_algebra(&GroupTable::symmetric3()).unwrap(), tol).unwrap();
    let mut bad = a.clone();
    bad.w[(0, 1)] += c64(0.05, 0.0);
    let rep = bad.w_structure_suite();
    o.flag("tampered W fails unitarity".into(), !rep.get("w.unitary").unwrap().pass);
    o.flag("tampered W fails the pentagon".into(), !rep.get("w.pentagon").unwrap().pass);
    o.flag("tampered W fails comultiplication".into(), !rep.get("w.comultiplication").unwrap().pass);
    let spec = QGSpecFile::group(SpecKind::GroupFunction, &GroupTable::symmetric3(), "C(S3)");
    let mut file = ExportFile::from_pipeline(&run_pipeline(&spec, &PipelineConfig::default()).unwrap());
    file.group.as_mut().unwrap().w.entries[1][0] += 0.05;
    let rejected = matches!(ExportFile::parse(&file.to_json(), tol), Err(Error::ValidationFailed(_)));
    o.flag("tampered W export is rejected on import".into(), rejected);

    let (d, _) = dual_of(&a).unwrap();
    let mut ci = CommutationInputs::new(&a, &d).unwrap();
    let n = a.dim();
    let fake = CMatrix::from_fn(n, n, |r, c| if r == c { c64(1.0 + r as f64, 0.0) } else { ZERO });
    ci.delta = PositiveOperator::new(&fake, tol).unwrap();
    let rep = commutation_table_with(&ci, &d.delta.pos, tol);
    o.flag("fake δ fails Ĵ δ Ĵ = δ^-1".into(), !rep.get("com4.j_hat_delta").unwrap().pass);
    o
}

fn main() -> ExitCode {
    let cfg = PipelineConfig { batch: BATCH, kdims: vec![1, 2, 3], ..Default::default() };
    let specs = specs();
    let runs: Vec<Run> = std::thread::scope(|s| {
        let handles: Vec<_> = specs.iter().map(|spec| s.spawn(|| runs_for(spec, &cfg))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("example thread")).collect()
    });
    println!("{} quantum groups (examples and duals)", runs.len());

    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut crit = |id: usize, title: &'static str, f: &dyn Fn(&mut Outcome)| {
        let mut o = Outcome::new();
        f(&mut o);
        results.push((id, title, o));
    };

    crit(1, "pentagon for W, Ŵ, V, V̂ ≤ 1e-10", &|o| o.records(&runs, &["dual_unitaries.pentagon."], 1e-10));
    crit(2, "Δ implemented by W and V ≤ 1e-10", &|o| {
        o.records(&runs, &["w_structure.w.comultiplication", "w_structure.v.comultiplication"], 1e-10)
    });
    crit(3, "Haar nullspaces have dimension 1", &|o| o.records(&runs, &["haar.left_unique", "haar.right_unique"], 0.0));
    crit(4, "strengthened invariance, k = 1,2,3, 20 samples ≤ 1e-10", &|o| {
        o.flag(format!("batch {BATCH} ≥ 20"), BATCH >= 20);
        o.records(
            &runs,
            &["strong_invariance.invariance.k1", "strong_invariance.invariance.k2", "strong_invariance.invariance.k3"],
            1e-10,
        )
    });
    crit(5, "strong left invariance ≤ 1e-10", &|o| {
        o.records(&runs, &["strong_invariance_check.strong.left", "strong_invariance_check.strong.right"], 1e-10)
    });
    crit(6, "dual reconciliation ≤ 1e-9", &|o| {
        o.records(
            &runs,
            &[
                "duality_theorem.duality.t_hat_g",
                "duality_theorem.duality.nabla_hat_n",
                "duality_theorem.duality.j_hat_i",
                "dual_unitaries.unitaries.w_hat",
                "dual_unitaries.unitaries.v",
                "dual_unitaries.unitaries.v_hat",
            ],
            1e-9,
        )
    });
    crit(7, "Ĵ Γ(x) = Λ(R(x)*), ĴJ = ν^{i/4} JĴ, |ν - 1| ≤ 1e-10", &|o| {
        o.records(&runs, &["duality_theorem.jhoed.gamma", "duality_theorem.jhoed.phase"], 1e-10);
        for r in &runs {
            o.value(format!("{} |ν - 1|", r.name), (r.nu - 1.0).abs(), 1e-10);
        }
    });
    crit(8, "commutation relations and hatted swap ≤ 1e-9", &|o| {
        o.records(&runs, &["commutation_table.com", "commutation_table.swap.com"], 1e-9)
    });
    crit(9, "Pontryagin: M̂̂ = π(M), Λ̂̂ = Λ ≤ 1e-9, φ̂̂ = φ ≤ 1e-10", &|o| {
        o.records(&runs, &["pontryagin.algebra"], 0.0);
        o.records(&runs, &["pontryagin.lambda"], 1e-9);
        o.records(&runs, &["pontryagin.phi"], 1e-10);
    });
    crit(10, "M ∩ M̂ = C", &|o| o.records(&runs, &["intersection.trivial"], 0.0));
    crit(11, "variants: duality identities and Φ ≤ 1e-9", &|o| {
        o.records(&runs, &["variants.identity.", "variants.phi.intertwines"], 1e-9)
    });
    crit(12, "predual: λ multiplicative, *-preserving, λ(η)ξ(ω) = ξ(ηω) ≤ 1e-10", &|o| {
        o.records(&runs, &["predual.lambda_multiplicative", "predual.lambda_star", "predual.lambda_xi"], 1e-10)
    });
    let d = defects();
    results.push((13, "injected defects are detected", d));

    let mut all = true;
    for (id, title, o) in &results {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} {title} ({} checks, worst {:.3e})", o.count, o.worst);
        for line in o.detail.iter().take(10) {
            println!("      {line}");
        }
        all &= o.pass;
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
