//! The opposite and commutant quantum groups, the identities exchanging them
//! under duality, and the isomorphism `Φ(x) = w x w*` onto `(M, Δ)'^op`.

use crate::analysis::Analysis;
use crate::builders::FiniteQuantumGroup;
use crate::duality::{conj_tensor, dual_of};
use crate::error::{Error, Result};
use crate::numlin::{self, kron, CMatrix};
use crate::report::VerificationReport;

/// `(M, χΔ)` with left weight `ψ` and GNS map `Γ`.
pub fn opposite_of(a: &Analysis) -> Result<Analysis> {
    let qg = FiniteQuantumGroup::new(format!("{}^op", a.name()), a.qg.alg.clone(), a.qg.opposite_comul(), a.tol)
        .map_err(|e| e.at("opposite"))?;
    Analysis::with_lambda(qg, a.psi.clone(), a.gamma().clone(), a.tol).map_err(|e| e.at("opposite"))
}

/// `(M', Δ')` with `Δ'(x) = (J ⊗ J)Δ(JxJ)(J ⊗ J)` and `Λ'(x) = JΛ(JxJ)`.
pub fn commutant_of(a: &Analysis) -> Result<Analysis> {
    let j = &a.modular.j;
    let basis: Vec<CMatrix> = a.pi().iter().map(|p| j.conjugate_by(p)).collect();
    let lam = j.mat() * a.gns.lam.conjugate();
    let eval = |x: &CMatrix| conj_tensor(j, j, &a.comul_op(&j.conjugate_by(x)));
    Analysis::from_represented(&format!("{}'", a.name()), &basis, eval, lam, a.tol).map_err(|e| e.at("commutant"))
}

/// Subspace equality of the algebras and the largest difference of the two
/// comultiplications on the first one's basis.
pub fn compare(x: &Analysis, y: &Analysis) -> (bool, f64) {
    let same = numlin::subspace_equal(x.pi(), y.pi(), x.tol);
    let comul = x.pi().iter().map(|b| numlin::dist(&x.comul_op(b), &y.comul_op(b))).fold(0.0, f64::max);
    (same, comul)
}

fn record_compare(
    rep: &mut VerificationReport,
    id: &str,
    anchor: &str,
    x: &Result<Analysis>,
    y: &Result<Analysis>,
    t: f64,
) {
    match (x, y) {
        (Ok(x), Ok(y)) => {
            let (same, comul) = compare(x, y);
            rep.check(format!("{id}.algebra"), anchor, if same { 0.0 } else { 1.0 }, 0.0);
            rep.check(format!("{id}.comultiplication"), anchor, comul, t);
        }
        (Err(e), _) | (_, Err(e)) => rep.skip(id, anchor, e.to_string()),
    }
}

fn max_over(pi: &[CMatrix], f: impl Fn(&CMatrix) -> f64) -> f64 {
    pi.iter().map(f).fold(0.0, f64::max)
}

/// Identities for the opposite and commutant quantum groups of `a`, whose
/// dual is `d`.
pub fn variants_suite(a: &Analysis, d: &Analysis) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let n = a.dim();
    let tn = a.tol.effective(n);
    let tnn = a.tol.effective(n * n);
    let op = opposite_of(a);
    let comm = commutant_of(a);
    let j = &a.modular.j;

    match &op {
        Ok(op) => {
            rep.merge(op.qg.comultiplication_check(a.tol).prefixed("op"));
            let nullity = (op.qg.left_nullity as f64 - 1.0).abs() + (op.qg.right_nullity as f64 - 1.0).abs();
            rep.check("op.haar_unique", "Haar weights of (M, Δ)^op are unique", nullity, 0.0);
            let closed = numlin::flip_conj(&a.v.adjoint(), n, n);
            rep.check("op.w", "W^op = Σ V* Σ", numlin::dist(&op.w, &closed), tnn);
            rep.check("op.delta", "δ^op = δ^-1", numlin::dist(&op.delta.mat, &a.delta.pos.real_power(-1.0)), tn);
            let mut tau = 0.0f64;
            for t in [0.5, 1.0] {
                tau = tau.max(max_over(a.pi(), |p| numlin::dist(&op.antipode.tau_op(t, p), &a.antipode.tau_op(-t, p))));
            }
            rep.check("op.tau", "τ^op_t = τ_-t", tau, tn);
            let r = max_over(a.pi(), |p| numlin::dist(&op.antipode.r_op(p), &a.antipode.r_op(p)));
            rep.check("op.r", "R^op = R", r, tn);
        }
        Err(e) => rep.skip("op", "(M, Δ)^op", e.to_string()),
    }

    match &comm {
        Ok(c) => {
            rep.merge(c.qg.comultiplication_check(a.tol).prefixed("comm"));
            let nullity = (c.qg.left_nullity as f64 - 1.0).abs() + (c.qg.right_nullity as f64 - 1.0).abs();
            rep.check("comm.haar_unique", "Haar weights of (M, Δ)' are unique", nullity, 0.0);
            let commutant = numlin::commutant(a.pi(), n, a.tol).unwrap_or_default();
            let same = numlin::subspace_equal(c.pi(), &commutant, a.tol);
            rep.check("comm.algebra", "M' = π(M)'", if same { 0.0 } else { 1.0 }, 0.0);
            rep.check("comm.w_v_hat", "W' = V̂", numlin::dist(&c.w, &d.v), tnn);
            rep.check("comm.w_jj", "W' = (J ⊗ J) W (J ⊗ J)", numlin::dist(&c.w, &conj_tensor(j, j, &a.w)), tnn);
            rep.check("comm.delta", "δ' = J δ J", numlin::dist(&c.delta.mat, &j.conjugate_by(&a.delta.mat)), tn);
            let mut tau = 0.0f64;
            for t in [0.5, 1.0] {
                tau = tau.max(max_over(c.pi(), |x| {
                    let rhs = j.conjugate_by(&a.antipode.tau_op(-t, &j.conjugate_by(x)));
                    numlin::dist(&c.antipode.tau_op(t, x), &rhs)
                }));
            }
            rep.check("comm.tau", "τ'_t(x) = J τ_-t(JxJ) J", tau, tn);
            let r = max_over(c.pi(), |x| {
                numlin::dist(&c.antipode.r_op(x), &j.conjugate_by(&a.antipode.r_op(&j.conjugate_by(x))))
            });
            rep.check("comm.r", "R'(x) = J R(JxJ) J", r, tn);
        }
        Err(e) => rep.skip("comm", "(M, Δ)'", e.to_string()),
    }

    let dual = |x: &Result<Analysis>| -> Result<Analysis> {
        match x {
            Ok(x) => dual_of(x).map(|(d, _)| d),
            Err(e) => Err(Error::ValidationFailed(e.to_string())),
        }
    };
    let lift = |x: &Result<Analysis>, f: fn(&Analysis) -> Result<Analysis>| -> Result<Analysis> {
        match x {
            Ok(x) => f(x),
            Err(e) => Err(Error::ValidationFailed(e.to_string())),
        }
    };
    let dref: Result<Analysis> = Ok(d.clone());
    record_compare(&mut rep, "identity.op_dual", "((M, Δ)^op)^ = ((M, Δ)^)'", &dual(&op), &commutant_of(d), tnn);
    record_compare(
        &mut rep,
        "identity.comm_dual",
        "((M, Δ)')^ = ((M, Δ)^)^op",
        &dual(&comm),
        &lift(&dref, opposite_of),
        tnn,
    );
    record_compare(
        &mut rep,
        "identity.comm_op",
        "((M, Δ)')^op = ((M, Δ)^op)'",
        &lift(&comm, opposite_of),
        &lift(&op, commutant_of),
        tnn,
    );
    let aref: Result<Analysis> = Ok(a.clone());
    record_compare(&mut rep, "involution.op_op", "((M, Δ)^op)^op = (M, Δ)", &aref, &lift(&op, opposite_of), tnn);
    record_compare(&mut rep, "involution.comm_comm", "((M, Δ)')' = (M, Δ)", &aref, &lift(&comm, commutant_of), tnn);

    let w = d.modular.j.compose(j);
    let w2 = j.compose(&d.modular.j) * crate::antipode::nu_phase(a.nu);
    rep.check("phi.w_phase", "w = ĴJ = ν^{i/4} J Ĵ", numlin::dist(&w, &w2), tn);
    rep.check("phi.w_unitary", "w is unitary", numlin::unitary_defect(&w), tn);
    match &comm {
        Ok(c) => {
            let image: Vec<CMatrix> = a.pi().iter().map(|p| &w * p * w.adjoint()).collect();
            let same = numlin::subspace_equal(&image, c.pi(), a.tol);
            rep.check("phi.algebra", "Φ(M) = M'", if same { 0.0 } else { 1.0 }, 0.0);
            let ww = kron(&w, &w);
            let res = max_over(a.pi(), |p| {
                let lhs = numlin::flip_conj(&c.comul_op(&(&w * p * w.adjoint())), n, n);
                let rhs = &ww * a.comul_op(p) * ww.adjoint();
                numlin::dist(&lhs, &rhs)
            });
            rep.check("phi.intertwines", "Δ'^op(Φ(x)) = (Φ ⊗ Φ)Δ(x)", res, tnn);
        }
        Err(e) => rep.skip("phi", "Φ(x) = w x w*", e.to_string()),
    }
    rep
}
