//! The predual convolution algebra, the dual quantum group built from `W`,
//! and the identities tying both sides together.

use num_complex::Complex64;

use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::numlin::{self, c64, kron, AntilinearOp, CMatrix, CVector, PositiveOperator, Tolerance};
use crate::report::VerificationReport;
use crate::sampling::Sampler;
use crate::star_algebra::Functional;

/// `M_*` with `ωθ = (ω ⊗ θ)Δ`, `ω*(x) = conj ω(S(x)*)`, `λ(ω) = (ω ⊗ ι)(W)`
/// and `<ξ(ω), Λ(x)> = ω(x*)`.
#[derive(Clone, Debug)]
pub struct PredualData {
    n: usize,
    comul: CMatrix,
    /// Column `k` holds the coordinates of `S(e_k)*`.
    s_star: CMatrix,
    /// `(L^†)^{-1} s`: column `k` is `ξ(ε_k)`.
    xi_mat: CMatrix,
    /// `λ(ε_k)`, so `W = Σ_k π(e_k) ⊗ B_k`.
    pub b: Vec<CMatrix>,
    /// Residual of the decomposition of `W`.
    pub w_fit: f64,
}

impl PredualData {
    pub fn new(a: &Analysis) -> Result<Self> {
        let n = a.dim();
        let pi = a.pi();
        let p = CMatrix::from_fn(n * n, n, |r, k| pi[k][(r / n, r % n)]);
        let mut y = CMatrix::zeros(n * n, n * n);
        for r in 0..n * n {
            let block = numlin::first_leg_block(&a.w, r / n, r % n, n);
            y.set_row(r, &numlin::flatten(&block).transpose());
        }
        let (coef, w_fit) = numlin::lstsq(&p, &y, a.tol);
        if w_fit > a.tol.effective(n * n) {
            return Err(Error::inconsistent("W ∈ π(M) ⊗ B(H)", w_fit));
        }
        let b = (0..n).map(|k| numlin::unflatten(coef.row(k).transpose().as_slice(), n, n)).collect();
        let l_dag_inv = a.gns.lam.adjoint().try_inverse().ok_or(Error::GramNotPd)?;
        let xi_mat = l_dag_inv * a.qg.alg.involution();
        let s_star = a.qg.alg.star_coords() * a.antipode.s_mat.conjugate();
        Ok(PredualData { n, comul: a.qg.comul.clone(), s_star, xi_mat, b, w_fit })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn product(&self, omega: &Functional, theta: &Functional) -> Functional {
        let k = CVector::from_fn(self.n * self.n, |r, _| omega.coeffs[r / self.n] * theta.coeffs[r % self.n]);
        Functional::new(self.comul.transpose() * k)
    }

    pub fn sharp(&self, omega: &Functional) -> Functional {
        Functional::new((self.s_star.transpose() * &omega.coeffs).conjugate())
    }

    pub fn lambda(&self, omega: &Functional) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        for (k, b) in self.b.iter().enumerate() {
            out += b * omega.coeffs[k];
        }
        out
    }

    pub fn xi(&self, omega: &Functional) -> CVector {
        &self.xi_mat * &omega.coeffs
    }

    /// `Λ̂` in the basis `λ(ε_k)`.
    pub fn lambda_hat(&self) -> &CMatrix {
        &self.xi_mat
    }
}

/// `Δ̂(x) = Σ W (x ⊗ 1) W^* Σ`.
pub fn dual_comul(w: &CMatrix, n: usize, x: &CMatrix) -> CMatrix {
    let inner = w * kron(x, &numlin::identity(n)) * w.adjoint();
    numlin::flip_conj(&inner, n, n)
}

/// The dual quantum group `(M̂, Δ̂)` with GNS map `Λ̂(λ(ω)) = ξ(ω)`.
pub fn dual_of(a: &Analysis) -> Result<(Analysis, PredualData)> {
    let pre = PredualData::new(a).map_err(|e| e.at("predual"))?;
    let n = a.dim();
    let w = a.w.clone();
    let dual = Analysis::from_represented(
        &format!("{}^", a.name()),
        &pre.b,
        |x| dual_comul(&w, n, x),
        pre.xi_mat.clone(),
        a.tol,
    )
    .map_err(|e| e.at("dual"))?;
    Ok((dual, pre))
}

/// `(J ⊗ J) X (J ⊗ J)`.
pub fn conj_tensor(j1: &AntilinearOp, j2: &AntilinearOp, x: &CMatrix) -> CMatrix {
    j1.tensor(j2).conjugate_by(x)
}

/// Largest commutator of `x` with `A ⊗ 1` and `1 ⊗ B` over the given
/// families; zero iff `x ∈ A' ⊗ B'` when the families span von Neumann
/// algebras.
pub fn tensor_membership(x: &CMatrix, first: &[CMatrix], second: &[CMatrix], n: usize) -> f64 {
    let id = numlin::identity(n);
    let a = first.iter().map(|m| numlin::commutator(x, &kron(m, &id)).norm());
    let b = second.iter().map(|m| numlin::commutator(x, &kron(&id, m)).norm());
    a.chain(b).fold(0.0, f64::max)
}

fn orthonormal(basis: &[CMatrix], tol: Tolerance) -> Vec<CMatrix> {
    numlin::algebra_closure(basis, tol).unwrap_or_else(|_| basis.to_vec())
}

fn commutant_of(basis: &[CMatrix], n: usize, tol: Tolerance) -> Vec<CMatrix> {
    numlin::commutant(basis, n, tol).unwrap_or_default()
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

/// `Ŵ`, `V`, `V̂` from their defining formulas against the closed forms,
/// memberships, and pentagons.
pub fn dual_unitaries_suite(a: &Analysis, d: &Analysis) -> VerificationReport {
    let n = a.dim();
    let nn = n * n;
    let t = a.tol.effective(nn);
    let mut rep = VerificationReport::new();
    let w_hat_closed = numlin::flip_conj(&a.w.adjoint(), n, n);
    rep.check("unitaries.w_hat", "Ŵ = Σ W* Σ", numlin::dist(&d.w, &w_hat_closed), t);
    let v_closed = conj_tensor(&d.modular.j, &d.modular.j, &w_hat_closed);
    rep.check("unitaries.v", "V = (Ĵ ⊗ Ĵ) Σ W* Σ (Ĵ ⊗ Ĵ)", numlin::dist(&a.v, &v_closed), t);
    let v_hat_closed = conj_tensor(&a.modular.j, &a.modular.j, &a.w);
    rep.check("unitaries.v_hat", "V̂ = (J ⊗ J) W (J ⊗ J)", numlin::dist(&d.v, &v_hat_closed), t);

    let m = orthonormal(a.pi(), a.tol);
    let mh = orthonormal(d.pi(), a.tol);
    let mc = commutant_of(a.pi(), n, a.tol);
    let mhc = commutant_of(d.pi(), n, a.tol);
    rep.check("membership.w", "W ∈ M ⊗ M̂", tensor_membership(&a.w, &mc, &mhc, n), t);
    rep.check("membership.w_hat", "Ŵ ∈ M̂ ⊗ M", tensor_membership(&d.w, &mhc, &mc, n), t);
    rep.check("membership.v", "V ∈ M̂' ⊗ M", tensor_membership(&a.v, &mh, &mc, n), t);
    rep.check("membership.v_hat", "V̂ ∈ M' ⊗ M̂", tensor_membership(&d.v, &m, &mhc, n), t);

    let t3 = a.tol.effective(nn * n);
    for (id, anchor, u) in [
        ("pentagon.w", "W12 W13 W23 = W23 W12", &a.w),
        ("pentagon.w_hat", "Ŵ12 Ŵ13 Ŵ23 = Ŵ23 Ŵ12", &d.w),
        ("pentagon.v", "V12 V13 V23 = V23 V12", &a.v),
        ("pentagon.v_hat", "V̂12 V̂13 V̂23 = V̂23 V̂12", &d.v),
    ] {
        rep.check(id, anchor, numlin::pentagon_residual(u, n), t3);
    }
    rep
}

/// The duality theorem: the dual's modular data against `G`, `N`, `I`, and
/// the implementation of `τ`, `R` on both sides.
pub fn duality_theorem_suite(a: &Analysis, d: &Analysis, pre: &PredualData) -> VerificationReport {
    let n = a.dim();
    let nn = n * n;
    let tn = a.tol.effective(n);
    let tnn = a.tol.effective(nn);
    let mut rep = VerificationReport::new();
    let t_hat_sharp = d.modular.t.sharp();
    rep.check("duality.t_hat_g", "T̂* = G", t_hat_sharp.dist(&a.polar.g), tn);
    rep.check(
        "duality.nabla_hat_n",
        "∇̂ = N^-1",
        numlin::dist(&d.modular.nabla_matrix(), &a.polar.n.real_power(-1.0)),
        tn,
    );
    rep.check("duality.j_hat_i", "Ĵ = I", d.modular.j.dist(&a.polar.i), tn);
    let n_hat = d.polar.n.matrix();
    rep.check("duality.n_hat", "N̂ = ∇^-1", numlin::dist(&n_hat, &a.modular.nabla.real_power(-1.0)), tn);
    rep.check("duality.i_hat", "Î = J", d.polar.i.dist(&a.modular.j), tn);

    let lam = &a.gns.lam;
    let star = a.qg.alg.star_coords();
    let lhs = t_hat_sharp.mat() * lam.conjugate();
    let rhs = lam * &star * a.antipode.s_inv_mat.conjugate();
    rep.check("duality.t_hat_lambda", "T̂* Λ(x) = Λ(S^-1(x)*)", numlin::dist(&lhs, &rhs), tn * lam.norm());

    for t in [0.5, 1.0] {
        let u = d.modular.nabla.imag_power(t);
        let tau =
            a.pi().iter().map(|p| numlin::dist(&a.antipode.tau_op(t, p), &(&u * p * u.adjoint()))).fold(0.0, f64::max);
        rep.check(format!("implement.tau[t={t}]"), "τ_t(x) = ∇̂^it x ∇̂^-it", tau, tn);
        let u = a.modular.nabla.imag_power(t);
        let tau_hat =
            d.pi().iter().map(|p| numlin::dist(&d.antipode.tau_op(t, p), &(&u * p * u.adjoint()))).fold(0.0, f64::max);
        rep.check(format!("implement.tau_hat[t={t}]"), "τ̂_t(x) = ∇^it x ∇^-it", tau_hat, tn);
    }
    let r = a
        .pi()
        .iter()
        .map(|p| numlin::dist(&a.antipode.r_op(p), &d.modular.j.conjugate_by(&p.adjoint())))
        .fold(0.0, f64::max);
    rep.check("implement.r", "R(x) = Ĵ x* Ĵ", r, tn);
    let r_hat = d
        .pi()
        .iter()
        .map(|p| numlin::dist(&d.antipode.r_op(p), &a.modular.j.conjugate_by(&p.adjoint())))
        .fold(0.0, f64::max);
    rep.check("implement.r_hat", "R̂(x) = J x* J", r_hat, tn);

    let mut rr = CMatrix::zeros(nn, nn);
    for (k, b) in pre.b.iter().enumerate() {
        rr += kron(&a.antipode.r_op(&a.pi()[k]), &d.antipode.r_op(b));
    }
    rep.check("w.r_r_hat", "(R ⊗ R̂)(W) = W", numlin::dist(&rr, &a.w), tnn);
    for t in [0.5, 1.0] {
        let u = kron(&a.antipode.n.imag_power(-t), &d.antipode.n.imag_power(-t));
        let res = numlin::dist(&(&u * &a.w * u.adjoint()), &a.w);
        rep.check(format!("w.tau_tau_hat[t={t}]"), "(τ_t ⊗ τ̂_t)(W) = W", res, tnn);
    }
    let nab = kron(&d.modular.nabla_matrix(), &a.modular.nabla_matrix());
    rep.check("w.nabla_hat_nabla", "W(∇̂ ⊗ ∇) = (∇̂ ⊗ ∇)W", numlin::commutator(&a.w, &nab).norm(), tnn * nab.norm());
    let k = kron(d.modular.j.mat(), a.modular.j.mat());
    rep.check("w.j_hat_j", "W(Ĵ ⊗ J) = (Ĵ ⊗ J)W*", (&a.w * &k - &k * a.w.transpose()).norm(), tnn);

    match a.p_operator() {
        Ok(p) => {
            for t in [0.5, 1.0] {
                let lhs = d.modular.nabla.imag_power(t);
                let rhs = p.imag_power(t) * a.modular.j.conjugate_by(&a.delta.pos.imag_power(t));
                rep.check(format!("duality.nabla_hat_p[t={t}]"), "∇̂^it = P^it J δ^it J", numlin::dist(&lhs, &rhs), tn);
            }
        }
        Err(e) => rep.skip("duality.nabla_hat_p", "∇̂^it = P^it J δ^it J", e.to_string()),
    }
    rep.check("duality.p_hat", "P̂ = P", numlin::dist(&d.p, &a.p), tn * a.p.norm());

    let lhs = d.modular.j.mat() * a.gamma().conjugate();
    let rhs = lam * &star * a.antipode.r_mat.conjugate();
    rep.check("jhoed.gamma", "Ĵ Γ(x) = Λ(R(x)*)", numlin::dist(&lhs, &rhs), tn * lam.norm());
    let phase = crate::antipode::nu_phase(a.nu);
    let jj = d.modular.j.compose(&a.modular.j);
    let jj2 = a.modular.j.compose(&d.modular.j) * phase;
    rep.check("jhoed.phase", "Ĵ J = ν^{i/4} J Ĵ", numlin::dist(&jj, &jj2), tn);
    rep.check("duality.nu_hat", "ν̂ = ν^-1", (d.nu - 1.0 / a.nu).abs(), tn);
    rep.check(
        "dual.haar_weight",
        "φ̂ is left invariant",
        d.psi_ratio_residual.max(crate::antipode::proportionality(d.phi(), &d.solver_phi).1),
        tn,
    );
    let ranks = numlin::rank(pre.lambda_hat(), a.tol);
    rep.check_noted("dual.xi_span", "span ξ(ω) = H", (n - ranks.min(n)) as f64, 0.0, format!("rank {ranks} of {n}"));
    let span = numlin::span_rank(&pre.b, a.tol);
    rep.check_noted(
        "dual.lambda_injective",
        "λ is injective and λ(M_*) = M̂",
        (n - span.min(n)) as f64,
        0.0,
        format!("rank {span} of {n}"),
    );
    rep.check("dual.w_decomposition", "W = Σ π(e_k) ⊗ λ(ε_k)", pre.w_fit, tnn);
    rep
}

/// Rebuilds the dual of the dual and compares it with the original.
pub fn pontryagin_check(a: &Analysis, d: &Analysis) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let n = a.dim();
    let tn = a.tol.effective(n);
    let anchor = "(M̂̂, Δ̂̂) = (M, Δ)";
    let dd = match dual_of(d) {
        Ok((dd, _)) => dd,
        Err(e) => {
            rep.skip("pontryagin.build", anchor, e.to_string());
            return rep;
        }
    };
    rep.check("pontryagin.algebra", "M̂̂ = M", flag(numlin::subspace_equal(dd.pi(), a.pi(), a.tol)), 0.0);
    let mut c = CMatrix::zeros(n, n);
    let mut drift = 0.0f64;
    for (k, p) in dd.pi().iter().enumerate() {
        let (coords, r) = a.gns.coords.coords(p);
        drift = drift.max(r);
        c.set_column(k, &coords);
    }
    rep.check("pontryagin.coordinates", "M̂̂ ⊂ π(M)", drift, tn);
    let lam = &a.gns.lam * &c;
    rep.check("pontryagin.lambda", "Λ̂̂ = Λ", numlin::dist(&dd.gns.lam, &lam), tn * lam.norm());
    let phi = c.transpose() * &a.phi().coeffs;
    rep.check("pontryagin.phi", "φ̂̂ = φ", (&dd.phi().coeffs - phi).norm(), tn);
    rep.check("pontryagin.delta", "δ̂̂ = δ", numlin::dist(&dd.delta.mat, &a.delta.mat), tn * a.delta.mat.norm());
    let gamma = a.gamma() * &c;
    rep.check("pontryagin.gamma", "Γ̂̂ = Γ", numlin::dist(dd.gamma(), &gamma), tn * gamma.norm());
    rep.check("pontryagin.w", "Ŵ̂ = W", numlin::dist(&dd.w, &a.w), a.tol.effective(n * n));
    let comul = a.pi().iter().map(|p| numlin::dist(&dd.comul_op(p), &a.comul_op(p))).fold(0.0, f64::max);
    rep.check("pontryagin.comultiplication", "Δ̂̂ = Δ", comul, a.tol.effective(n * n));
    rep
}

/// `dim(π(M) ∩ M̂)`.
pub fn intersection_check(a: &Analysis, d: &Analysis) -> usize {
    numlin::intersection_dim(a.pi(), d.pi(), a.tol)
}

pub fn intersection_suite(a: &Analysis, d: &Analysis) -> VerificationReport {
    let k = intersection_check(a, d);
    let mut rep = VerificationReport::new();
    rep.check_noted("intersection.trivial", "M ∩ M̂ = C", (k as f64 - 1.0).abs(), 0.0, format!("dimension {k}"));
    rep
}

/// Operators entering the commutation relations.
#[derive(Clone, Debug)]
pub struct CommutationInputs {
    pub nabla: PositiveOperator,
    pub nabla_prime: PositiveOperator,
    pub nabla_hat: PositiveOperator,
    pub nabla_hat_prime: PositiveOperator,
    pub j: AntilinearOp,
    pub j_hat: AntilinearOp,
    pub p: PositiveOperator,
    pub delta: PositiveOperator,
    pub nu: f64,
}

impl CommutationInputs {
    pub fn new(a: &Analysis, d: &Analysis) -> Result<Self> {
        Ok(CommutationInputs {
            nabla: a.modular.nabla.clone(),
            nabla_prime: a.nabla_prime().clone(),
            nabla_hat: d.modular.nabla.clone(),
            nabla_hat_prime: d.nabla_prime().clone(),
            j: a.modular.j.clone(),
            j_hat: d.modular.j.clone(),
            p: a.p_operator()?,
            delta: a.delta.pos.clone(),
            nu: a.nu,
        })
    }

    /// Hats exchanged, `ν ↦ ν^-1`, `δ ↦ δ̂`, `P` kept.
    pub fn swapped(&self, delta_hat: &PositiveOperator) -> Self {
        CommutationInputs {
            nabla: self.nabla_hat.clone(),
            nabla_prime: self.nabla_hat_prime.clone(),
            nabla_hat: self.nabla.clone(),
            nabla_hat_prime: self.nabla_prime.clone(),
            j: self.j_hat.clone(),
            j_hat: self.j.clone(),
            p: self.p.clone(),
            delta: delta_hat.clone(),
            nu: 1.0 / self.nu,
        }
    }
}

const SAMPLES: [(f64, f64); 3] = [(0.5, 1.0), (1.0, -0.7), (2.0, 0.3)];

/// `x^{is} y^{it} = c^{ist} y^{it} x^{is}` at sample points.
fn twisted(x: &PositiveOperator, y: &PositiveOperator, c: f64) -> f64 {
    SAMPLES
        .iter()
        .map(|&(s, t)| {
            let (xs, yt) = (x.imag_power(s), y.imag_power(t));
            let phase: Complex64 = c64(0.0, c.ln() * s * t).exp();
            numlin::dist(&(&xs * &yt), &(&yt * &xs * phase))
        })
        .fold(0.0, f64::max)
}

fn log_commutator(x: &PositiveOperator, y: &PositiveOperator) -> f64 {
    numlin::commutator(&x.log(), &y.log()).norm()
}

/// The relations (com1)–(com8).
pub fn commutation_relations(ci: &CommutationInputs, tol: Tolerance) -> VerificationReport {
    let n = ci.nabla.dim();
    let t = tol.effective(n);
    let mut rep = VerificationReport::new();
    let nu = ci.nu;
    let one = 1.0;
    let pairs: [(&str, &str, &PositiveOperator, &PositiveOperator, f64); 11] = [
        ("com1.nabla_hat_nabla", "∇̂^it ∇^is = ν^ist ∇^is ∇̂^it", &ci.nabla_hat, &ci.nabla, nu),
        ("com1.primes", "∇̂'^it ∇'^is = ν^ist ∇'^is ∇̂'^it", &ci.nabla_hat_prime, &ci.nabla_prime, nu),
        ("com2.nabla_hat_prime", "∇̂^it ∇'^is = ν^ist ∇'^is ∇̂^it", &ci.nabla_hat, &ci.nabla_prime, nu),
        ("com2.nabla_prime", "∇^is ∇'^it = ∇'^it ∇^is", &ci.nabla, &ci.nabla_prime, one),
        ("com5.p_nabla", "P^is ∇^it = ∇^it P^is", &ci.p, &ci.nabla, one),
        ("com5.p_nabla_prime", "P^is ∇'^it = ∇'^it P^is", &ci.p, &ci.nabla_prime, one),
        ("com6.p_delta", "P^is δ^it = δ^it P^is", &ci.p, &ci.delta, one),
        ("com7.nabla_delta", "∇^is δ^it = ν^ist δ^it ∇^is", &ci.nabla, &ci.delta, nu),
        ("com7.nabla_prime_delta", "∇'^is δ^it = ν^ist δ^it ∇'^is", &ci.nabla_prime, &ci.delta, nu),
        ("com8.nabla_hat_delta", "∇̂^is δ^it = δ^it ∇̂^is", &ci.nabla_hat, &ci.delta, one),
        ("com8.nabla_hat_prime_delta", "∇̂'^is δ^it = δ^it ∇̂'^is", &ci.nabla_hat_prime, &ci.delta, one),
    ];
    let kac = (nu - 1.0).abs() <= t;
    for (id, anchor, x, y, c) in pairs {
        rep.check(id, anchor, twisted(x, y, c), t);
        if kac {
            rep.check(format!("{id}.log"), format!("[log, log] = 0 for {anchor}"), log_commutator(x, y), t);
        }
    }
    let conj = |j: &AntilinearOp, x: &CMatrix| j.conjugate_by(x);
    let rel = |m: &CMatrix| t * m.norm().max(1.0);
    let nab = ci.nabla.matrix();
    let nabp = ci.nabla_prime.matrix();
    let pm = ci.p.matrix();
    let dm = ci.delta.matrix();
    rep.check("com3.j_hat_nabla", "Ĵ ∇ Ĵ = ∇'", numlin::dist(&conj(&ci.j_hat, &nab), &nabp), rel(&nabp));
    rep.check("com3.j_nabla", "J ∇ J = ∇^-1", numlin::dist(&conj(&ci.j, &nab), &ci.nabla.real_power(-1.0)), rel(&nab));
    rep.check(
        "com3.j_nabla_prime",
        "J ∇' J = ∇'^-1",
        numlin::dist(&conj(&ci.j, &nabp), &ci.nabla_prime.real_power(-1.0)),
        rel(&nabp),
    );
    rep.check("com4.j_hat_p", "Ĵ P Ĵ = P^-1", numlin::dist(&conj(&ci.j_hat, &pm), &ci.p.real_power(-1.0)), rel(&pm));
    rep.check(
        "com4.j_hat_delta",
        "Ĵ δ Ĵ = δ^-1",
        numlin::dist(&conj(&ci.j_hat, &dm), &ci.delta.real_power(-1.0)),
        rel(&dm),
    );
    rep
}

/// Both passes of the commutation table.
pub fn commutation_table(a: &Analysis, d: &Analysis) -> VerificationReport {
    match CommutationInputs::new(a, d) {
        Ok(ci) => commutation_table_with(&ci, &d.delta.pos, a.tol),
        Err(e) => {
            let mut rep = VerificationReport::new();
            rep.skip("com", "commutation relations", e.to_string());
            rep
        }
    }
}

pub fn commutation_table_with(
    ci: &CommutationInputs,
    delta_hat: &PositiveOperator,
    tol: Tolerance,
) -> VerificationReport {
    let mut rep = commutation_relations(ci, tol);
    rep.merge(commutation_relations(&ci.swapped(delta_hat), tol).prefixed("swap"));
    rep
}

/// Seeded checks of the convolution algebra and the maps `λ`, `ξ`.
pub fn predual_suite(a: &Analysis, d: &Analysis, pre: &PredualData, seed: u64, samples: usize) -> VerificationReport {
    let n = a.dim();
    let mut s = Sampler::new(seed);
    let mut rnd = || Functional::new(s.vector(n));
    let mut worst = [0.0f64; 8];
    for _ in 0..samples {
        let (om, th, et) = (rnd(), rnd(), rnd());
        let scale = om.coeffs.norm() * th.coeffs.norm();
        let ot = pre.product(&om, &th);
        let assoc = pre.product(&ot, &et).dist(&pre.product(&om, &pre.product(&th, &et)));
        worst[0] = worst[0].max(assoc / (scale * et.coeffs.norm()));
        let mult = numlin::dist(&pre.lambda(&ot), &(pre.lambda(&om) * pre.lambda(&th)));
        worst[1] = worst[1].max(mult / scale);
        let star = numlin::dist(&pre.lambda(&pre.sharp(&om)), &pre.lambda(&om).adjoint());
        worst[2] = worst[2].max(star / om.coeffs.norm());
        let xi = (pre.lambda(&et) * pre.xi(&om) - pre.xi(&pre.product(&et, &om))).norm();
        worst[3] = worst[3].max(xi / (et.coeffs.norm() * om.coeffs.norm()));
        let invol = pre.sharp(&pre.sharp(&om)).dist(&om);
        worst[4] = worst[4].max(invol / om.coeffs.norm());
        let anti = pre.sharp(&ot).dist(&pre.product(&pre.sharp(&th), &pre.sharp(&om)));
        worst[5] = worst[5].max(anti / scale);
        let t_hat = (d.modular.t.apply(&pre.xi(&om)) - pre.xi(&pre.sharp(&om))).norm();
        worst[6] = worst[6].max(t_hat / om.coeffs.norm());
        // <ξ(ω), Λ(x)> = ω(x*) on the basis
        let lam = &a.gns.lam;
        let alg = &a.qg.alg;
        let pair = (0..n)
            .map(|k| {
                let lhs = lam.column(k).dotc(&pre.xi(&om));
                let rhs = om.eval(&alg.involute(&alg.basis_element(k)));
                (lhs - rhs).norm()
            })
            .fold(0.0, f64::max);
        worst[7] = worst[7].max(pair / om.coeffs.norm());
    }
    let t = a.tol.effective(n);
    let mut rep = VerificationReport::new();
    let rows = [
        ("predual.associative", "(ωθ)η = ω(θη)"),
        ("predual.lambda_multiplicative", "λ(ωθ) = λ(ω)λ(θ)"),
        ("predual.lambda_star", "λ(ω*) = λ(ω)*"),
        ("predual.lambda_xi", "λ(η)ξ(ω) = ξ(ηω)"),
        ("predual.sharp_involutive", "(ω*)* = ω"),
        ("predual.sharp_antimultiplicative", "(ωθ)* = θ*ω*"),
        ("predual.t_hat", "T̂ Λ̂(λ(ω)) = Λ̂(λ(ω*))"),
        ("predual.xi", "<ξ(ω), Λ(x)> = ω(x*)"),
    ];
    for ((id, anchor), r) in rows.iter().zip(worst) {
        rep.check(*id, *anchor, r, t);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{function_algebra, group_algebra, kac_paljutkin, GroupTable};
    use crate::numlin::ONE;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn fail_list(rep: &VerificationReport) -> Vec<String> {
        rep.failures().iter().map(|r| format!("{} {:?}", r.check_id, r.residual)).collect()
    }

    #[test]
    fn group_convolution() {
        let g = GroupTable::symmetric3();
        let a = Analysis::new(function_algebra(&g).unwrap(), tol()).unwrap();
        let pre = PredualData::new(&a).unwrap();
        let ev = |k: usize| Functional::basis(6, k);
        for x in 0..6 {
            for y in 0..6 {
                assert!(pre.product(&ev(x), &ev(y)).dist(&ev(g.mul(x, y))) < 1e-12);
            }
            assert!(pre.product(&ev(g.identity()), &ev(x)).dist(&ev(x)) < 1e-12);
            assert!(pre.sharp(&ev(x)).dist(&ev(g.inverse(x))) < 1e-12);
        }
    }

    #[test]
    fn z2_lambda_is_translation() {
        let a = Analysis::new(function_algebra(&GroupTable::cyclic(2)).unwrap(), tol()).unwrap();
        let pre = PredualData::new(&a).unwrap();
        let flip = CMatrix::from_row_slice(2, 2, &[numlin::ZERO, ONE, ONE, numlin::ZERO]);
        assert!(numlin::dist(&pre.lambda(&Functional::basis(2, 1)), &flip) < 1e-12);
        assert!(numlin::dist(&pre.lambda(&Functional::basis(2, 0)), &numlin::identity(2)) < 1e-12);
    }

    #[test]
    fn duals_of_examples() {
        let z2 = Analysis::new(function_algebra(&GroupTable::cyclic(2)).unwrap(), tol()).unwrap();
        let (d, _) = dual_of(&z2).unwrap();
        assert_eq!(d.dim(), 2);
        assert!(d.qg.cocommutativity_defect() < 1e-10);
        assert!(z2.qg.cocommutativity_defect() < 1e-10);
        assert!(d.qg.alg.commutativity_defect() < 1e-10);

        let s3 = Analysis::new(function_algebra(&GroupTable::symmetric3()).unwrap(), tol()).unwrap();
        let (d, _) = dual_of(&s3).unwrap();
        assert_eq!(d.dim(), 6);
        assert!(d.qg.alg.commutativity_defect() > 0.1);
        assert!(d.qg.cocommutativity_defect() < 1e-10);
        assert_eq!(d.qg.alg.center_dim(tol()), 3);
        assert_eq!(numlin::commutant(d.pi(), 6, tol()).unwrap().len(), 6);
    }

    #[test]
    fn suites_pass() {
        for qg in [
            function_algebra(&GroupTable::trivial()).unwrap(),
            function_algebra(&GroupTable::cyclic(2)).unwrap(),
            function_algebra(&GroupTable::symmetric3()).unwrap(),
            group_algebra(&GroupTable::symmetric3()).unwrap(),
            kac_paljutkin().unwrap(),
        ] {
            let a = Analysis::new(qg, tol()).unwrap();
            let (d, pre) = dual_of(&a).unwrap();
            let mut rep = dual_unitaries_suite(&a, &d);
            rep.merge(duality_theorem_suite(&a, &d, &pre));
            rep.merge(pontryagin_check(&a, &d));
            rep.merge(commutation_table(&a, &d));
            rep.merge(intersection_suite(&a, &d));
            rep.merge(predual_suite(&a, &d, &pre, 7, 10));
            rep.merge(d.w_structure_suite());
            assert!(rep.all_pass(), "{}: {:?}", a.name(), fail_list(&rep));
        }
    }

    #[test]
    fn fake_delta_breaks_the_table() {
        let a = Analysis::new(function_algebra(&GroupTable::symmetric3()).unwrap(), tol()).unwrap();
        let (d, _) = dual_of(&a).unwrap();
        let mut ci = CommutationInputs::new(&a, &d).unwrap();
        let diag = CMatrix::from_fn(6, 6, |r, c| if r == c { c64(1.0 + r as f64, 0.0) } else { numlin::ZERO });
        ci.delta = PositiveOperator::new(&diag, tol()).unwrap();
        let rep = commutation_table_with(&ci, &d.delta.pos, tol());
        assert!(!rep.get("com4.j_hat_delta").unwrap().pass);
    }
}
