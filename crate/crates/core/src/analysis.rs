//! Everything computed for one quantum group: GNS data, `W`, `G`, antipode,
//! `ν`, `δ`, the right weight GNS map `Γ`, `P` and `V`.

use num_complex::Complex64;

use crate::antipode::{self, AntipodeData, ModularElement, RightWeight};
use crate::builders::FiniteQuantumGroup;
use crate::error::{Error, Result};
use crate::gns::{self, GnsData, ModularData, PolarG};
use crate::numlin::{self, c64, kron, CMatrix, PositiveOperator, Tolerance};
use crate::report::VerificationReport;
use crate::star_algebra::{Functional, StarAlgebra};

#[derive(Clone, Debug)]
pub struct Analysis {
    /// `qg.phi` is the left Haar weight realised by `gns`; `qg.psi` is the
    /// right Haar functional returned by the solver.
    pub qg: FiniteQuantumGroup,
    pub solver_phi: Functional,
    pub gns: GnsData,
    pub modular: ModularData,
    pub w: CMatrix,
    pub polar: PolarG,
    pub antipode: AntipodeData,
    pub nu: f64,
    /// Residual of `φ τ_2 = ν^{-2} φ`.
    pub nu_check: f64,
    /// `ψ = φ R`.
    pub psi: Functional,
    /// Relative residual of `φ R ∝ ψ_solver`.
    pub psi_ratio_residual: f64,
    pub delta: ModularElement,
    pub right: RightWeight,
    pub p: CMatrix,
    pub p_defect: f64,
    pub v: CMatrix,
    pub tol: Tolerance,
}

impl Analysis {
    /// GNS through the Cholesky factor of the solver's normalised `φ`.
    pub fn new(qg: FiniteQuantumGroup, tol: Tolerance) -> Result<Self> {
        let gns = GnsData::build(&qg.alg, &qg.phi, tol).map_err(|e| e.at("gns"))?;
        let solver_phi = qg.phi.clone();
        Analysis::assemble(qg, solver_phi, gns, tol)
    }

    /// GNS through a prescribed map `lam` for the left invariant `weight`.
    pub fn with_lambda(mut qg: FiniteQuantumGroup, weight: Functional, lam: CMatrix, tol: Tolerance) -> Result<Self> {
        let gns = GnsData::from_lambda(&qg.alg, &weight, lam, tol).map_err(|e| e.at("gns"))?;
        let solver_phi = std::mem::replace(&mut qg.phi, weight);
        Analysis::assemble(qg, solver_phi, gns, tol)
    }

    /// A quantum group given concretely: `basis` spans a *-algebra of
    /// operators on `H`, `comul_eval` is the comultiplication on it, and `lam`
    /// (columns `Λ(basis_k)`) is a GNS map. The weight is `φ(x) = <Λ(x), Λ(1)>`.
    pub fn from_represented(
        name: &str,
        basis: &[CMatrix],
        comul_eval: impl Fn(&CMatrix) -> CMatrix,
        lam: CMatrix,
        tol: Tolerance,
    ) -> Result<Self> {
        let n = basis.len();
        let labels = (0..n).map(|k| format!("b{k}")).collect();
        let (alg, coords) = StarAlgebra::from_matrices(basis, labels, tol).map_err(|e| e.at("algebra"))?;
        let mut comul = CMatrix::zeros(n * n, n);
        let h = basis[0].nrows();
        for (k, b) in basis.iter().enumerate() {
            let y = comul_eval(b);
            let (c, r) = coords.tensor_coords(&coords, &y);
            if r > tol.effective(h * h) * y.norm().max(1.0) {
                return Err(Error::NotInAlgebra { residual: r }.at("comultiplication"));
            }
            comul.set_column(k, &numlin::flatten(&c));
        }
        let qg = FiniteQuantumGroup::new(name, alg, comul, tol).map_err(|e| e.at("haar"))?;
        let xi0 = &lam * qg.alg.unit();
        let weight = Functional::new(lam.transpose() * xi0.conjugate());
        let out = Analysis::with_lambda(qg, weight, lam, tol)?;
        let drift = out.gns.pi.iter().zip(basis).map(|(p, b)| numlin::dist(p, b)).fold(0.0, f64::max);
        if drift > tol.effective(h) * basis.iter().map(|b| b.norm()).fold(1.0, f64::max) {
            return Err(Error::ValidationFailed(format!("GNS representation moves the basis by {drift:.3e}")).at("gns"));
        }
        Ok(out)
    }

    fn assemble(qg: FiniteQuantumGroup, solver_phi: Functional, gns: GnsData, tol: Tolerance) -> Result<Self> {
        let (_, phi_fit) = antipode::proportionality(&qg.phi, &solver_phi);
        if phi_fit > tol.effective(qg.dim()) {
            return Err(Error::inconsistent("weight against the left Haar functional", phi_fit).at("gns"));
        }
        let modular = ModularData::build(&qg.alg, &gns, tol).map_err(|e| e.at("modular"))?;
        let w = gns::build_w(&qg, &gns, tol).map_err(|e| e.at("W"))?;
        let polar = gns::build_g(&qg, &gns, &qg.psi, tol).map_err(|e| e.at("G"))?;
        let ap = AntipodeData::build(&gns, &polar).map_err(|e| e.at("antipode"))?;
        let (nu, nu_check) = antipode::compute_nu(&qg.phi, &gns, &ap, tol).map_err(|e| e.at("scaling constant"))?;
        let psi = Functional::new(ap.r_mat.transpose() * &qg.phi.coeffs);
        let (ratio, psi_ratio_residual) = antipode::proportionality(&psi, &qg.psi);
        if psi_ratio_residual > tol.effective(qg.dim()) || ratio.re <= 0.0 || ratio.im.abs() > tol.effective(qg.dim()) {
            return Err(
                Error::inconsistent("φR against the right Haar functional", psi_ratio_residual).at("right weight")
            );
        }
        let delta = antipode::compute_delta(&gns, &qg.phi, &psi, tol).map_err(|e| e.at("modular element"))?;
        let right =
            antipode::right_weight_gns(&qg, &gns, &delta, &modular.j, nu, tol).map_err(|e| e.at("right GNS"))?;
        let (p, p_defect) = gns::build_p(&gns, &polar.n, nu, tol).map_err(|e| e.at("P"))?;
        let v = gns::build_v(&qg, &right.gamma, tol).map_err(|e| e.at("V"))?;
        Ok(Analysis {
            qg,
            solver_phi,
            gns,
            modular,
            w,
            polar,
            antipode: ap,
            nu,
            nu_check,
            psi,
            psi_ratio_residual,
            delta,
            right,
            p,
            p_defect,
            v,
            tol,
        })
    }

    pub fn name(&self) -> &str {
        &self.qg.name
    }

    pub fn dim(&self) -> usize {
        self.gns.hdim()
    }

    pub fn phi(&self) -> &Functional {
        &self.qg.phi
    }

    pub fn pi(&self) -> &[CMatrix] {
        &self.gns.pi
    }

    /// `Δ(x) = W^*(1 ⊗ x)W`.
    pub fn comul_op(&self, x: &CMatrix) -> CMatrix {
        let n = self.dim();
        self.w.adjoint() * kron(&numlin::identity(n), x) * &self.w
    }

    /// `Δ(e_k)` through the structure constants, as an operator on `H ⊗ H`.
    pub fn comul_basis(&self, k: usize) -> CMatrix {
        self.gns.pi_tensor(&self.qg.comul.column(k).into_owned())
    }

    pub fn nabla_prime(&self) -> &PositiveOperator {
        &self.right.modular.nabla
    }

    pub fn p_operator(&self) -> Result<PositiveOperator> {
        PositiveOperator::new(&self.p, self.tol)
    }

    pub fn gamma(&self) -> &CMatrix {
        &self.right.gamma
    }

    fn t(&self, n: usize) -> f64 {
        self.tol.effective(n)
    }

    /// Identities for `W`, `T`, `G`, `P` and `V`.
    pub fn w_structure_suite(&self) -> VerificationReport {
        let n = self.dim();
        let nn = n * n;
        let id = numlin::identity(n);
        let mut rep = VerificationReport::new();
        let w = &self.w;
        let lam = &self.gns.lam;
        let alg = &self.qg.alg;

        rep.check("w.unitary", "W is unitary", numlin::unitary_defect(w), self.t(nn));
        rep.check("w.pentagon", "W12 W13 W23 = W23 W12", numlin::pentagon_residual(w, n), self.t(nn * n));

        let mut x = CMatrix::zeros(nn, nn);
        for a in 0..n {
            let ra = kron(&alg.right_mult(&alg.basis_element(a)), &id);
            for b in 0..n {
                x.set_column(a * n + b, &(&ra * self.qg.comul.column(b)));
            }
        }
        let ll = kron(lam, lam);
        let image = &ll * &x;
        let defining = (w.adjoint() * &ll - &image).norm();
        rep.check("w.defining", "W*(Λ(x) ⊗ Λ(y)) = (Λ ⊗ Λ)(Δ(y)(x ⊗ 1))", defining, self.t(nn));
        let gram = kron(&self.gns.gram, &self.gns.gram);
        let iso = (image.adjoint() * &image - &gram).norm();
        rep.check(
            "w.isometry",
            "<(Λ⊗Λ)(Δ(y1)(x1⊗1)), (Λ⊗Λ)(Δ(y2)(x2⊗1))> = <Λx1⊗Λy1, Λx2⊗Λy2>",
            iso,
            self.t(nn) * gram.norm().max(1.0),
        );

        let mut left = 0.0f64;
        let mut right = 0.0f64;
        for k in 0..n {
            let d = self.comul_basis(k);
            let p = &self.gns.pi[k];
            left = left.max((&d - self.comul_op(p)).norm());
            right = right.max((&d - &self.v * kron(p, &id) * self.v.adjoint()).norm());
        }
        rep.check("w.comultiplication", "Δ(x) = W*(1 ⊗ x)W", left, self.t(nn));
        rep.check("v.comultiplication", "Δ(x) = V(x ⊗ 1)V*", right, self.t(nn));

        let k = kron(self.polar.i.mat(), self.modular.j.mat());
        let jw = (&k * w.conjugate() - w.adjoint() * &k).norm();
        rep.check("w.ij", "(I ⊗ J)W = W*(I ⊗ J)", jw, self.t(nn));
        let nd = kron(&self.polar.n.real_power(-1.0), &self.modular.nabla_matrix());
        rep.check("w.n_nabla", "(N^-1 ⊗ ∇)W = W(N^-1 ⊗ ∇)", numlin::commutator(&nd, w).norm(), self.t(nn) * nd.norm());

        let mut span1 = CMatrix::zeros(n, nn);
        for xk in 0..n {
            let dx = self.qg.comul.column(xk).into_owned();
            for om in 0..n {
                let s = crate::builders::slice_left(&dx, &Functional::basis(n, om), n);
                span1.set_column(xk * n + om, &(lam * s));
            }
        }
        let r1 = numlin::rank(&span1, self.tol);
        rep.check_noted("w.span_slices", "span Λ((ω ⊗ ι)Δ(x)) = H", (n - r1) as f64, 0.0, format!("rank {r1} of {n}"));
        let r2 = self.polar.span_rank;
        rep.check_noted(
            "g.span",
            "span Λ((ψ ⊗ ι)(Δ(x*)(y ⊗ 1))) = H",
            (n - r2.min(n)) as f64,
            0.0,
            format!("rank {r2} of {n}"),
        );

        rep.merge(self.modular_suite());
        rep.merge(self.polar_suite());
        rep.merge(self.v_suite());
        rep
    }

    fn modular_suite(&self) -> VerificationReport {
        let n = self.dim();
        let mut rep = VerificationReport::new();
        let m = &self.modular;
        let t_rel = (m.t.mat() * self.gns.lam.conjugate() - &self.gns.lam * self.qg.alg.star_coords()).norm();
        rep.check("modular.t", "T Λ(x) = Λ(x*)", t_rel, self.t(n) * self.gns.lam.norm());
        let polar = m.t.dist(&m.j.after(&m.nabla.real_power(0.5)));
        rep.check("modular.polar", "T = J ∇^1/2", polar, self.t(n));
        rep.check("modular.j_square", "J² = 1", numlin::dist(&m.j.square(), &numlin::identity(n)), self.t(n));
        let jnj = numlin::dist(&m.j.conjugate_by(&m.nabla_matrix()), &m.nabla.real_power(-1.0));
        rep.check("modular.j_nabla", "J ∇ J = ∇^-1", jnj, self.t(n) * m.nabla_matrix().norm());
        let u = m.nabla.imag_power(1.0);
        let sigma = self.pi().iter().map(|p| self.gns.distance_to_algebra(&(&u * p * u.adjoint()))).fold(0.0, f64::max);
        rep.check("modular.sigma", "∇^it π(M) ∇^-it = π(M)", sigma, self.t(n));
        let jpj: Vec<CMatrix> = self.pi().iter().map(|p| m.j.conjugate_by(p)).collect();
        match numlin::commutant(self.pi(), n, self.tol) {
            Ok(comm) => {
                let eq = numlin::subspace_equal(&jpj, &comm, self.tol);
                rep.check("modular.commutant", "J π(M) J = π(M)'", if eq { 0.0 } else { 1.0 }, 0.0);
            }
            Err(e) => rep.skip("modular.commutant", "J π(M) J = π(M)'", e.to_string()),
        }
        rep
    }

    fn polar_suite(&self) -> VerificationReport {
        let n = self.dim();
        let mut rep = VerificationReport::new();
        let pg = &self.polar;
        let one = numlin::identity(n);
        rep.check("g.consistency", "G u_{x,y} = u_{y,x}", pg.consistency, self.t(n));
        rep.check("g.involutive", "G² = 1", numlin::dist(&pg.g.square(), &one), self.t(n));
        rep.check("g.polar", "G = I N^1/2", pg.g.dist(&pg.i.after(&pg.n.real_power(0.5))), self.t(n));
        rep.check("i.self_adjoint", "I* = I", pg.i.dist(&pg.i.sharp()), self.t(n));
        rep.check("i.involutive", "I² = 1", numlin::dist(&pg.i.square(), &one), self.t(n));
        let ini = numlin::dist(&pg.i.conjugate_by(&pg.n.matrix()), &pg.n.real_power(-1.0));
        rep.check("i.n", "I N I = N^-1", ini, self.t(n) * pg.n.matrix().norm());
        rep.check("p.generator", "x ↦ Λ(x log N − log N x) Λ^-1 is Hermitian", self.p_defect, self.t(n));
        match self.p_operator() {
            Ok(p) => {
                for t in [0.5, 0.7, 1.0, 2.0] {
                    let res = match self.antipode.tau_mat(&self.gns, t) {
                        Ok(tau) => {
                            let lhs = p.imag_power(t) * &self.gns.lam;
                            let rhs = &self.gns.lam * tau * c64(self.nu.powf(t / 2.0), 0.0);
                            (lhs - rhs).norm()
                        }
                        Err(_) => f64::INFINITY,
                    };
                    rep.check(
                        format!("p.relation[t={t}]"),
                        "P^it Λ(x) = ν^{t/2} Λ(τ_t(x))",
                        res,
                        self.t(n) * self.gns.lam.norm(),
                    );
                }
            }
            Err(e) => rep.skip("p.relation", "P^it Λ(x) = ν^{t/2} Λ(τ_t(x))", e.to_string()),
        }
        rep
    }

    fn v_suite(&self) -> VerificationReport {
        let n = self.dim();
        let nn = n * n;
        let mut rep = VerificationReport::new();
        let v = &self.v;
        rep.check("v.unitary", "V is unitary", numlin::unitary_defect(v), self.t(nn));
        rep.check("v.pentagon", "V12 V13 V23 = V23 V12", numlin::pentagon_residual(v, n), self.t(nn * n));
        let d = kron(&self.nabla_prime().matrix(), &self.polar.n.matrix());
        rep.check("v.nabla_n", "V(∇' ⊗ N) = (∇' ⊗ N)V", numlin::commutator(v, &d).norm(), self.t(nn) * d.norm());
        let alg = &self.qg.alg;
        let gamma = self.gamma();
        let v_star = v.adjoint();
        let id = numlin::identity(n);
        let mut worst = 0.0f64;
        for a in 0..n {
            let ra = kron(&alg.right_mult(&alg.basis_element(a)), &id);
            for b in 0..n {
                let ga = gamma.column(a).into_owned();
                let gb = gamma.column(b).into_owned();
                let rho = &ga * gb.adjoint();
                let lhs = numlin::slice_first(&v_star, &rho, n, n);
                let z = &ra * (&self.qg.comul * alg.involute(&alg.basis_element(b)));
                let rhs = self.gns.pi_of(&crate::builders::slice_left(&z, &self.psi, n));
                worst = worst.max((lhs - rhs).norm());
            }
        }
        rep.check("v.slice", "(ω_{Γ(a),Γ(b)} ⊗ ι)(V*) = (ψ ⊗ ι)(Δ(b*)(a ⊗ 1))", worst, self.t(nn));
        rep
    }
}

/// `‖a − c b‖` minimised over `c`, relative to `‖a‖`.
pub fn scalar_fit(a: &CMatrix, b: &CMatrix) -> (Complex64, f64) {
    let c = numlin::trace_inner(a, b) / numlin::trace_inner(b, b);
    (c, (a - b * c).norm() / a.norm().max(1e-300))
}
