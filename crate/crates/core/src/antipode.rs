//! Scaling group, unitary antipode, antipode, scaling constant, modular
//! element, and the GNS data of the right Haar weight.

use num_complex::Complex64;

use crate::analysis::Analysis;
use crate::builders::{slice_left, slice_right, FiniteQuantumGroup};
use crate::error::{Error, Result};
use crate::gns::{GnsData, ModularData, PolarG};
use crate::numlin::{self, c64, kron, AntilinearOp, CMatrix, CVector, PositiveOperator, Tolerance};
use crate::report::VerificationReport;
use crate::star_algebra::{density_wrt_trace, AlgebraElement, Functional};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AntipodeMap {
    S,
    SInverse,
    R,
    Tau(f64),
}

/// `τ_t(x) = N^{-it} x N^{it}`, `R(x) = I x^* I`, `S = R τ_{-i/2}`, together
/// with their matrices in algebra coordinates.
#[derive(Clone, Debug)]
pub struct AntipodeData {
    pub n: PositiveOperator,
    pub i: AntilinearOp,
    n_half: CMatrix,
    n_mhalf: CMatrix,
    /// Column `k` holds the coordinates of `S(e_k)`.
    pub s_mat: CMatrix,
    pub s_inv_mat: CMatrix,
    pub r_mat: CMatrix,
}

impl AntipodeData {
    pub fn build(gns: &GnsData, polar: &PolarG) -> Result<Self> {
        let mut data = AntipodeData {
            n: polar.n.clone(),
            i: polar.i.clone(),
            n_half: polar.n.real_power(0.5),
            n_mhalf: polar.n.real_power(-0.5),
            s_mat: CMatrix::zeros(0, 0),
            s_inv_mat: CMatrix::zeros(0, 0),
            r_mat: CMatrix::zeros(0, 0),
        };
        let h = gns.hdim();
        let mut s_mat = CMatrix::zeros(h, h);
        let mut s_inv_mat = CMatrix::zeros(h, h);
        let mut r_mat = CMatrix::zeros(h, h);
        for (k, p) in gns.pi.iter().enumerate() {
            s_mat.set_column(k, &gns.pull_back(&data.s_op(p))?);
            s_inv_mat.set_column(k, &gns.pull_back(&data.s_inv_op(p))?);
            r_mat.set_column(k, &gns.pull_back(&data.r_op(p))?);
        }
        data.s_mat = s_mat;
        data.s_inv_mat = s_inv_mat;
        data.r_mat = r_mat;
        Ok(data)
    }

    pub fn tau_op(&self, t: f64, x: &CMatrix) -> CMatrix {
        self.n.imag_power(-t) * x * self.n.imag_power(t)
    }

    pub fn r_op(&self, x: &CMatrix) -> CMatrix {
        self.i.conjugate_by(&x.adjoint())
    }

    pub fn s_op(&self, x: &CMatrix) -> CMatrix {
        self.r_op(&(&self.n_mhalf * x * &self.n_half))
    }

    pub fn s_inv_op(&self, x: &CMatrix) -> CMatrix {
        self.r_op(&(&self.n_half * x * &self.n_mhalf))
    }

    pub fn op(&self, which: AntipodeMap, x: &CMatrix) -> CMatrix {
        match which {
            AntipodeMap::S => self.s_op(x),
            AntipodeMap::SInverse => self.s_inv_op(x),
            AntipodeMap::R => self.r_op(x),
            AntipodeMap::Tau(t) => self.tau_op(t, x),
        }
    }

    /// Image of an algebra element, pulled back to algebra coordinates.
    pub fn apply(&self, gns: &GnsData, x: &AlgebraElement, which: AntipodeMap) -> Result<AlgebraElement> {
        gns.pull_back(&self.op(which, &gns.pi_of(x)))
    }

    /// Matrix of `τ_t` in algebra coordinates.
    pub fn tau_mat(&self, gns: &GnsData, t: f64) -> Result<CMatrix> {
        let h = gns.hdim();
        let mut m = CMatrix::zeros(h, h);
        for (k, p) in gns.pi.iter().enumerate() {
            m.set_column(k, &gns.pull_back(&self.tau_op(t, p))?);
        }
        Ok(m)
    }
}

/// Fits `φ ∘ τ_1 = ν^{-1} φ`; returns `ν` and the residual of the same
/// relation at `t = 2`.
pub fn compute_nu(phi: &Functional, gns: &GnsData, antipode: &AntipodeData, tol: Tolerance) -> Result<(f64, f64)> {
    let f1 = antipode.tau_mat(gns, 1.0)?.transpose() * &phi.coeffs;
    let denom = phi.coeffs.norm_squared();
    let c: Complex64 = phi.coeffs.dotc(&f1) / denom;
    let scale = phi.coeffs.norm().max(1e-300);
    let fit = (&f1 - &phi.coeffs * c).norm() / scale;
    if fit > tol.effective(phi.dim()) || c.im.abs() > tol.effective(phi.dim()) || c.re <= 0.0 {
        return Err(Error::inconsistent("scaling constant", fit.max(c.im.abs())));
    }
    let nu = 1.0 / c.re;
    let f2 = antipode.tau_mat(gns, 2.0)?.transpose() * &phi.coeffs;
    let check = (&f2 - &phi.coeffs * c64(nu.powi(-2), 0.0)).norm() / scale;
    Ok((nu, check))
}

/// `δ = D_φ^{-1} D_ψ` with densities relative to the trace on `H`.
#[derive(Clone, Debug)]
pub struct ModularElement {
    /// `π(δ)`.
    pub mat: CMatrix,
    pub pos: PositiveOperator,
    pub coords: AlgebraElement,
    pub sqrt_coords: AlgebraElement,
    pub d_phi: CMatrix,
    pub d_psi: CMatrix,
    /// `‖[D_φ, δ]‖`.
    pub commutator: f64,
    /// `max_x |ψ(x) − φ(δ^{1/2} x δ^{1/2})|` over the basis.
    pub weight_residual: f64,
}

pub fn functional_on_pi(gns: &GnsData, f: &Functional) -> Vec<Complex64> {
    (0..gns.hdim()).map(|k| f.coeffs[k]).collect()
}

pub fn compute_delta(gns: &GnsData, phi: &Functional, psi: &Functional, tol: Tolerance) -> Result<ModularElement> {
    let h = gns.hdim();
    let d_phi = density_wrt_trace(&gns.pi, &functional_on_pi(gns, phi), tol)?;
    let d_psi = density_wrt_trace(&gns.pi, &functional_on_pi(gns, psi), tol)?;
    let inv = d_phi.clone().try_inverse().ok_or(Error::ValidationFailed("D_φ is singular".into()))?;
    let mat = inv * &d_psi;
    let coords = gns.pull_back(&mat).map_err(|e| Error::ValidationFailed(format!("δ ∈ π(M): {e}")))?;
    let pos =
        PositiveOperator::new(&mat, tol).map_err(|e| Error::ValidationFailed(format!("δ positive invertible: {e}")))?;
    let commutator = numlin::commutator(&d_phi, &mat).norm();
    if commutator > tol.effective(h) * mat.norm().max(1.0) {
        return Err(Error::ValidationFailed(format!("[D_φ, δ] = 0 (residual {commutator:.3e})")));
    }
    let root = pos.real_power(0.5);
    let sqrt_coords = gns.pull_back(&root).map_err(|e| Error::ValidationFailed(format!("δ^1/2 ∈ π(M): {e}")))?;
    let mut weight_residual: f64 = 0.0;
    for (k, p) in gns.pi.iter().enumerate() {
        let lhs = psi.coeffs[k];
        let rhs = (&d_phi * &root * p * &root).trace();
        weight_residual = weight_residual.max((lhs - rhs).norm());
    }
    if weight_residual > tol.effective(h) * psi.coeffs.norm().max(1.0) {
        return Err(Error::ValidationFailed(format!("ψ(x) = φ(δ^1/2 x δ^1/2) (residual {weight_residual:.3e})")));
    }
    Ok(ModularElement { mat, pos, coords, sqrt_coords, d_phi, d_psi, commutator, weight_residual })
}

/// `Γ(x) = Λ(x δ^{1/2})` and the modular data `∇'`, `J'` of `ψ` on it.
#[derive(Clone, Debug)]
pub struct RightWeight {
    pub gamma: CMatrix,
    pub modular: ModularData,
    /// `‖J' − ν^{i/4} J‖`.
    pub phase_residual: f64,
}

pub fn right_weight_gns(
    qg: &FiniteQuantumGroup,
    gns: &GnsData,
    delta: &ModularElement,
    j: &AntilinearOp,
    nu: f64,
    tol: Tolerance,
) -> Result<RightWeight> {
    let gamma = &gns.lam * qg.alg.right_mult(&delta.sqrt_coords);
    let modular = ModularData::for_map(&qg.alg, &gamma, tol)?;
    let expected = j.scaled(nu_phase(nu));
    let phase_residual = modular.j.dist(&expected);
    if phase_residual > tol.effective(gns.hdim()) {
        return Err(Error::PhaseMismatch { residual: phase_residual });
    }
    Ok(RightWeight { gamma, modular, phase_residual })
}

/// `ν^{i/4}`.
pub fn nu_phase(nu: f64) -> Complex64 {
    c64(0.0, nu.ln() / 4.0).exp()
}

/// Coefficient `c` in `a = c b` by least squares, with the relative residual.
pub fn proportionality(a: &Functional, b: &Functional) -> (Complex64, f64) {
    let c = b.coeffs.dotc(&a.coeffs) / b.coeffs.norm_squared();
    let r = (&a.coeffs - &b.coeffs * c).norm() / a.coeffs.norm().max(1e-300);
    (c, r)
}

/// `S((ι⊗φ)(Δ(a*)(1⊗b))) = (ι⊗φ)((1⊗a*)Δ(b))` and its right-handed
/// counterpart through `ψ`, over all basis pairs.
pub fn strong_invariance_check(a: &Analysis) -> VerificationReport {
    let alg = &a.qg.alg;
    let n = alg.dim();
    let id = numlin::identity(n);
    let d = &a.qg.comul;
    let mut left = 0.0f64;
    let mut right = 0.0f64;
    for i in 0..n {
        let ai = alg.basis_element(i);
        let a_star = alg.involute(&ai);
        let d_astar = d * &a_star;
        let la_star = alg.left_mult(&a_star);
        for j in 0..n {
            let b = alg.basis_element(j);
            let db = d * &b;
            let z = kron(&id, &alg.right_mult(&b)) * &d_astar;
            let lhs = &a.antipode.s_mat * slice_right(&z, a.phi(), n);
            let rhs = slice_right(&(kron(&id, &la_star) * &db), a.phi(), n);
            left = left.max((lhs - rhs).norm());

            let z = kron(&la_star, &id) * &db;
            let lhs = &a.antipode.s_mat * slice_left(&z, &a.psi, n);
            let rhs = slice_left(&(kron(&alg.right_mult(&b), &id) * &d_astar), &a.psi, n);
            right = right.max((lhs - rhs).norm());
        }
    }
    let mut rep = VerificationReport::new();
    let t = a.tol.effective(n * n);
    rep.check("strong.left", "S((ι⊗φ)(Δ(a*)(1⊗b))) = (ι⊗φ)((1⊗a*)Δ(b))", left, t);
    rep.check("strong.right", "S((ψ⊗ι)((a*⊗1)Δ(b))) = (ψ⊗ι)(Δ(a*)(b⊗1))", right, t);
    rep
}

fn max_over<F: Fn(&CMatrix) -> f64>(pi: &[CMatrix], f: F) -> f64 {
    pi.iter().map(f).fold(0.0, f64::max)
}

fn ad(u: &CMatrix, x: &CMatrix) -> CMatrix {
    u * x * u.adjoint()
}

/// Values of a functional along the images of the basis under `map`.
fn pulled(a: &Analysis, f: &Functional, map: impl Fn(&CMatrix) -> CMatrix) -> Result<CVector> {
    let mut out = CVector::zeros(a.dim());
    for (k, p) in a.pi().iter().enumerate() {
        out[k] = f.eval(&a.gns.pull_back(&map(p))?);
    }
    Ok(out)
}

/// Identities of `δ`, `ν`, `Γ`, the antipode maps and the scaling group.
pub fn delta_identity_suite(a: &Analysis) -> VerificationReport {
    let n = a.dim();
    let nn = n * n;
    let tol = |m: usize| a.tol.effective(m);
    let mut rep = VerificationReport::new();
    let ap = &a.antipode;
    let d = &a.delta;
    let dm = &d.mat;
    let dscale = dm.norm().max(1.0);
    let one = numlin::identity(n);
    let nu = a.nu;

    rep.check("nu.consistency", "φ τ_t = ν^-t φ at t = 2", a.nu_check, tol(n));
    rep.check("psi.phi_r", "φR is proportional to ψ", a.psi_ratio_residual, tol(n));
    rep.check("delta.weight", "ψ(x) = φ(δ^1/2 x δ^1/2)", d.weight_residual, tol(n) * a.psi.coeffs.norm().max(1.0));
    rep.check("delta.density_commute", "[D_φ, δ] = 0", d.commutator, tol(n) * dscale);
    let dd = (a.comul_op(dm) - kron(dm, dm)).norm();
    rep.check("delta.comultiplication", "Δ(δ) = δ ⊗ δ", dd, tol(nn) * dscale * dscale);
    rep.check("delta.r", "R(δ) = δ^-1", numlin::dist(&ap.r_op(dm), &d.pos.real_power(-1.0)), tol(n) * dscale);
    for t in [0.5, 1.0] {
        rep.check(format!("delta.tau[t={t}]"), "τ_t(δ) = δ", numlin::dist(&ap.tau_op(t, dm), dm), tol(n) * dscale);
        let s = ad(&a.modular.nabla.imag_power(t), dm);
        rep.check(
            format!("delta.sigma[t={t}]"),
            "σ_t(δ) = ν^t δ",
            numlin::dist(&s, &(dm * c64(nu.powf(t), 0.0))),
            tol(n) * dscale,
        );
    }

    let gram_psi = a.qg.alg.gram(&a.psi);
    let gg = (a.gamma().adjoint() * a.gamma() - &gram_psi).norm();
    rep.check("gamma.gns", "<Γ(x), Γ(y)> = ψ(y*x)", gg, tol(n) * gram_psi.norm().max(1.0));
    rep.check("gamma.phase", "J' = ν^{i/4} J", a.right.phase_residual, tol(n));

    let nabla = &a.modular.nabla;
    let nabla_p = a.nabla_prime();
    let phi = a.phi();
    for t in [0.5, 1.0] {
        let u_s = nabla.imag_power(t);
        let u_sp = nabla_p.imag_power(t);
        let u_tau = ap.n.imag_power(-t);
        let checks: [(&str, &str, &CMatrix, &Functional, f64); 3] = [
            ("weights.phi_sigma_prime", "φ σ'_t = ν^t φ", &u_sp, phi, nu.powf(t)),
            ("weights.psi_sigma", "ψ σ_t = ν^-t ψ", &u_s, &a.psi, nu.powf(-t)),
            ("weights.psi_tau", "ψ τ_t = ν^-t ψ", &u_tau, &a.psi, nu.powf(-t)),
        ];
        for (id, anchor, u, f, scale) in checks {
            let res = match pulled(a, f, |p| ad(u, p)) {
                Ok(v) => (v - &f.coeffs * c64(scale, 0.0)).norm(),
                Err(_) => f64::INFINITY,
            };
            rep.check(format!("{id}[t={t}]"), anchor, res, tol(n) * f.coeffs.norm().max(1.0));
        }
        let res = match pulled_coords(a, |p| ad(&u_sp, p)) {
            Ok(m) => (nabla_p.imag_power(t) * &a.gns.lam - &a.gns.lam * m * c64(nu.powf(-t / 2.0), 0.0)).norm(),
            Err(_) => f64::INFINITY,
        };
        rep.check(
            format!("nabla_prime.lambda[t={t}]"),
            "∇'^it Λ(x) = ν^{-t/2} Λ(σ'_t(x))",
            res,
            tol(n) * a.gns.lam.norm(),
        );
    }

    rep.check("antipode.r_square", "R² = ι", numlin::dist(&(&ap.r_mat * &ap.r_mat), &one), tol(n));
    let mut preserve = 0.0f64;
    let mut commute = 0.0f64;
    for t in [0.5, 1.0] {
        match ap.tau_mat(&a.gns, t) {
            Ok(tau) => commute = commute.max(numlin::commutator(&tau, &ap.r_mat).norm()),
            Err(_) => commute = f64::INFINITY,
        }
        preserve = preserve.max(max_over(a.pi(), |p| a.gns.distance_to_algebra(&ap.tau_op(t, p))));
    }
    preserve = preserve.max(max_over(a.pi(), |p| a.gns.distance_to_algebra(&ap.r_op(p))));
    rep.check("antipode.preserve", "τ_t and R map π(M) into π(M)", preserve, tol(n));
    rep.check("antipode.r_tau_commute", "R and τ commute", commute, tol(n));
    let nm = ap.n.real_power(-0.5);
    let np = ap.n.real_power(0.5);
    let tau_half = |x: &CMatrix| &nm * x * &np;
    let s1 = max_over(a.pi(), |p| numlin::dist(&ap.s_op(p), &ap.r_op(&tau_half(p))));
    let s2 = max_over(a.pi(), |p| numlin::dist(&ap.s_op(p), &tau_half(&ap.r_op(p))));
    rep.check("antipode.s_polar", "S = R τ_{-i/2} = τ_{-i/2} R", s1.max(s2), tol(n));
    let sss = max_over(a.pi(), |p| numlin::dist(&ap.s_op(&ap.s_op(&p.adjoint()).adjoint()), p));
    rep.check("antipode.s_star", "S(S(x*)*) = x", sss, tol(n));
    let flip = numlin::flip(n, n);
    let chi = (&flip * kron(&ap.r_mat, &ap.r_mat) * &a.qg.comul - &a.qg.comul * &ap.r_mat).norm();
    rep.check("antipode.chi_rr", "χ(R ⊗ R)Δ = ΔR", chi, tol(nn));
    let s_inv = (&ap.s_mat * &ap.s_inv_mat - &one).norm();
    rep.check("antipode.s_inverse", "S S^-1 = ι", s_inv, tol(n));

    for t in [0.5, 1.0] {
        let sig = nabla.imag_power(t);
        let sigp = nabla_p.imag_power(t);
        let sigp_m = nabla_p.imag_power(-t);
        let tau = ap.n.imag_power(-t);
        let tau_m = ap.n.imag_power(t);
        let rels: [(&str, &str, &CMatrix, &CMatrix, &CMatrix); 4] = [
            ("eq4.sigma", "Δσ_t = (τ_t ⊗ σ_t)Δ", &sig, &tau, &sig),
            ("eq4.tau", "Δτ_t = (τ_t ⊗ τ_t)Δ", &tau, &tau, &tau),
            ("eq4.sigma_prime", "Δσ'_t = (σ'_t ⊗ τ_-t)Δ", &sigp, &sigp, &tau_m),
            ("eq4.tau_mixed", "Δτ_t = (σ_t ⊗ σ'_-t)Δ", &tau, &sig, &sigp_m),
        ];
        for (id, anchor, inner, l1, l2) in rels {
            let outer = kron(l1, l2);
            let res = max_over(a.pi(), |p| numlin::dist(&a.comul_op(&ad(inner, p)), &ad(&outer, &a.comul_op(p))));
            rep.check(format!("{id}[t={t}]"), anchor, res, tol(nn));
        }
    }
    rep
}

/// Algebra coordinates of `map` applied to the basis, one column each.
fn pulled_coords(a: &Analysis, map: impl Fn(&CMatrix) -> CMatrix) -> Result<CMatrix> {
    let n = a.dim();
    let mut m = CMatrix::zeros(n, n);
    for (k, p) in a.pi().iter().enumerate() {
        m.set_column(k, &a.gns.pull_back(&map(p))?);
    }
    Ok(m)
}
