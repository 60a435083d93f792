//! GNS representation of a Haar weight, Tomita data, the multiplicative
//! unitaries `W` and `V`, the antilinear operator `G` with its polar data,
//! and the operator `P`.

use crate::builders::FiniteQuantumGroup;
use crate::error::{Error, Result};
use crate::numlin::{self, c64, kron, AntilinearOp, CMatrix, CVector, MatFn, PositiveOperator, SpanCoords, Tolerance};
use crate::star_algebra::{AlgebraElement, Functional, StarAlgebra};

/// `H = C^n` with `Λ(x) = L x` orthonormalising the weight, and the left
/// regular representation `π(x) = L · left_mult(x) · L^{-1}`.
#[derive(Clone, Debug)]
pub struct GnsData {
    pub lam: CMatrix,
    pub lam_inv: CMatrix,
    pub gram: CMatrix,
    pub pi: Vec<CMatrix>,
    pub coords: SpanCoords,
    /// `Λ(1)`.
    pub xi0: CVector,
    tol: Tolerance,
}

impl GnsData {
    /// `L = chol(Gram)^†`.
    pub fn build(alg: &StarAlgebra, phi: &Functional, tol: Tolerance) -> Result<Self> {
        let gram = alg.gram(phi);
        let herm = (&gram + gram.adjoint()) * c64(0.5, 0.0);
        if numlin::hermitian_defect(&gram) > tol.effective(alg.dim()) * gram.norm().max(1.0) {
            return Err(Error::GramNotPd);
        }
        PositiveOperator::new(&herm, tol).map_err(|_| Error::GramNotPd)?;
        let chol = herm.cholesky().ok_or(Error::GramNotPd)?;
        GnsData::from_lambda(alg, phi, chol.l().adjoint(), tol)
    }

    /// Uses a prescribed `Λ`, checking `<Λx, Λy> = φ(y^* x)` on the basis.
    pub fn from_lambda(alg: &StarAlgebra, phi: &Functional, lam: CMatrix, tol: Tolerance) -> Result<Self> {
        let n = alg.dim();
        if lam.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: lam.nrows() });
        }
        let gram = alg.gram(phi);
        let defect = (lam.adjoint() * &lam - &gram).norm();
        if defect > tol.effective(n) * gram.norm().max(1.0) {
            return Err(Error::inconsistent("GNS map against the weight", defect));
        }
        let lam_inv = lam.clone().try_inverse().ok_or(Error::GramNotPd)?;
        let pi: Vec<CMatrix> = (0..n).map(|k| &lam * alg.left_mult(&alg.basis_element(k)) * &lam_inv).collect();
        let coords = SpanCoords::new(&pi, tol)?;
        let xi0 = &lam * alg.unit();
        Ok(GnsData { lam, lam_inv, gram, pi, coords, xi0, tol })
    }

    pub fn hdim(&self) -> usize {
        self.lam.nrows()
    }

    pub fn lambda(&self, x: &AlgebraElement) -> CVector {
        &self.lam * x
    }

    pub fn pi_of(&self, x: &AlgebraElement) -> CMatrix {
        let n = self.hdim();
        let mut out = CMatrix::zeros(n, n);
        for (k, p) in self.pi.iter().enumerate() {
            if x[k] != numlin::ZERO {
                out += p * x[k];
            }
        }
        out
    }

    /// Algebra coordinates of an operator in `π(M)`.
    pub fn pull_back(&self, m: &CMatrix) -> Result<AlgebraElement> {
        let (c, r) = self.coords.coords(m);
        if r > self.tol.effective(self.hdim()) * m.norm().max(1.0) {
            return Err(Error::NotInAlgebra { residual: r });
        }
        Ok(c)
    }

    /// Distance from `m` to `π(M)`.
    pub fn distance_to_algebra(&self, m: &CMatrix) -> f64 {
        self.coords.coords(m).1
    }

    /// `Σ_ij D_ij π_i ⊗ π_j` for a tensor coordinate vector.
    pub fn pi_tensor(&self, z: &CVector) -> CMatrix {
        let n = self.hdim();
        let mut out = CMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let c = z[i * n + j];
                if c.norm() > 0.0 {
                    out += kron(&self.pi[i], &self.pi[j]) * c;
                }
            }
        }
        out
    }
}

/// `T Λ(x) = Λ(x^*)` with polar decomposition `T = J ∇^{1/2}`.
#[derive(Clone, Debug)]
pub struct ModularData {
    pub t: AntilinearOp,
    pub nabla: PositiveOperator,
    pub j: AntilinearOp,
}

impl ModularData {
    /// Modular data of the weight realised by the map with matrix `gmap`.
    pub fn for_map(alg: &StarAlgebra, gmap: &CMatrix, tol: Tolerance) -> Result<Self> {
        let inv = gmap.clone().try_inverse().ok_or(Error::Singular { smallest: 0.0 })?;
        let t = AntilinearOp::new(gmap * alg.star_coords() * inv.conjugate())?;
        let (n, j) = numlin::antilinear_polar(&t, tol)?;
        Ok(ModularData { t, nabla: PositiveOperator::new(&n, tol)?, j })
    }

    pub fn build(alg: &StarAlgebra, gns: &GnsData, tol: Tolerance) -> Result<Self> {
        ModularData::for_map(alg, &gns.lam, tol)
    }

    pub fn nabla_matrix(&self) -> CMatrix {
        self.nabla.matrix()
    }
}

/// `W^*(Λ(x) ⊗ Λ(y)) = (Λ ⊗ Λ)(Δ(y)(x ⊗ 1))`.
pub fn build_w(qg: &FiniteQuantumGroup, gns: &GnsData, tol: Tolerance) -> Result<CMatrix> {
    let n = qg.dim();
    let mut x = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        let ra = kron(&qg.alg.right_mult(&qg.alg.basis_element(a)), &numlin::identity(n));
        for b in 0..n {
            x.set_column(a * n + b, &(&ra * qg.comul.column(b)));
        }
    }
    let w_star = kron(&gns.lam, &gns.lam) * x * kron(&gns.lam_inv, &gns.lam_inv);
    let w = w_star.adjoint();
    let defect = numlin::unitary_defect(&w);
    if defect > tol.effective(n * n) {
        return Err(Error::NotUnitary { residual: defect });
    }
    Ok(w)
}

/// `V(Γ(x) ⊗ Γ(y)) = (Γ ⊗ Γ)(Δ(x)(1 ⊗ y))`.
pub fn build_v(qg: &FiniteQuantumGroup, gamma: &CMatrix, tol: Tolerance) -> Result<CMatrix> {
    let n = qg.dim();
    let inv = gamma.clone().try_inverse().ok_or(Error::Singular { smallest: 0.0 })?;
    let mut y = CMatrix::zeros(n * n, n * n);
    for b in 0..n {
        let rb = kron(&numlin::identity(n), &qg.alg.right_mult(&qg.alg.basis_element(b)));
        for a in 0..n {
            y.set_column(a * n + b, &(&rb * qg.comul.column(a)));
        }
    }
    let v = kron(gamma, gamma) * y * kron(&inv, &inv);
    let defect = numlin::unitary_defect(&v);
    if defect > tol.effective(n * n) {
        return Err(Error::NotUnitary { residual: defect });
    }
    Ok(v)
}

/// `G = I N^{1/2}` with `N = G^♯ G`.
#[derive(Clone, Debug)]
pub struct PolarG {
    pub g: AntilinearOp,
    pub n: PositiveOperator,
    pub i: AntilinearOp,
    /// Least-squares residual of `G u_{x,y} = u_{y,x}`.
    pub consistency: f64,
    /// Rank of the family `u_{x,y}`.
    pub span_rank: usize,
}

/// `u_{a,b} = Λ((ψ ⊗ ι)(Δ(e_a^*)(e_b ⊗ 1)))` for all basis pairs, as the
/// columns of an `n × n²` matrix with column index `a n + b`.
pub fn g_vectors(qg: &FiniteQuantumGroup, gns: &GnsData, psi: &Functional) -> CMatrix {
    let n = qg.dim();
    let star = qg.alg.star_coords();
    let id = numlin::identity(n);
    let mut u = CMatrix::zeros(n, n * n);
    for a in 0..n {
        let da = &qg.comul * star.column(a);
        for b in 0..n {
            let z = kron(&qg.alg.right_mult(&qg.alg.basis_element(b)), &id) * &da;
            let sliced = crate::builders::slice_left(&z, psi, n);
            u.set_column(a * n + b, &gns.lambda(&sliced));
        }
    }
    u
}

pub fn build_g(qg: &FiniteQuantumGroup, gns: &GnsData, psi: &Functional, tol: Tolerance) -> Result<PolarG> {
    let n = qg.dim();
    let u = g_vectors(qg, gns, psi);
    let span_rank = numlin::rank(&u, tol);
    if span_rank < n {
        return Err(Error::SpanDeficient { rank: span_rank, expected: n });
    }
    let swapped = CMatrix::from_fn(n, n * n, |r, c| u[(r, (c % n) * n + c / n)]);
    let uc = u.conjugate();
    let (at, consistency) = numlin::lstsq(&uc.transpose(), &swapped.transpose(), tol);
    let a = at.transpose();
    let scale = u.norm().max(1.0);
    if consistency > tol.effective(n) * scale {
        return Err(Error::inconsistent("antilinear operator G", consistency));
    }
    let g = AntilinearOp::new(a)?;
    let (nm, i) = numlin::antilinear_polar(&g, tol)?;
    Ok(PolarG { g, n: PositiveOperator::new(&nm, tol)?, i, consistency: consistency / scale, span_rank })
}

/// `log P = (log ν)/2 + K`, where `K` transports `x ↦ x log N − log N x`
/// through `Λ`. Returns `P` and the Hermitian defect of `K`.
pub fn build_p(gns: &GnsData, n: &PositiveOperator, nu: f64, tol: Tolerance) -> Result<(CMatrix, f64)> {
    let h = gns.hdim();
    let log_n = n.log();
    let mut k = CMatrix::zeros(h, h);
    for m in 0..h {
        let x = gns.pi_of(&gns.lam_inv.column(m).into_owned());
        let ad = &x * &log_n - &log_n * &x;
        k.set_column(m, &(ad * &gns.xi0));
    }
    let defect = numlin::hermitian_defect(&k);
    if defect > tol.effective(h) * k.norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let gen = (&k + k.adjoint()) * c64(0.5, 0.0) + numlin::identity(h) * c64(nu.ln() / 2.0, 0.0);
    Ok((numlin::mat_fn(&gen, MatFn::Exp, tol)?, defect))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{function_algebra, group_algebra, kac_paljutkin, GroupTable};
    use crate::numlin::{dist, ONE, ZERO};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn gns_examples() {
        let triv = function_algebra(&GroupTable::trivial()).unwrap();
        let g = GnsData::build(&triv.alg, &triv.phi, tol()).unwrap();
        assert_eq!(g.hdim(), 1);
        assert!((g.lam[(0, 0)] - ONE).norm() < 1e-15);

        let z2 = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let g = GnsData::build(&z2.alg, &z2.phi, tol()).unwrap();
        // √2 Λ(δ_g) is orthonormal
        let scaled = &g.lam * c64(2f64.sqrt(), 0.0);
        assert!(numlin::unitary_defect(&scaled) < 1e-14);
        assert!(dist(&g.gram, &(numlin::identity(2) * c64(0.5, 0.0))) < 1e-15);

        let kp = kac_paljutkin().unwrap();
        let g = GnsData::build(&kp.alg, &kp.phi, tol()).unwrap();
        assert_eq!(g.hdim(), 8);
        assert_eq!(numlin::span_rank(&g.pi, tol()), 8);
    }

    #[test]
    fn gns_rejects_degenerate_weight() {
        let z2 = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let bad = Functional::new(CVector::from_vec(vec![ONE, ZERO]));
        assert!(matches!(GnsData::build(&z2.alg, &bad, tol()), Err(Error::GramNotPd)));
    }

    #[test]
    fn w_for_z2_is_controlled_flip() {
        let z2 = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let g = GnsData::build(&z2.alg, &z2.phi, tol()).unwrap();
        let w = build_w(&z2, &g, tol()).unwrap();
        // W(e_j ⊗ e_k) = e_j ⊗ e_{j+k}
        let mut expect = CMatrix::zeros(4, 4);
        for j in 0..2 {
            for k in 0..2 {
                expect[(j * 2 + (j + k) % 2, j * 2 + k)] = ONE;
            }
        }
        assert!(dist(&w, &expect) < 1e-14);
        let triv = function_algebra(&GroupTable::trivial()).unwrap();
        let gt = GnsData::build(&triv.alg, &triv.phi, tol()).unwrap();
        assert!(dist(&build_w(&triv, &gt, tol()).unwrap(), &numlin::identity(1)) < 1e-15);
    }

    #[test]
    fn w_pentagon_and_unitarity_on_kac_paljutkin() {
        let kp = kac_paljutkin().unwrap();
        let g = GnsData::build(&kp.alg, &kp.phi, tol()).unwrap();
        let w = build_w(&kp, &g, tol()).unwrap();
        assert!(numlin::unitary_defect(&w) <= 1e-10);
        assert!(numlin::pentagon_residual(&w, 8) <= 1e-10);
    }

    #[test]
    fn modular_and_g_on_finite_examples() {
        for qg in [
            function_algebra(&GroupTable::symmetric3()).unwrap(),
            group_algebra(&GroupTable::symmetric3()).unwrap(),
            kac_paljutkin().unwrap(),
        ] {
            let g = GnsData::build(&qg.alg, &qg.phi, tol()).unwrap();
            let m = ModularData::build(&qg.alg, &g, tol()).unwrap();
            let n = qg.dim();
            assert!(dist(&m.nabla_matrix(), &numlin::identity(n)) < 1e-10);
            assert!(dist(&m.j.square(), &numlin::identity(n)) < 1e-10);
            let p = build_g(&qg, &g, &qg.psi, tol()).unwrap();
            assert_eq!(p.span_rank, n);
            assert!(dist(&p.g.square(), &numlin::identity(n)) < 1e-10);
            assert!(dist(&p.n.matrix(), &numlin::identity(n)) < 1e-10);
            let (pm, _) = build_p(&g, &p.n, 1.0, tol()).unwrap();
            assert!(dist(&pm, &numlin::identity(n)) < 1e-10);
        }
    }

    #[test]
    fn trivial_g_is_conjugation() {
        let triv = function_algebra(&GroupTable::trivial()).unwrap();
        let g = GnsData::build(&triv.alg, &triv.phi, tol()).unwrap();
        let p = build_g(&triv, &g, &triv.psi, tol()).unwrap();
        assert!(p.g.dist(&AntilinearOp::conjugation(1)) < 1e-15);
        assert!(p.i.dist(&AntilinearOp::conjugation(1)) < 1e-15);
    }

    #[test]
    fn z2_j_is_conjugation() {
        let z2 = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let g = GnsData::build(&z2.alg, &z2.phi, tol()).unwrap();
        let m = ModularData::build(&z2.alg, &g, tol()).unwrap();
        assert!(m.j.dist(&AntilinearOp::conjugation(2)) < 1e-14);
    }
}
