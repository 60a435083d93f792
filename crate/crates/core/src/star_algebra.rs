//! Finite-dimensional *-algebras given by structure constants.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numlin::{self, c64, CMatrix, CVector, SpanCoords, Tolerance, ZERO};
use crate::report::VerificationReport;

/// Coordinates of an algebra element in the algebra basis.
pub type AlgebraElement = CVector;

/// `e_i e_j = Σ_k c[i][j][k] e_k`, `e_i^* = Σ_j s[i][j] e_j`, unit `Σ_k u[k] e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarAlgebra {
    dim: usize,
    structure: Vec<Complex64>,
    star: CMatrix,
    unit: CVector,
    labels: Vec<String>,
}

/// A linear functional `ω(x) = Σ_k ω[k] x_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    pub coeffs: CVector,
}

impl Functional {
    pub fn new(coeffs: CVector) -> Self {
        Functional { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        Functional { coeffs: CVector::zeros(n) }
    }

    /// The coordinate functional dual to basis element `k`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut coeffs = CVector::zeros(n);
        coeffs[k] = numlin::ONE;
        Functional { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: &AlgebraElement) -> Complex64 {
        self.coeffs.dot(x)
    }

    pub fn scaled(&self, c: Complex64) -> Functional {
        Functional { coeffs: &self.coeffs * c }
    }

    pub fn dist(&self, other: &Functional) -> f64 {
        (&self.coeffs - &other.coeffs).norm()
    }
}

impl StarAlgebra {
    pub fn new(structure: Vec<Complex64>, star: CMatrix, unit: CVector, labels: Vec<String>) -> Result<Self> {
        let dim = unit.len();
        if structure.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim * dim, got: structure.len() });
        }
        if star.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: star.nrows() });
        }
        if labels.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: labels.len() });
        }
        Ok(StarAlgebra { dim, structure, star, unit, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn unit(&self) -> &CVector {
        &self.unit
    }

    pub fn structure(&self) -> &[Complex64] {
        &self.structure
    }

    /// The matrix `s` with `e_i^* = Σ_j s[i][j] e_j`.
    pub fn involution(&self) -> &CMatrix {
        &self.star
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn basis_element(&self, k: usize) -> AlgebraElement {
        let mut v = CVector::zeros(self.dim);
        v[k] = numlin::ONE;
        v
    }

    fn check_dim(&self, a: &AlgebraElement) -> Result<()> {
        if a.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.len() });
        }
        Ok(())
    }

    pub fn multiply(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(self.left_mult(a) * b)
    }

    /// `y = s^T conj(x)`: coordinates of `x^*`.
    pub fn involute(&self, a: &AlgebraElement) -> AlgebraElement {
        self.star_coords() * a.conjugate()
    }

    /// `s^T`, so that `x^*` has coordinates `s^T conj(x)`.
    pub fn star_coords(&self) -> CMatrix {
        self.star.transpose()
    }

    /// Matrix of `y ↦ a y`.
    pub fn left_mult(&self, a: &AlgebraElement) -> CMatrix {
        let n = self.dim;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            if a[i] == ZERO {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    m[(k, j)] += a[i] * self.c(i, j, k);
                }
            }
        }
        m
    }

    /// Matrix of `y ↦ y b`.
    pub fn right_mult(&self, b: &AlgebraElement) -> CMatrix {
        let n = self.dim;
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            if b[j] == ZERO {
                continue;
            }
            for i in 0..n {
                for k in 0..n {
                    m[(k, i)] += b[j] * self.c(i, j, k);
                }
            }
        }
        m
    }

    /// `G[i][j] = ω(e_i^* e_j)`, so `ω(y^* x) = y^† G x`.
    pub fn gram(&self, omega: &Functional) -> CMatrix {
        let n = self.dim;
        let star = self.star_coords();
        let mut g = CMatrix::zeros(n, n);
        for i in 0..n {
            let ei_star = star.column(i).into_owned();
            let row = self.left_mult(&ei_star);
            for j in 0..n {
                g[(i, j)] = omega.eval(&row.column(j).into_owned());
            }
        }
        g
    }

    /// `(positive, faithful)` from the spectrum of the Gram matrix.
    pub fn positivity_check(&self, omega: &Functional, tol: Tolerance) -> (bool, bool) {
        let g = self.gram(omega);
        let thr = tol.effective(self.dim) * g.norm().max(1.0);
        if numlin::hermitian_defect(&g) > thr {
            return (false, false);
        }
        let (vals, _) = match numlin::herm_eig(&g, tol) {
            Ok(e) => e,
            Err(_) => return (false, false),
        };
        let min = vals.first().copied().unwrap_or(0.0);
        (min >= -thr, min > thr)
    }

    /// Trace of the left regular representation, a faithful positive trace on
    /// any finite-dimensional C*-algebra.
    pub fn regular_trace(&self) -> Functional {
        let n = self.dim;
        Functional::new(CVector::from_fn(n, |i, _| (0..n).map(|k| self.c(i, k, k)).sum()))
    }

    pub fn commutativity_defect(&self) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += (self.c(i, j, k) - self.c(j, i, k)).norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    /// Dimension of the centre.
    pub fn center_dim(&self, tol: Tolerance) -> usize {
        let n = self.dim;
        let mut sys = CMatrix::zeros(n * n, n);
        for x in 0..n {
            for k in 0..n {
                for i in 0..n {
                    sys[(x * n + k, i)] = self.c(i, x, k) - self.c(x, i, k);
                }
            }
        }
        numlin::nullspace(&sys, tol).ncols()
    }

    pub fn axioms_check(&self, tol: Tolerance) -> VerificationReport {
        let n = self.dim;
        let t = tol.effective(n);
        let mut rep = VerificationReport::new();
        let basis: Vec<CVector> = (0..n).map(|k| self.basis_element(k)).collect();
        let lm: Vec<CMatrix> = basis.iter().map(|b| self.left_mult(b)).collect();

        let mut assoc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let eij = lm[i].column(j).into_owned();
                let left = self.left_mult(&eij);
                let right = &lm[i] * &lm[j];
                assoc += (left - right).norm_squared();
            }
        }
        rep.check("associativity", "(xy)z = x(yz)", assoc.sqrt(), t);

        let lu = self.left_mult(&self.unit);
        let ru = self.right_mult(&self.unit);
        let id = numlin::identity(n);
        rep.check("unit_left", "1x = x", (lu - &id).norm(), t);
        rep.check("unit_right", "x1 = x", (ru - &id).norm(), t);

        let star = self.star_coords();
        // x** = s^T conj(s^T conj(x)) = s^T conj(s^T) x
        let twice = &star * star.conjugate();
        rep.check("involutive", "x** = x", (twice - &id).norm(), t);

        let mut anti = 0.0;
        for i in 0..n {
            for j in 0..n {
                let prod = lm[i].column(j).into_owned();
                let lhs = self.involute(&prod);
                let rhs = self.left_mult(&self.involute(&basis[j])) * self.involute(&basis[i]);
                anti += (lhs - rhs).norm_squared();
            }
        }
        rep.check("antimultiplicative", "(xy)* = y*x*", anti.sqrt(), t);

        let g = self.gram(&self.regular_trace());
        let min = numlin::herm_eig(&((&g + g.adjoint()) * c64(0.5, 0.0)), tol)
            .map(|(v, _)| v.first().copied().unwrap_or(0.0))
            .unwrap_or(f64::NEG_INFINITY);
        let herm = numlin::hermitian_defect(&g);
        rep.check_noted(
            "c_star",
            "Tr_reg(x*x) > 0 for x != 0",
            herm + (t * g.norm().max(1.0) - min).max(0.0),
            t,
            "regular trace must be a faithful positive functional for a C*-involution",
        );
        rep
    }

    /// Structure constants of the algebra spanned by `basis`, which must be
    /// linearly independent and closed under products and adjoints.
    pub fn from_matrices(basis: &[CMatrix], labels: Vec<String>, tol: Tolerance) -> Result<(StarAlgebra, SpanCoords)> {
        let coords = SpanCoords::new(basis, tol)?;
        let n = basis.len();
        let m = basis[0].nrows();
        let scale = basis.iter().map(|b| b.norm()).fold(1.0, f64::max);
        let thr = tol.effective(m) * scale * scale;
        let mut structure = vec![ZERO; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let (c, r) = coords.coords(&(&basis[i] * &basis[j]));
                if r > thr {
                    return Err(Error::NotInAlgebra { residual: r });
                }
                for k in 0..n {
                    structure[(i * n + j) * n + k] = c[k];
                }
            }
        }
        let mut star = CMatrix::zeros(n, n);
        for (i, b) in basis.iter().enumerate() {
            let (c, r) = coords.coords(&b.adjoint());
            if r > tol.effective(m) * scale {
                return Err(Error::NotInAlgebra { residual: r });
            }
            star.set_row(i, &c.transpose());
        }
        let (unit, r) = coords.coords(&numlin::identity(m));
        if r > tol.effective(m) * scale {
            return Err(Error::NotInAlgebra { residual: r });
        }
        Ok((StarAlgebra::new(structure, star, unit, labels)?, coords))
    }
}

/// The element `D = Σ d_k B_k` of the span of `basis` with `Tr(D B_j) = values[j]`.
pub fn density_wrt_trace(basis: &[CMatrix], values: &[Complex64], tol: Tolerance) -> Result<CMatrix> {
    let n = basis.len();
    if values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: values.len() });
    }
    let sys = CMatrix::from_fn(n, n, |j, k| (&basis[k] * &basis[j]).trace());
    let rhs = CMatrix::from_fn(n, 1, |j, _| values[j]);
    let (d, r) = numlin::lstsq(&sys, &rhs, tol);
    let scale = rhs.norm().max(1.0);
    if r > tol.effective(n) * scale {
        return Err(Error::inconsistent("trace density", r));
    }
    let mut out = CMatrix::zeros(basis[0].nrows(), basis[0].ncols());
    for k in 0..n {
        out += &basis[k] * d[(k, 0)];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{function_algebra, group_algebra, GroupTable};
    use crate::numlin::{dist, ONE};
    use crate::sampling::Sampler;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    /// M_2 with matrix units as basis.
    fn m2() -> StarAlgebra {
        let units: Vec<CMatrix> =
            (0..4).map(|k| CMatrix::from_fn(2, 2, |r, c| if r * 2 + c == k { ONE } else { ZERO })).collect();
        StarAlgebra::from_matrices(&units, (0..4).map(|k| format!("e{k}")).collect(), tol()).unwrap().0
    }

    #[test]
    fn multiply_examples() {
        let cz2 = function_algebra(&GroupTable::cyclic(2)).unwrap().alg;
        let x = CVector::from_vec(vec![c64(0.3, 1.0), c64(-2.0, 0.5)]);
        assert_eq!(cz2.multiply(cz2.unit(), &x).unwrap(), x);
        let p = cz2.multiply(&cz2.basis_element(0), &cz2.basis_element(1)).unwrap();
        assert_eq!(p.norm(), 0.0);
        let g = GroupTable::symmetric3();
        let ls3 = group_algebra(&g).unwrap().alg;
        for a in 0..6 {
            for b in 0..6 {
                let p = ls3.multiply(&ls3.basis_element(a), &ls3.basis_element(b)).unwrap();
                assert_eq!(p, ls3.basis_element(g.mul(a, b)));
            }
        }
        assert!(matches!(ls3.multiply(&CVector::zeros(2), &x), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn involute_examples() {
        let g = GroupTable::symmetric3();
        let cg = function_algebra(&g).unwrap().alg;
        for k in 0..6 {
            assert_eq!(cg.involute(&cg.basis_element(k)), cg.basis_element(k));
        }
        let lg = group_algebra(&g).unwrap().alg;
        for k in 0..6 {
            assert_eq!(lg.involute(&lg.basis_element(k)), lg.basis_element(g.inverse(k)));
        }
        let mut s = Sampler::new(3);
        for _ in 0..5 {
            let (x, y) = (s.vector(6), s.vector(6));
            let lhs = lg.involute(&lg.multiply(&x, &y).unwrap());
            let rhs = lg.multiply(&lg.involute(&y), &lg.involute(&x)).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn axioms_pass_and_detect_defects() {
        let cz2 = function_algebra(&GroupTable::cyclic(2)).unwrap().alg;
        assert!(cz2.axioms_check(tol()).all_pass());

        let mut broken = cz2.clone();
        broken.structure[2] += ONE;
        let rep = broken.axioms_check(tol());
        assert!(!rep.get("associativity").unwrap().pass);

        let lz3 = group_algebra(&GroupTable::cyclic(3)).unwrap().alg;
        let mut bad = lz3.clone();
        bad.star = numlin::identity(3);
        let rep = bad.axioms_check(tol());
        assert!(rep.get("antimultiplicative").unwrap().pass);
        assert!(rep.get("involutive").unwrap().pass);
        assert!(!rep.get("c_star").unwrap().pass);
    }

    #[test]
    fn gram_examples() {
        let triv = function_algebra(&GroupTable::trivial()).unwrap();
        assert!(dist(&triv.alg.gram(&triv.phi), &numlin::identity(1)) < 1e-15);
        let cz2 = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let g = cz2.alg.gram(&cz2.phi);
        assert!(dist(&g, &(numlin::identity(2) * c64(0.5, 0.0))) < 1e-15);

        let alg = m2();
        let mut s = Sampler::new(4);
        let a = s.matrix(2, 2);
        let rho = a.adjoint() * a;
        // ω(e_k) = Tr(ρ e_k) = ρ[c][r] for e_k = E_{rc}
        let omega = Functional::new(CVector::from_fn(4, |k, _| rho[(k % 2, k / 2)]));
        let (pos, _) = alg.positivity_check(&omega, tol());
        assert!(pos);
        assert!(numlin::is_positive_semidefinite(&alg.gram(&omega), tol()));
    }

    #[test]
    fn positivity_examples() {
        let cz2 = function_algebra(&GroupTable::cyclic(2)).unwrap();
        assert_eq!(cz2.alg.positivity_check(&cz2.phi, tol()), (true, true));
        let signed = Functional::new(CVector::from_vec(vec![ONE, -ONE]));
        assert!(!cz2.alg.positivity_check(&signed, tol()).0);
        assert_eq!(cz2.alg.positivity_check(&Functional::zero(2), tol()), (true, false));
    }

    #[test]
    fn hermitian_functional_has_hermitian_gram() {
        let lg = group_algebra(&GroupTable::symmetric3()).unwrap();
        let g = lg.alg.gram(&lg.phi);
        assert_eq!(numlin::hermitian_defect(&g), 0.0);
    }

    #[test]
    fn densities() {
        let units: Vec<CMatrix> =
            (0..4).map(|k| CMatrix::from_fn(2, 2, |r, c| if r * 2 + c == k { ONE } else { ZERO })).collect();
        // normalized trace
        let vals: Vec<Complex64> = units.iter().map(|u| u.trace() * 0.5).collect();
        let d = density_wrt_trace(&units, &vals, tol()).unwrap();
        assert!(dist(&d, &(numlin::identity(2) * c64(0.5, 0.0))) < 1e-14);
        // vector state
        let mut s = Sampler::new(5);
        let xi = s.vector(2).normalize();
        let vals: Vec<Complex64> = units.iter().map(|u| xi.dotc(&(u * &xi))).collect();
        let d = density_wrt_trace(&units, &vals, tol()).unwrap();
        assert!(dist(&d, &(&xi * xi.adjoint())) < 1e-13);
        for (u, v) in units.iter().zip(&vals) {
            assert!(((&d * u).trace() - v).norm() < 1e-13);
        }
        // diagonal algebra cannot reproduce an off-diagonal-sensitive functional
        let diag: Vec<CMatrix> = units.iter().step_by(3).cloned().collect();
        assert_eq!(diag.len(), 2);
        let d = density_wrt_trace(&diag, &[c64(0.5, 0.0), c64(0.5, 0.0)], tol()).unwrap();
        assert!(dist(&d, &(numlin::identity(2) * c64(0.5, 0.0))) < 1e-14);
    }

    #[test]
    fn from_matrices_roundtrip() {
        let alg = m2();
        assert!(alg.axioms_check(tol()).all_pass());
        assert_eq!(alg.center_dim(tol()), 1);
        assert!(alg.commutativity_defect() > 0.5);
    }
}
