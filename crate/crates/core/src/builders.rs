//! Function algebras, group algebras, Kac–Paljutkin, and the Haar solver.

use crate::error::{Error, Result};
use crate::numlin::{self, CMatrix, CVector, Tolerance, ONE, ZERO};
use crate::report::VerificationReport;
use crate::spec_file::QGSpecFile;
use crate::star_algebra::{AlgebraElement, Functional, StarAlgebra};

/// Multiplication table of a finite group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTable {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl GroupTable {
    /// Validates the Latin-square property, the identity, and associativity.
    pub fn from_rows(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!("row {a} has length {}", row.len())));
            }
            let mut seen = vec![false; n];
            for &x in row {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidTable(format!("row {a} is not a permutation")));
                }
            }
        }
        for b in 0..n {
            let mut seen = vec![false; n];
            for row in &table {
                if std::mem::replace(&mut seen[row[b]], true) {
                    return Err(Error::InvalidTable(format!("column {b} is not a permutation")));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::InvalidTable("no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidTable(format!("not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let inverse = (0..n).map(|a| (0..n).find(|&b| table[a][b] == identity).expect("Latin square")).collect();
        Ok(GroupTable { table, identity, inverse })
    }

    pub fn trivial() -> Self {
        GroupTable::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        GroupTable::from_rows((0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()).expect("cyclic group")
    }

    /// S_3 as permutations of {0,1,2}, element 0 the identity.
    pub fn symmetric3() -> Self {
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed");
        let table = (0..6)
            .map(|a| {
                (0..6)
                    .map(|b| {
                        // (ab)(x) = a(b(x))
                        let c = [perms[a][perms[b][0]], perms[a][perms[b][1]], perms[a][perms[b][2]]];
                        idx(c)
                    })
                    .collect()
            })
            .collect();
        GroupTable::from_rows(table).expect("S3")
    }

    /// The quaternion group {±1, ±i, ±j, ±k}; element `2m + s` is `(-1)^s q_m`.
    pub fn quaternion8() -> Self {
        // q_0 = 1, q_1 = i, q_2 = j, q_3 = k; unit products with signs
        let unit_mul = |a: usize, b: usize| -> (usize, bool) {
            match (a, b) {
                (0, x) | (x, 0) => (x, false),
                (x, y) if x == y => (0, true),
                (1, 2) => (3, false),
                (2, 3) => (1, false),
                (3, 1) => (2, false),
                (2, 1) => (3, true),
                (3, 2) => (1, true),
                (1, 3) => (2, true),
                _ => unreachable!(),
            }
        };
        let table = (0..8)
            .map(|a| {
                (0..8)
                    .map(|b| {
                        let (m, neg) = unit_mul(a / 2, b / 2);
                        let sign = (a % 2 + b % 2 + neg as usize) % 2;
                        2 * m + sign
                    })
                    .collect()
            })
            .collect();
        GroupTable::from_rows(table).expect("Q8")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table.clone()
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }
}

/// A finite quantum group: algebra, comultiplication as an `n² × n` matrix
/// (column `k` holds `Δ(e_k)` in the basis `e_i ⊗ e_j`, index `i n + j`),
/// and left and right Haar functionals.
#[derive(Clone, Debug)]
pub struct FiniteQuantumGroup {
    pub name: String,
    pub alg: StarAlgebra,
    pub comul: CMatrix,
    pub phi: Functional,
    pub psi: Functional,
    pub left_nullity: usize,
    pub right_nullity: usize,
}

#[derive(Clone, Debug)]
pub struct HaarSolution {
    pub phi: Functional,
    pub psi: Functional,
    pub left_nullity: usize,
    pub right_nullity: usize,
}

impl FiniteQuantumGroup {
    /// Solves for the Haar functionals and assembles the quantum group.
    pub fn new(name: impl Into<String>, alg: StarAlgebra, comul: CMatrix, tol: Tolerance) -> Result<Self> {
        let n = alg.dim();
        if comul.shape() != (n * n, n) {
            return Err(Error::DimensionMismatch { expected: n * n, got: comul.nrows() });
        }
        let h = solve_haar(&alg, &comul, tol)?;
        Ok(FiniteQuantumGroup {
            name: name.into(),
            alg,
            comul,
            phi: h.phi,
            psi: h.psi,
            left_nullity: h.left_nullity,
            right_nullity: h.right_nullity,
        })
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn delta(&self, x: &AlgebraElement) -> CVector {
        &self.comul * x
    }

    pub fn comultiplication_check(&self, tol: Tolerance) -> VerificationReport {
        comultiplication_check(&self.alg, &self.comul, tol)
    }

    /// The same algebra with `Δ^op = χΔ`.
    pub fn opposite_comul(&self) -> CMatrix {
        flip_comul(&self.comul, self.dim())
    }

    pub fn cocommutativity_defect(&self) -> f64 {
        (&self.comul - self.opposite_comul()).norm()
    }
}

pub fn flip_comul(comul: &CMatrix, n: usize) -> CMatrix {
    CMatrix::from_fn(n * n, n, |r, k| comul[((r % n) * n + r / n, k)])
}

/// Product in `M ⊗ M` of two tensor coordinate vectors.
pub fn tensor_mul(alg: &StarAlgebra, x: &CVector, y: &CVector) -> CVector {
    let n = alg.dim();
    let mut out = CVector::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            let a = x[i * n + j];
            if a == ZERO {
                continue;
            }
            for p in 0..n {
                for q in 0..n {
                    let b = y[p * n + q];
                    if b == ZERO {
                        continue;
                    }
                    let ab = a * b;
                    for k in 0..n {
                        let c1 = alg.c(i, p, k);
                        if c1 == ZERO {
                            continue;
                        }
                        for l in 0..n {
                            out[k * n + l] += ab * c1 * alg.c(j, q, l);
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn tensor_involute(alg: &StarAlgebra, x: &CVector) -> CVector {
    let s = alg.star_coords();
    numlin::kron(&s, &s) * x.conjugate()
}

/// `(ω ⊗ ι)(z)` for `z ∈ M ⊗ M`.
pub fn slice_left(z: &CVector, omega: &Functional, n: usize) -> CVector {
    CVector::from_fn(n, |j, _| (0..n).map(|i| omega.coeffs[i] * z[i * n + j]).sum())
}

/// `(ι ⊗ ω)(z)` for `z ∈ M ⊗ M`.
pub fn slice_right(z: &CVector, omega: &Functional, n: usize) -> CVector {
    CVector::from_fn(n, |i, _| (0..n).map(|j| omega.coeffs[j] * z[i * n + j]).sum())
}

/// Residuals for the homomorphism, *-compatibility, unitality and
/// coassociativity of `comul`.
pub fn comultiplication_check(alg: &StarAlgebra, comul: &CMatrix, tol: Tolerance) -> VerificationReport {
    let n = alg.dim();
    let t = tol.effective(n * n);
    let mut rep = VerificationReport::new();
    let cols: Vec<CVector> = (0..n).map(|k| comul.column(k).into_owned()).collect();

    let mut hom = 0.0;
    for i in 0..n {
        for j in 0..n {
            let prod = alg.left_mult(&alg.basis_element(i)).column(j).into_owned();
            let lhs = comul * prod;
            let rhs = tensor_mul(alg, &cols[i], &cols[j]);
            hom += (lhs - rhs).norm_squared();
        }
    }
    rep.check("homomorphism", "Δ(xy) = Δ(x)Δ(y)", hom.sqrt(), t);

    let mut star = 0.0;
    for (k, col) in cols.iter().enumerate() {
        let lhs = comul * alg.involute(&alg.basis_element(k));
        star += (lhs - tensor_involute(alg, col)).norm_squared();
    }
    rep.check("star", "Δ(x*) = Δ(x)*", star.sqrt(), t);

    let unit = alg.unit();
    let uu = numlin::kron(
        &CMatrix::from_column_slice(n, 1, unit.as_slice()),
        &CMatrix::from_column_slice(n, 1, unit.as_slice()),
    );
    rep.check("unital", "Δ(1) = 1 ⊗ 1", (comul * unit - uu.column(0)).norm(), t);

    let mut coassoc = 0.0;
    for k in 0..n {
        let mut left = CVector::zeros(n * n * n);
        let mut right = CVector::zeros(n * n * n);
        for i in 0..n {
            for j in 0..n {
                let d = comul[(i * n + j, k)];
                if d == ZERO {
                    continue;
                }
                for a in 0..n {
                    for b in 0..n {
                        // (Δ ⊗ ι)Δ: e_i ↦ Δ(e_i) in legs 1,2; e_j in leg 3
                        left[(a * n + b) * n + j] += d * comul[(a * n + b, i)];
                        // (ι ⊗ Δ)Δ: e_j ↦ Δ(e_j) in legs 2,3
                        right[(i * n + a) * n + b] += d * comul[(a * n + b, j)];
                    }
                }
            }
        }
        coassoc += (left - right).norm_squared();
    }
    rep.check("coassociativity", "(Δ ⊗ ι)Δ = (ι ⊗ Δ)Δ", coassoc.sqrt(), t);
    rep
}

/// Solves `(ι ⊗ φ)Δ(x) = φ(x)1` and `(ψ ⊗ ι)Δ(x) = ψ(x)1` on the basis,
/// normalises `φ(1) = ψ(1) = 1` and checks faithfulness and positivity.
pub fn solve_haar(alg: &StarAlgebra, comul: &CMatrix, tol: Tolerance) -> Result<HaarSolution> {
    let n = alg.dim();
    let u = alg.unit();
    let mut left = CMatrix::zeros(n * n, n);
    let mut right = CMatrix::zeros(n * n, n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let d = comul[(i * n + j, k)];
                left[(i * n + k, j)] += d;
                right[(j * n + k, i)] += d;
            }
            left[(i * n + k, k)] -= u[i];
            right[(i * n + k, k)] -= u[i];
        }
    }
    let pick = |sys: &CMatrix| -> Result<(Functional, usize)> {
        let null = numlin::nullspace(sys, tol);
        let nullity = null.ncols();
        match nullity {
            0 => Err(Error::NoPositiveSolution),
            1 => {
                let v = null.column(0).into_owned();
                let at_one = v.dot(u);
                if at_one.norm() <= tol.effective(n) {
                    return Err(Error::NoPositiveSolution);
                }
                let f = Functional::new(v / at_one);
                match alg.positivity_check(&f, tol) {
                    (true, true) => Ok((f, nullity)),
                    _ => Err(Error::NoPositiveSolution),
                }
            }
            k => Err(Error::NonUnique { nullity: k }),
        }
    };
    let (phi, left_nullity) = pick(&left)?;
    let (psi, right_nullity) = pick(&right)?;
    Ok(HaarSolution { phi, psi, left_nullity, right_nullity })
}

pub fn function_algebra_structure(g: &GroupTable) -> (StarAlgebra, CMatrix) {
    let n = g.order();
    let mut structure = vec![ZERO; n * n * n];
    for k in 0..n {
        structure[(k * n + k) * n + k] = ONE;
    }
    let mut comul = CMatrix::zeros(n * n, n);
    for k in 0..n {
        for a in 0..n {
            comul[(a * n + g.mul(g.inverse(a), k), k)] = ONE;
        }
    }
    let labels = (0..n).map(|k| format!("d{k}")).collect();
    let alg = StarAlgebra::new(structure, numlin::identity(n), CVector::from_element(n, ONE), labels).expect("dims");
    (alg, comul)
}

pub fn group_algebra_structure(g: &GroupTable) -> (StarAlgebra, CMatrix) {
    let n = g.order();
    let mut structure = vec![ZERO; n * n * n];
    let mut star = CMatrix::zeros(n, n);
    let mut comul = CMatrix::zeros(n * n, n);
    for a in 0..n {
        for b in 0..n {
            structure[(a * n + b) * n + g.mul(a, b)] = ONE;
        }
        star[(a, g.inverse(a))] = ONE;
        comul[(a * n + a, a)] = ONE;
    }
    let mut unit = CVector::zeros(n);
    unit[g.identity()] = ONE;
    let labels = (0..n).map(|k| format!("u{k}")).collect();
    (StarAlgebra::new(structure, star, unit, labels).expect("dims"), comul)
}

/// Functions on a finite group, `Δ(δ_k) = Σ_g δ_g ⊗ δ_{g⁻¹k}`.
pub fn function_algebra(g: &GroupTable) -> Result<FiniteQuantumGroup> {
    let (alg, comul) = function_algebra_structure(g);
    FiniteQuantumGroup::new(format!("C(G{})", g.order()), alg, comul, Tolerance::default())
}

/// The group algebra, `Δ(u_g) = u_g ⊗ u_g`.
pub fn group_algebra(g: &GroupTable) -> Result<FiniteQuantumGroup> {
    let (alg, comul) = group_algebra_structure(g);
    FiniteQuantumGroup::new(format!("L(G{})", g.order()), alg, comul, Tolerance::default())
}

/// The eight-dimensional Kac–Paljutkin quantum group on `C^4 ⊕ M_2`.
pub fn kac_paljutkin() -> Result<FiniteQuantumGroup> {
    QGSpecFile::kac_paljutkin().build(Tolerance::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::c64;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn group_tables() {
        for g in [GroupTable::trivial(), GroupTable::cyclic(4), GroupTable::symmetric3(), GroupTable::quaternion8()] {
            for a in 0..g.order() {
                assert_eq!(g.mul(a, g.inverse(a)), g.identity());
            }
        }
        assert!(!GroupTable::symmetric3().is_abelian());
        assert!(!GroupTable::quaternion8().is_abelian());
        assert!(GroupTable::cyclic(4).is_abelian());
        assert!(matches!(GroupTable::from_rows(vec![vec![0, 1], vec![0, 1]]), Err(Error::InvalidTable(_))));
        assert!(matches!(GroupTable::from_rows(vec![]), Err(Error::InvalidTable(_))));
        // Latin square without associativity
        let bad = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(GroupTable::from_rows(bad), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn function_algebra_examples() {
        let triv = function_algebra(&GroupTable::trivial()).unwrap();
        assert_eq!(triv.dim(), 1);
        assert_eq!(triv.comul[(0, 0)], ONE);
        let z2 = function_algebra(&GroupTable::cyclic(2)).unwrap();
        // Δ(δ_1) = δ_0 ⊗ δ_1 + δ_1 ⊗ δ_0
        let d1: Vec<_> = z2.comul.column(1).iter().copied().collect();
        assert_eq!(d1, vec![ZERO, ONE, ONE, ZERO]);
        assert!((z2.phi.coeffs[0] - c64(0.5, 0.0)).norm() < 1e-14);
        assert!((z2.phi.coeffs[1] - c64(0.5, 0.0)).norm() < 1e-14);
        assert_eq!(z2.left_nullity, 1);
        let s3 = function_algebra(&GroupTable::symmetric3()).unwrap();
        assert_eq!(s3.dim(), 6);
        let rep = s3.comultiplication_check(tol());
        assert!(rep.all_pass());
        assert!(rep.worst("").unwrap() <= 1e-12);
        assert!(s3.alg.axioms_check(tol()).all_pass());
        assert_eq!(s3.alg.commutativity_defect(), 0.0);
    }

    #[test]
    fn group_algebra_examples() {
        let z2 = group_algebra(&GroupTable::cyclic(2)).unwrap();
        assert_eq!(z2.cocommutativity_defect(), 0.0);
        let ls3 = group_algebra(&GroupTable::symmetric3()).unwrap();
        assert!(ls3.alg.commutativity_defect() > 0.5);
        let lz3 = group_algebra(&GroupTable::cyclic(3)).unwrap();
        assert_eq!(lz3.left_nullity, 1);
        assert!((lz3.phi.coeffs - CVector::from_vec(vec![ONE, ZERO, ZERO])).norm() < 1e-13);
    }

    #[test]
    fn kac_paljutkin_examples() {
        let kp = kac_paljutkin().unwrap();
        assert_eq!(kp.dim(), 8);
        assert_eq!(kp.alg.center_dim(tol()), 5);
        assert!(kp.alg.axioms_check(tol()).all_pass());
        let rep = kp.comultiplication_check(tol());
        assert!(rep.all_pass(), "{}", rep.to_text());
        assert_eq!((kp.left_nullity, kp.right_nullity), (1, 1));
        assert!(kp.phi.dist(&kp.psi) < 1e-12);
        assert!(kp.cocommutativity_defect() > 0.5);
        assert!(kp.alg.commutativity_defect() > 0.5);
        // Haar: 1/8 on e_i, 1/4 on a11 and a22
        let expect = [0.125, 0.125, 0.125, 0.125, 0.25, 0.0, 0.0, 0.25];
        for (k, e) in expect.iter().enumerate() {
            assert!((kp.phi.coeffs[k] - c64(*e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn opposite_and_defects() {
        let s3 = function_algebra(&GroupTable::symmetric3()).unwrap();
        assert!(comultiplication_check(&s3.alg, &s3.opposite_comul(), tol()).all_pass());
        let mut broken = s3.comul.clone();
        broken[(7, 0)] = ZERO;
        let rep = comultiplication_check(&s3.alg, &broken, tol());
        assert!(!rep.get("coassociativity").unwrap().pass);
    }

    #[test]
    fn strengthened_invariance_all_basis() {
        for qg in [
            function_algebra(&GroupTable::quaternion8()).unwrap(),
            group_algebra(&GroupTable::symmetric3()).unwrap(),
            kac_paljutkin().unwrap(),
        ] {
            let n = qg.dim();
            for k in 0..n {
                let d = qg.delta(&qg.alg.basis_element(k));
                let l = slice_right(&d, &qg.phi, n) - qg.alg.unit() * qg.phi.coeffs[k];
                let r = slice_left(&d, &qg.psi, n) - qg.alg.unit() * qg.psi.coeffs[k];
                assert!(l.norm() < 1e-12 && r.norm() < 1e-12);
            }
        }
    }
}
