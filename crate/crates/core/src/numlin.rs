//! Dense complex linear algebra for operators on `H` and `H ⊗ H`.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Tensor products
//! use Kronecker ordering with the first factor as the slower index, so a
//! vector in `H1 ⊗ H2` has coordinate `i * dim(H2) + j` for `e_i ⊗ e_j`.
//! Inner products are linear in the first argument: `<u, v> = v^† u`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const IMAG: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Absolute/relative tolerance pair. The threshold applied to an object of
/// dimension `n` is `abs + rel * n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-10, abs: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0 && abs > 0.0) {
            return Err(Error::ValidationFailed(format!("tolerances must be positive (rel = {rel}, abs = {abs})")));
        }
        Ok(Tolerance { rel, abs })
    }

    pub fn effective(&self, n: usize) -> f64 {
        self.abs + self.rel * n as f64
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Frobenius distance.
pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).norm()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    (a - a.adjoint()).norm()
}

pub fn unitary_defect(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    (a.adjoint() * a - identity(n)).norm().max((a * a.adjoint() - identity(n)).norm())
}

pub fn is_hermitian(a: &CMatrix, tol: Tolerance) -> bool {
    a.is_square() && hermitian_defect(a) <= tol.effective(a.nrows()) * a.norm().max(1.0)
}

pub fn is_unitary(a: &CMatrix, tol: Tolerance) -> bool {
    a.is_square() && unitary_defect(a) <= tol.effective(a.nrows())
}

pub fn is_positive_semidefinite(a: &CMatrix, tol: Tolerance) -> bool {
    match herm_eig(a, tol) {
        Ok((vals, _)) => vals.first().is_none_or(|&v| v >= -tol.effective(a.nrows()) * a.norm().max(1.0)),
        Err(_) => false,
    }
}

/// Spectral decomposition of a Hermitian matrix: eigenvalues ascending and a
/// unitary whose columns are the matching eigenvectors.
pub fn herm_eig(a: &CMatrix, tol: Tolerance) -> Result<(Vec<f64>, CMatrix)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let defect = hermitian_defect(a);
    if defect > tol.effective(n) * a.norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let sym = (a + a.adjoint()) * c64(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

fn from_spectrum(vecs: &CMatrix, vals: impl Iterator<Item = Complex64>) -> CMatrix {
    let mut scaled = vecs.clone();
    for (c, v) in vals.enumerate() {
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= v;
        }
    }
    scaled * vecs.adjoint()
}

/// A positive definite operator kept in diagonalised form, so that complex
/// powers and logarithms are cheap to evaluate repeatedly.
#[derive(Clone, Debug)]
pub struct PositiveOperator {
    vals: Vec<f64>,
    vecs: CMatrix,
}

impl PositiveOperator {
    pub fn new(a: &CMatrix, tol: Tolerance) -> Result<Self> {
        let (vals, vecs) = herm_eig(a, tol)?;
        let scale = a.norm().max(1.0);
        if let Some(&min) = vals.first() {
            if min <= tol.effective(a.nrows()) * scale {
                return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
            }
        }
        Ok(PositiveOperator { vals, vecs })
    }

    pub fn dim(&self) -> usize {
        self.vals.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.vals
    }

    /// `A^z = exp(z log A)`.
    pub fn power(&self, z: Complex64) -> CMatrix {
        from_spectrum(&self.vecs, self.vals.iter().map(|&l| (z * l.ln()).exp()))
    }

    /// `A^{it}`, unitary for real `t`.
    pub fn imag_power(&self, t: f64) -> CMatrix {
        self.power(c64(0.0, t))
    }

    pub fn real_power(&self, p: f64) -> CMatrix {
        self.power(c64(p, 0.0))
    }

    pub fn log(&self) -> CMatrix {
        from_spectrum(&self.vecs, self.vals.iter().map(|&l| c64(l.ln(), 0.0)))
    }

    pub fn matrix(&self) -> CMatrix {
        from_spectrum(&self.vecs, self.vals.iter().map(|&l| c64(l, 0.0)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatFn {
    Power(Complex64),
    Log,
    Exp,
}

/// Applies `f` on the spectrum of a Hermitian matrix. Powers and logarithms
/// require a positive definite argument.
pub fn mat_fn(a: &CMatrix, f: MatFn, tol: Tolerance) -> Result<CMatrix> {
    match f {
        MatFn::Exp => {
            let (vals, vecs) = herm_eig(a, tol)?;
            Ok(from_spectrum(&vecs, vals.iter().map(|&l| c64(l.exp(), 0.0))))
        }
        MatFn::Log => Ok(PositiveOperator::new(a, tol)?.log()),
        MatFn::Power(z) => Ok(PositiveOperator::new(a, tol)?.power(z)),
    }
}

/// An antilinear operator `v ↦ mat · conj(v)` in the fixed orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AntilinearOp {
    mat: CMatrix,
}

impl AntilinearOp {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        Ok(AntilinearOp { mat })
    }

    /// Plain complex conjugation of coordinates.
    pub fn conjugation(n: usize) -> Self {
        AntilinearOp { mat: identity(n) }
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.mat * v.conjugate()
    }

    /// The antilinear adjoint `K♯`, characterised by `<K♯u, v> = <Kv, u>`.
    pub fn sharp(&self) -> AntilinearOp {
        AntilinearOp { mat: self.mat.transpose() }
    }

    /// `self ∘ other`, a linear operator.
    pub fn compose(&self, other: &AntilinearOp) -> CMatrix {
        &self.mat * other.mat.conjugate()
    }

    /// `self ∘ b` for a linear `b`.
    pub fn after(&self, b: &CMatrix) -> AntilinearOp {
        AntilinearOp { mat: &self.mat * b.conjugate() }
    }

    /// `b ∘ self` for a linear `b`.
    pub fn then(&self, b: &CMatrix) -> AntilinearOp {
        AntilinearOp { mat: b * &self.mat }
    }

    /// `self ∘ x ∘ other`, which is linear.
    pub fn sandwich(&self, x: &CMatrix, other: &AntilinearOp) -> CMatrix {
        &self.mat * x.conjugate() * other.mat.conjugate()
    }

    /// `self ∘ x ∘ self`.
    pub fn conjugate_by(&self, x: &CMatrix) -> CMatrix {
        self.sandwich(x, self)
    }

    pub fn tensor(&self, other: &AntilinearOp) -> AntilinearOp {
        AntilinearOp { mat: kron(&self.mat, &other.mat) }
    }

    /// `c · self`.
    pub fn scaled(&self, c: Complex64) -> AntilinearOp {
        AntilinearOp { mat: &self.mat * c }
    }

    pub fn square(&self) -> CMatrix {
        self.compose(self)
    }

    pub fn dist(&self, other: &AntilinearOp) -> f64 {
        dist(&self.mat, &other.mat)
    }
}

/// Polar decomposition `g = i ∘ n^{1/2}` of an invertible antilinear operator,
/// with `n = g♯ ∘ g` positive definite and `i` antiunitary.
pub fn antilinear_polar(g: &AntilinearOp, tol: Tolerance) -> Result<(CMatrix, AntilinearOp)> {
    let n = g.sharp().compose(g);
    let pos = PositiveOperator::new(&n, tol).map_err(|e| match e {
        Error::NotPositiveDefinite { min_eigenvalue } => Error::Singular { smallest: min_eigenvalue.max(0.0).sqrt() },
        other => other,
    })?;
    let i = g.after(&pos.real_power(-0.5));
    Ok((pos.matrix(), i))
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn rank_threshold(tol: Tolerance, dim: usize, smax: f64) -> f64 {
    tol.effective(dim) * smax.max(1.0)
}

pub fn rank(a: &CMatrix, tol: Tolerance) -> usize {
    let s = singular_values(a);
    let Some(&smax) = s.first() else { return 0 };
    let thr = rank_threshold(tol, a.nrows().max(a.ncols()), smax);
    s.iter().filter(|&&v| v > thr).count()
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub fn nullspace(a: &CMatrix, tol: Tolerance) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    let padded = if a.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.rows_mut(0, a.nrows()).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thr = rank_threshold(tol, a.nrows().max(cols), smax);
    let null: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= thr).collect();
    CMatrix::from_fn(cols, null.len(), |r, c| v_t[(null[c], r)].conj())
}

/// Moore–Penrose pseudo-inverse with rank decided against `tol`.
pub fn pinv(a: &CMatrix, tol: Tolerance) -> CMatrix {
    if a.nrows() == 0 || a.ncols() == 0 {
        return CMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thr = rank_threshold(tol, a.nrows().max(a.ncols()), smax);
    svd.pseudo_inverse(thr).expect("U and V^T computed")
}

/// Least-squares solution of `a x = b` and the residual `‖a x − b‖`.
pub fn lstsq(a: &CMatrix, b: &CMatrix, tol: Tolerance) -> (CMatrix, f64) {
    let x = pinv(a, tol) * b;
    let r = (a * &x - b).norm();
    (x, r)
}

/// Row-major flattening of a matrix into a column vector.
pub fn flatten(m: &CMatrix) -> CVector {
    let (r, c) = m.shape();
    CVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

pub fn unflatten(v: &[Complex64], rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |r, c| v[r * cols + c])
}

/// Trace inner product `<a, b> = Tr(b^† a)`.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

fn stack(vectors: &[CMatrix]) -> CMatrix {
    let len = vectors.first().map_or(0, |m| m.len());
    let mut out = CMatrix::zeros(len, vectors.len());
    for (k, m) in vectors.iter().enumerate() {
        out.set_column(k, &flatten(m));
    }
    out
}

/// Incrementally grown orthonormal family of matrices under the trace inner
/// product.
struct OrthoFamily {
    members: Vec<CMatrix>,
    threshold: f64,
}

impl OrthoFamily {
    fn new(threshold: f64) -> Self {
        OrthoFamily { members: Vec::new(), threshold }
    }

    /// Adds the part of `m` orthogonal to the family. Anything of norm below
    /// `threshold · reference` counts as zero.
    fn try_add(&mut self, m: &CMatrix, reference: f64) -> bool {
        let scale = m.norm();
        if scale <= self.threshold * reference {
            return false;
        }
        let mut v = m / c64(scale, 0.0);
        for _ in 0..2 {
            for b in &self.members {
                let p = trace_inner(&v, b);
                v -= b * p;
            }
        }
        let rest = v.norm();
        if rest <= self.threshold {
            return false;
        }
        self.members.push(v / c64(rest, 0.0));
        true
    }
}

/// Orthonormal basis of the smallest unital *-algebra containing `generators`.
pub fn algebra_closure(generators: &[CMatrix], tol: Tolerance) -> Result<Vec<CMatrix>> {
    let Some(first) = generators.first() else {
        return Ok(Vec::new());
    };
    let m = first.nrows();
    for g in generators {
        if g.shape() != (m, m) {
            return Err(Error::DimensionMismatch { expected: m, got: g.nrows().max(g.ncols()) });
        }
    }
    let mut fam = OrthoFamily::new(tol.effective(m * m).sqrt().max(tol.effective(m)));
    fam.try_add(&identity(m), 1.0);
    for g in generators {
        let r = g.norm();
        fam.try_add(g, r);
        fam.try_add(&g.adjoint(), r);
    }
    let mut done = 0;
    // Products of old members were already tried; only new pairs need work.
    loop {
        let before = fam.members.len();
        let snapshot = fam.members.clone();
        for (i, a) in snapshot.iter().enumerate() {
            for (j, b) in snapshot.iter().enumerate() {
                if i < done && j < done {
                    continue;
                }
                fam.try_add(&(a * b), 1.0);
            }
        }
        done = before;
        if fam.members.len() == before {
            break;
        }
    }
    Ok(fam.members)
}

/// Basis of `{X : X a = a X for all a in basis}` inside `B(C^dim)`,
/// orthonormal under the trace inner product.
pub fn commutant(basis: &[CMatrix], dim: usize, tol: Tolerance) -> Result<Vec<CMatrix>> {
    let m = dim;
    for a in basis {
        if a.shape() != (m, m) {
            return Err(Error::DimensionMismatch { expected: m, got: a.nrows() });
        }
    }
    if basis.is_empty() {
        return Ok((0..m * m)
            .map(|k| CMatrix::from_fn(m, m, |r, c| if r * m + c == k { ONE } else { ZERO }))
            .collect());
    }
    let mut cons = CMatrix::zeros(basis.len() * m * m, m * m);
    for (b, a) in basis.iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                let row = b * m * m + i * m + j;
                for k in 0..m {
                    cons[(row, i * m + k)] += a[(k, j)];
                    cons[(row, k * m + j)] -= a[(i, k)];
                }
            }
        }
    }
    let null = nullspace(&cons, tol);
    Ok((0..null.ncols()).map(|c| unflatten(null.column(c).as_slice(), m, m)).collect())
}

/// Dimension of the span of a family of equally shaped matrices.
pub fn span_rank(vectors: &[CMatrix], tol: Tolerance) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    rank(&stack(vectors), tol)
}

pub fn subspace_equal(a: &[CMatrix], b: &[CMatrix], tol: Tolerance) -> bool {
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        if x.shape() != y.shape() {
            return false;
        }
    }
    let ra = span_rank(a, tol);
    let rb = span_rank(b, tol);
    if ra != rb {
        return false;
    }
    let joint: Vec<CMatrix> = a.iter().chain(b.iter()).cloned().collect();
    span_rank(&joint, tol) == ra
}

/// `dim(span a ∩ span b)`.
pub fn intersection_dim(a: &[CMatrix], b: &[CMatrix], tol: Tolerance) -> usize {
    let joint: Vec<CMatrix> = a.iter().chain(b.iter()).cloned().collect();
    (span_rank(a, tol) + span_rank(b, tol)).saturating_sub(span_rank(&joint, tol))
}

/// Coordinates with respect to a linearly independent family of matrices.
#[derive(Clone, Debug)]
pub struct SpanCoords {
    rows: usize,
    cols: usize,
    basis: CMatrix,
    pinv: CMatrix,
}

impl SpanCoords {
    pub fn new(vectors: &[CMatrix], tol: Tolerance) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::SpanDeficient { rank: 0, expected: 1 });
        };
        let (rows, cols) = first.shape();
        if let Some(bad) = vectors.iter().find(|m| m.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch { expected: rows, got: bad.nrows() });
        }
        let basis = stack(vectors);
        let r = rank(&basis, tol);
        if r < vectors.len() {
            return Err(Error::SpanDeficient { rank: r, expected: vectors.len() });
        }
        let pinv = pinv(&basis, tol);
        Ok(SpanCoords { rows, cols, basis, pinv })
    }

    pub fn len(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.ncols() == 0
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn member(&self, k: usize) -> CMatrix {
        unflatten(self.basis.column(k).as_slice(), self.rows, self.cols)
    }

    pub fn members(&self) -> Vec<CMatrix> {
        (0..self.len()).map(|k| self.member(k)).collect()
    }

    /// Best coordinates for `m` and the distance from `m` to the span.
    pub fn coords(&self, m: &CMatrix) -> (CVector, f64) {
        let v = flatten(m);
        let c = &self.pinv * &v;
        let r = (&self.basis * &c - v).norm();
        (c, r)
    }

    pub fn combine(&self, coords: &CVector) -> CMatrix {
        unflatten((&self.basis * coords).as_slice(), self.rows, self.cols)
    }

    /// Coordinates of an operator on `H1 ⊗ H2` in the product basis
    /// `{self_i ⊗ right_j}`, as a `len × right.len` matrix, plus the residual.
    pub fn tensor_coords(&self, right: &SpanCoords, x: &CMatrix) -> (CMatrix, f64) {
        let y = realign(x, self.rows, right.rows);
        let c = &self.pinv * &y * right.pinv.transpose();
        let r = (&self.basis * &c * right.basis.transpose() - y).norm();
        (c, r)
    }

    /// `Σ c_ij self_i ⊗ right_j`.
    pub fn tensor_combine(&self, right: &SpanCoords, c: &CMatrix) -> CMatrix {
        let y = &self.basis * c * right.basis.transpose();
        unrealign(&y, self.rows, right.rows)
    }
}

/// Reshuffles an operator on `C^n1 ⊗ C^n2` so that `a ⊗ b` becomes the rank
/// one matrix `vec(a) vec(b)^T`.
pub fn realign(x: &CMatrix, n1: usize, n2: usize) -> CMatrix {
    CMatrix::from_fn(n1 * n1, n2 * n2, |r, c| {
        let (a, b) = (r / n1, r % n1);
        let (cc, d) = (c / n2, c % n2);
        x[(a * n2 + cc, b * n2 + d)]
    })
}

pub fn unrealign(y: &CMatrix, n1: usize, n2: usize) -> CMatrix {
    CMatrix::from_fn(n1 * n2, n1 * n2, |r, c| {
        let (a, cc) = (r / n2, r % n2);
        let (b, d) = (c / n2, c % n2);
        y[(a * n1 + b, cc * n2 + d)]
    })
}

/// The flip `Σ : C^n1 ⊗ C^n2 → C^n2 ⊗ C^n1`.
pub fn flip(n1: usize, n2: usize) -> CMatrix {
    let mut s = CMatrix::zeros(n1 * n2, n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            s[(j * n1 + i, i * n2 + j)] = ONE;
        }
    }
    s
}

/// `Σ X Σ` for `X` on `C^n1 ⊗ C^n2`; the result acts on `C^n2 ⊗ C^n1`.
pub fn flip_conj(x: &CMatrix, n1: usize, n2: usize) -> CMatrix {
    CMatrix::from_fn(n1 * n2, n1 * n2, |r, c| {
        let (cc, a) = (r / n1, r % n1);
        let (d, b) = (c / n1, c % n1);
        x[(a * n2 + cc, b * n2 + d)]
    })
}

/// Slice of an operator on `C^n1 ⊗ C^n2` by the functional `Tr(ρ ·)` on the
/// first leg.
pub fn slice_first(x: &CMatrix, rho: &CMatrix, n1: usize, n2: usize) -> CMatrix {
    CMatrix::from_fn(n2, n2, |c, d| {
        let mut s = ZERO;
        for p in 0..n1 {
            for q in 0..n1 {
                s += rho[(q, p)] * x[(p * n2 + c, q * n2 + d)];
            }
        }
        s
    })
}

/// Slice by `Tr(ρ ·)` on the second leg.
pub fn slice_second(x: &CMatrix, rho: &CMatrix, n1: usize, n2: usize) -> CMatrix {
    CMatrix::from_fn(n1, n1, |a, b| {
        let mut s = ZERO;
        for p in 0..n2 {
            for q in 0..n2 {
                s += rho[(q, p)] * x[(a * n2 + p, b * n2 + q)];
            }
        }
        s
    })
}

/// Block `(a, b)` of the first leg: the operator `(ω_{e_b, e_a} ⊗ ι)(X)`.
pub fn first_leg_block(x: &CMatrix, a: usize, b: usize, n2: usize) -> CMatrix {
    x.view((a * n2, b * n2), (n2, n2)).into_owned()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Legs {
    L12,
    L13,
    L23,
}

/// `op_{legs} · x` on `C^n ⊗ C^n ⊗ C^n`, for a two-leg operator `op` on
/// `C^n ⊗ C^n`. Works column by column and skips zero entries of `op`, so it
/// is much cheaper than forming the leg-embedded matrix.
pub fn apply_on_legs(op: &CMatrix, n: usize, legs: Legs, x: &CMatrix) -> CMatrix {
    let n2 = n * n;
    let n3 = n2 * n;
    assert_eq!(op.shape(), (n2, n2));
    assert_eq!(x.nrows(), n3);
    let idx = |p: usize, q: usize, f: usize| match legs {
        Legs::L12 => (p * n + q) * n + f,
        Legs::L13 => (p * n + f) * n + q,
        Legs::L23 => (f * n + p) * n + q,
    };
    let entries: Vec<(usize, usize, usize, usize, Complex64)> = (0..n2)
        .flat_map(|r| (0..n2).map(move |s| (r, s)))
        .filter_map(|(r, s)| {
            let w = op[(r, s)];
            (w.norm_sqr() > 0.0).then_some((r / n, r % n, s / n, s % n, w))
        })
        .collect();
    let mut out = CMatrix::zeros(n3, x.ncols());
    for col in 0..x.ncols() {
        let xin = x.column(col);
        let mut acc = vec![ZERO; n3];
        for &(p, q, p2, q2, w) in &entries {
            for f in 0..n {
                acc[idx(p, q, f)] += w * xin[idx(p2, q2, f)];
            }
        }
        out.set_column(col, &CVector::from_vec(acc));
    }
    out
}

/// `‖W12 W13 W23 − W23 W12‖` (Frobenius) for `W` on `C^n ⊗ C^n`.
pub fn pentagon_residual(w: &CMatrix, n: usize) -> f64 {
    let id = identity(n * n * n);
    let w23 = apply_on_legs(w, n, Legs::L23, &id);
    let lhs = apply_on_legs(w, n, Legs::L12, &apply_on_legs(w, n, Legs::L13, &w23));
    let w12 = apply_on_legs(w, n, Legs::L12, &id);
    let rhs = apply_on_legs(w, n, Legs::L23, &w12);
    (lhs - rhs).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_fn(v.len(), v.len(), |r, c| if r == c { c64(v[r], 0.0) } else { ZERO })
    }

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        assert_eq!(kron(&diag(&[1.0, -1.0]), &identity(2)), diag(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_mixed_product() {
        let mut s = Sampler::new(1);
        let (a, b, c, d) = (s.matrix(3, 3), s.matrix(3, 3), s.matrix(3, 3), s.matrix(3, 3));
        // Oracle: explicit entrywise product of the two Kronecker products.
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        assert!(dist(&lhs, &rhs) <= 1e-12);
        assert_eq!(kron(&a, &b).adjoint(), kron(&a.adjoint(), &b.adjoint()));
    }

    #[test]
    fn herm_eig_cases() {
        let (vals, _) = herm_eig(&identity(3), Tolerance::default()).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
        let (vals, vecs) = herm_eig(&diag(&[3.0, 2.0]), Tolerance::default()).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-15 && (vals[1] - 3.0).abs() < 1e-15);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
        let mut s = Sampler::new(2);
        let h = s.hermitian(6);
        let (vals, u) = herm_eig(&h, Tolerance::default()).unwrap();
        let rec = &u * diag(&vals) * u.adjoint();
        assert!(dist(&rec, &h) <= 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(is_unitary(&u, Tolerance::default()));
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let mut a = identity(2);
        a[(0, 1)] = ONE;
        assert!(matches!(herm_eig(&a, Tolerance::default()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn mat_fn_cases() {
        let tol = Tolerance::default();
        let mut s = Sampler::new(3);
        let a = s.positive_definite(4);
        assert!(dist(&mat_fn(&a, MatFn::Power(ZERO), tol).unwrap(), &identity(4)) <= 1e-12);
        let d = diag(&[0.3, 2.5]);
        let back = mat_fn(&mat_fn(&d, MatFn::Exp, tol).unwrap(), MatFn::Log, tol).unwrap();
        assert!(dist(&back, &d) <= 1e-12);
        let half = mat_fn(&a, MatFn::Power(c64(0.5, 0.0)), tol).unwrap();
        assert!(dist(&(&half * &half), &a) <= 1e-10 * a.norm());
        let u = mat_fn(&a, MatFn::Power(c64(0.0, 0.8)), tol).unwrap();
        assert!(is_unitary(&u, tol));
        let neg = diag(&[1.0, -1.0]);
        assert!(matches!(mat_fn(&neg, MatFn::Log, tol), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn antilinear_basics() {
        let mut s = Sampler::new(4);
        let k = AntilinearOp::new(s.matrix(3, 3)).unwrap();
        let (u, v) = (s.vector(3), s.vector(3));
        // <K♯u, v> = <Kv, u>
        let lhs = v.dotc(&k.sharp().apply(&u));
        let rhs = u.dotc(&k.apply(&v));
        assert!((lhs - rhs).norm() < 1e-12);
        assert_eq!(k.sharp().sharp(), k);
        let l = AntilinearOp::new(s.matrix(3, 3)).unwrap();
        let comp = k.compose(&l);
        assert!((comp * &v - k.apply(&l.apply(&v))).norm() < 1e-12);
        let b = s.matrix(3, 3);
        assert!((k.after(&b).apply(&v) - k.apply(&(&b * &v))).norm() < 1e-12);
        assert!((k.then(&b).apply(&v) - &b * k.apply(&v)).norm() < 1e-12);
    }

    #[test]
    fn polar_of_conjugation_and_scalar() {
        let tol = Tolerance::default();
        let (n, i) = antilinear_polar(&AntilinearOp::conjugation(3), tol).unwrap();
        assert!(dist(&n, &identity(3)) < 1e-14);
        assert!(i.dist(&AntilinearOp::conjugation(3)) < 1e-14);
        let g = AntilinearOp::new(diag(&[2.0])).unwrap();
        let (n, i) = antilinear_polar(&g, tol).unwrap();
        assert!((n[(0, 0)] - c64(4.0, 0.0)).norm() < 1e-14);
        assert!(i.dist(&AntilinearOp::conjugation(1)) < 1e-14);
        let sing = AntilinearOp::new(diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(antilinear_polar(&sing, tol), Err(Error::Singular { .. })));
    }

    #[test]
    fn polar_of_involutive() {
        let tol = Tolerance::default();
        let mut s = Sampler::new(5);
        for _ in 0..5 {
            let g = s.involutive_antilinear(4);
            assert!(dist(&g.square(), &identity(4)) < 1e-10);
            let (n, i) = antilinear_polar(&g, tol).unwrap();
            assert!(dist(&i.square(), &identity(4)) < 1e-10);
            assert!(i.dist(&i.sharp()) < 1e-10);
            let inv = n.clone().try_inverse().unwrap();
            assert!(dist(&i.conjugate_by(&n), &inv) < 1e-9 * inv.norm());
            let half = mat_fn(&n, MatFn::Power(c64(0.5, 0.0)), tol).unwrap();
            assert!(i.after(&half).dist(&g) < 1e-10 * g.mat().norm());
        }
    }

    #[test]
    fn closure_cases() {
        let tol = Tolerance::default();
        assert_eq!(algebra_closure(&[identity(3)], tol).unwrap().len(), 1);
        assert_eq!(algebra_closure(&[diag(&[1.0, 2.0, 3.0])], tol).unwrap().len(), 3);
        let mut s = Sampler::new(6);
        let full = algebra_closure(&[s.matrix(3, 3), s.matrix(3, 3)], tol).unwrap();
        assert_eq!(full.len(), 9);
        // idempotent
        assert_eq!(algebra_closure(&full, tol).unwrap().len(), 9);
        // rotated orthogonal projections multiply to rounding noise
        let (_, q) = herm_eig(&s.hermitian(4), tol).unwrap();
        let proj: Vec<CMatrix> = (0..4).map(|k| q.column(k) * q.column(k).adjoint()).collect();
        assert_eq!(algebra_closure(&proj, tol).unwrap().len(), 4);
    }

    #[test]
    fn commutant_cases() {
        let tol = Tolerance::default();
        assert_eq!(commutant(&[identity(3)], 3, tol).unwrap().len(), 9);
        let mut s = Sampler::new(7);
        let full = algebra_closure(&[s.matrix(3, 3), s.matrix(3, 3)], tol).unwrap();
        assert_eq!(commutant(&full, 3, tol).unwrap().len(), 1);
        let d3 = algebra_closure(&[diag(&[1.0, 2.0, 3.0])], tol).unwrap();
        let dc = commutant(&d3, 3, tol).unwrap();
        assert!(subspace_equal(&dc, &d3, tol));
        let dd = commutant(&dc, 3, tol).unwrap();
        assert!(subspace_equal(&dd, &d3, tol));
    }

    #[test]
    fn double_commutant_of_block_algebra() {
        let tol = Tolerance::default();
        let mut s = Sampler::new(8);
        // C ⊕ M_2 embedded in M_3
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 0)] = ONE;
        let b = s.matrix(2, 2);
        let mut bb = CMatrix::zeros(3, 3);
        bb.view_mut((1, 1), (2, 2)).copy_from(&b);
        let alg = algebra_closure(&[a, bb], tol).unwrap();
        assert_eq!(alg.len(), 5);
        let comm = commutant(&alg, 3, tol).unwrap();
        assert_eq!(comm.len(), 2);
        assert!(subspace_equal(&commutant(&comm, 3, tol).unwrap(), &alg, tol));
    }

    #[test]
    fn subspace_predicates() {
        let tol = Tolerance::default();
        let e = |k: usize| CMatrix::from_fn(2, 1, |r, _| if r == k { ONE } else { ZERO });
        assert!(subspace_equal(&[e(0), e(1)], &[e(1), e(0)], tol));
        assert!(!subspace_equal(&[e(0)], &[e(1)], tol));
        assert_eq!(intersection_dim(&[e(0), e(1)], &[e(1)], tol), 1);
    }

    #[test]
    fn span_coords_tensor_roundtrip() {
        let tol = Tolerance::default();
        let mut s = Sampler::new(9);
        let left: Vec<CMatrix> = (0..3).map(|_| s.matrix(2, 2)).collect();
        let right: Vec<CMatrix> = (0..2).map(|_| s.matrix(3, 3)).collect();
        let (l, r) = (SpanCoords::new(&left, tol).unwrap(), SpanCoords::new(&right, tol).unwrap());
        let c = s.matrix(3, 2);
        let x = l.tensor_combine(&r, &c);
        let mut direct = CMatrix::zeros(6, 6);
        for i in 0..3 {
            for j in 0..2 {
                direct += kron(&left[i], &right[j]) * c[(i, j)];
            }
        }
        assert!(dist(&x, &direct) < 1e-12);
        let (back, res) = l.tensor_coords(&r, &x);
        assert!(res < 1e-12 && dist(&back, &c) < 1e-10);
    }

    #[test]
    fn flip_and_legs() {
        let mut s = Sampler::new(10);
        let (a, b) = (s.matrix(2, 2), s.matrix(3, 3));
        let x = kron(&a, &b);
        let f = flip(2, 3);
        assert!(dist(&flip_conj(&x, 2, 3), &kron(&b, &a)) < 1e-14);
        assert!(dist(&(&f * &x * f.adjoint()), &kron(&b, &a)) < 1e-14);
        let w = s.matrix(4, 4);
        let id = identity(8);
        let w12 = kron(&w, &identity(2));
        let w23 = kron(&identity(2), &w);
        let s23 = kron(&identity(2), &flip(2, 2));
        let w13 = &s23 * &w12 * &s23;
        assert!(dist(&apply_on_legs(&w, 2, Legs::L12, &id), &w12) < 1e-14);
        assert!(dist(&apply_on_legs(&w, 2, Legs::L23, &id), &w23) < 1e-14);
        assert!(dist(&apply_on_legs(&w, 2, Legs::L13, &id), &w13) < 1e-14);
        let y = s.matrix(8, 8);
        let ((rho, n1), n2) = ((s.matrix(2, 2), 2), 3);
        let z = s.matrix(6, 6);
        let sl = slice_first(&z, &rho, n1, n2);
        let expected = CMatrix::from_fn(3, 3, |c, d| {
            let mut acc = ZERO;
            for p in 0..2 {
                for q in 0..2 {
                    acc += rho[(q, p)] * z[(p * 3 + c, q * 3 + d)];
                }
            }
            acc
        });
        assert!(dist(&sl, &expected) < 1e-14);
        let _ = y;
    }

    #[test]
    fn density_check_trace_inner() {
        let mut s = Sampler::new(11);
        let (a, b) = (s.matrix(3, 3), s.matrix(3, 3));
        let tr = (b.adjoint() * &a).trace();
        assert!((trace_inner(&a, &b) - tr).norm() < 1e-12);
    }
}
