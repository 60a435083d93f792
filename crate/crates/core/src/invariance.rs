//! Operator valued slices of the Haar weights and the strengthened left
//! invariance `(ι⊗ι⊗φ)(ι⊗Δ)(X) = (ι⊗φ)(X) ⊗ 1` for `X ∈ B(C^k) ⊗ M`.

use crate::analysis::Analysis;
use crate::builders::{slice_left, slice_right};
use crate::error::{Error, Result};
use crate::numlin::{self, kron, CMatrix};
use crate::report::VerificationReport;
use crate::sampling::Sampler;
use crate::star_algebra::{density_wrt_trace, Functional};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    /// `(φ ⊗ ι)` on `H ⊗ K`.
    First,
    /// `(ι ⊗ φ)` on `K ⊗ H`.
    Last,
}

/// A functional on `π(M)` applied to one tensor leg, through its density
/// with respect to the trace of `H`.
#[derive(Clone, Debug)]
pub struct SlicedWeight {
    pub leg: Leg,
    pub density: CMatrix,
}

impl SlicedWeight {
    pub fn new(a: &Analysis, f: &Functional, leg: Leg) -> Result<Self> {
        let values: Vec<_> = f.coeffs.iter().copied().collect();
        Ok(SlicedWeight { leg, density: density_wrt_trace(a.pi(), &values, a.tol)? })
    }

    pub fn hdim(&self) -> usize {
        self.density.nrows()
    }
}

pub fn slice_weight(x: &CMatrix, sw: &SlicedWeight) -> Result<CMatrix> {
    let n = sw.hdim();
    if !x.is_square() || !x.nrows().is_multiple_of(n) {
        return Err(Error::DimensionMismatch { expected: n, got: x.nrows() });
    }
    let k = x.nrows() / n;
    Ok(match sw.leg {
        Leg::First => numlin::slice_first(x, &sw.density, n, k),
        Leg::Last => numlin::slice_second(x, &sw.density, k, n),
    })
}

/// Applies `b ↦ U b U*` to every `n × n`-block `(I ⊗ b)` or `(b ⊗ I)` of a
/// matrix on `K ⊗ H`, giving a matrix on `K ⊗ H ⊗ H`.
fn blockwise(x: &CMatrix, k: usize, n: usize, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let m = n * n;
    let mut out = CMatrix::zeros(k * m, k * m);
    for a in 0..k {
        for b in 0..k {
            let block = f(&x.view((a * n, b * n), (n, n)).into_owned());
            out.view_mut((a * m, b * m), (m, m)).copy_from(&block);
        }
    }
    out
}

/// `(ι ⊗ Δ)(X) = (1 ⊗ W*) X_{13} (1 ⊗ W)`.
pub fn iota_delta(a: &Analysis, x: &CMatrix, k: usize) -> CMatrix {
    let n = a.dim();
    let id = numlin::identity(n);
    blockwise(x, k, n, |b| a.w.adjoint() * kron(&id, b) * &a.w)
}

/// Residual of the strengthened invariance for one `X`, relative to `‖X‖`.
pub fn invariance_residual(a: &Analysis, phi: &SlicedWeight, x: &CMatrix, k: usize) -> f64 {
    let n = a.dim();
    let lhs = numlin::slice_second(&iota_delta(a, x, k), &phi.density, k * n, n);
    let rhs = kron(&numlin::slice_second(x, &phi.density, k, n), &numlin::identity(n));
    (lhs - rhs).norm() / x.norm().max(1e-300)
}

/// `Y*Y` with `Y ∈ B(C^k) ⊗ π(M)` Gaussian.
pub fn sample_positive(s: &mut Sampler, a: &Analysis, k: usize) -> CMatrix {
    let n = a.dim();
    let mut y = CMatrix::zeros(k * n, k * n);
    for i in 0..k {
        for j in 0..k {
            let block = s.combination(a.pi());
            y.view_mut((i * n, j * n), (n, n)).copy_from(&block);
        }
    }
    y.adjoint() * y
}

/// `T(z) = (ι⊗ι⊗φ)((1 ⊗ V)(z ⊗ 1)(1 ⊗ V*))`, defined for every `z` on `K ⊗ H`.
pub fn t_map(a: &Analysis, phi: &SlicedWeight, z: &CMatrix, k: usize) -> CMatrix {
    let n = a.dim();
    let id = numlin::identity(n);
    let inner = blockwise(z, k, n, |b| &a.v * kron(b, &id) * a.v.adjoint());
    numlin::slice_second(&inner, &phi.density, k * n, n)
}

/// `(ω ⊗ ι)(W)` over matrix units `ω`, spanning `M̂`.
pub fn dual_slices(a: &Analysis) -> Vec<CMatrix> {
    let n = a.dim();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(j, i)] = numlin::ONE;
            out.push(numlin::slice_first(&a.w, &e, n, n));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct InvarianceConfig {
    pub kdims: Vec<usize>,
    pub batch: usize,
    pub seed: u64,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        InvarianceConfig { kdims: vec![1, 2, 3], batch: 20, seed: 2024 }
    }
}

pub fn strong_invariance_suite(a: &Analysis, cfg: &InvarianceConfig) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let n = a.dim();
    let anchor = "(ι⊗ι⊗φ)(ι⊗Δ)(X) = (ι⊗φ)(X) ⊗ 1";
    let phi = match SlicedWeight::new(a, a.phi(), Leg::Last) {
        Ok(p) => p,
        Err(e) => {
            rep.skip("invariance", anchor, e.to_string());
            return rep;
        }
    };
    let mut s = Sampler::new(cfg.seed);
    let hat_commutant = numlin::commutant(&dual_slices(a), n, a.tol).unwrap_or_default();
    for &k in &cfg.kdims {
        let t = a.tol.effective(k * n * n);
        let mut worst = 0.0f64;
        let mut min_eig = f64::INFINITY;
        for _ in 0..cfg.batch {
            let x = sample_positive(&mut s, a, k);
            worst = worst.max(invariance_residual(a, &phi, &x, k));
            let sliced = numlin::slice_second(&x, &phi.density, k, n);
            if let Ok((vals, _)) = numlin::herm_eig(&sliced, a.tol) {
                min_eig = min_eig.min(vals[0] / sliced.norm().max(1e-300));
            }
        }
        rep.check_noted(format!("invariance.k{k}"), anchor, worst, t, format!("{} samples", cfg.batch));
        rep.check(format!("slice.positive.k{k}"), "(ι⊗φ)(X) ≥ 0 for X ≥ 0", (-min_eig).max(0.0), a.tol.effective(k));

        // P_η: T(P_η) ∈ B(K) ⊗ M̂ for rank one P_η on K ⊗ H, so on B(K) ⊗ M the
        // map T lands in B(K) ⊗ (M ∩ M̂) = B(K) ⊗ C
        let mut member = 0.0f64;
        let id_k = numlin::identity(k);
        for _ in 0..cfg.batch {
            let eta = s.vector(k * n);
            let eta = &eta / numlin::c64(eta.norm(), 0.0);
            let p = &eta * eta.adjoint();
            let tp = t_map(a, &phi, &p, k);
            for c in &hat_commutant {
                member = member.max(numlin::commutator(&tp, &kron(&id_k, c)).norm());
            }
        }
        rep.check(format!("invariance.p_eta.k{k}"), "T(P_η) ∈ B(K) ⊗ M̂", member, t);
        let x = sample_positive(&mut s, a, k);
        let via_v = t_map(a, &phi, &x, k);
        let via_w = numlin::slice_second(&iota_delta(a, &x, k), &phi.density, k * n, n);
        rep.check(
            format!("invariance.t_map.k{k}"),
            "T(X) = (ι⊗ι⊗φ)(ι⊗Δ)(X) on B(K) ⊗ M",
            (via_v - via_w).norm() / x.norm(),
            t,
        );
    }

    let alg = &a.qg.alg;
    let unit = alg.unit();
    let mut left = 0.0f64;
    let mut right = 0.0f64;
    for x in 0..n {
        let dx = a.qg.comul.column(x).into_owned();
        let l = slice_right(&dx, a.phi(), n) - unit * a.phi().coeffs[x];
        let r = slice_left(&dx, &a.psi, n) - unit * a.psi.coeffs[x];
        left = left.max(l.norm());
        right = right.max(r.norm());
    }
    let t = a.tol.effective(n);
    rep.check("invariance.basis_left", "(ι⊗φ)Δ(x) = φ(x)1", left, t);
    rep.check("invariance.basis_right", "(ψ⊗ι)Δ(x) = ψ(x)1", right, t);
    let one = numlin::slice_second(&numlin::identity(n), &phi.density, 1, n);
    let phi_one = a.phi().eval(unit);
    rep.check("invariance.unit", "(ι⊗φ)(1⊗1) = φ(1)1", (one[(0, 0)] - phi_one).norm(), t);

    // (ι⊗ω)((φ⊗ι)(X)) = φ((ι⊗ω)(X)) on random X and ω = Tr(ρ ·)
    let first = SlicedWeight { leg: Leg::First, density: phi.density.clone() };
    let mut worst = 0.0f64;
    for _ in 0..cfg.batch.max(1) {
        let k = 2;
        let x = s.matrix(n * k, n * k);
        let rho = s.matrix(k, k);
        let sliced = slice_weight(&x, &first).expect("square");
        let lhs = (&rho * sliced).trace();
        let rhs = (&phi.density * numlin::slice_second(&x, &rho, n, k)).trace();
        worst = worst.max((lhs - rhs).norm() / x.norm());
    }
    rep.check("slice.external_leg", "ω((φ⊗ι)(X)) = φ((ι⊗ω)(X))", worst, t);
    rep
}
