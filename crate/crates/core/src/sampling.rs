//! Seeded random matrices and functionals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numlin::{c64, identity, AntilinearOp, CMatrix, CVector};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn real(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn complex(&mut self) -> num_complex::Complex64 {
        let (re, im) = (self.real(), self.real());
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Matrix with independent standard complex Gaussian entries.
    pub fn matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.complex())
    }

    pub fn vector(&mut self, n: usize) -> CVector {
        CVector::from_fn(n, |_, _| self.complex())
    }

    pub fn hermitian(&mut self, n: usize) -> CMatrix {
        let a = self.matrix(n, n);
        (&a + a.adjoint()) * c64(0.5, 0.0)
    }

    pub fn positive_definite(&mut self, n: usize) -> CMatrix {
        let a = self.matrix(n, n);
        a.adjoint() * a + identity(n) * c64(0.1, 0.0)
    }

    /// `X ∘ C ∘ X^{-1}` for a random invertible `X`, which squares to one.
    pub fn involutive_antilinear(&mut self, n: usize) -> AntilinearOp {
        loop {
            let x = self.matrix(n, n) + identity(n);
            if let Some(inv) = x.clone().try_inverse() {
                return AntilinearOp::new(x * inv.conjugate()).expect("square");
            }
        }
    }

    pub fn combination(&mut self, basis: &[CMatrix]) -> CMatrix {
        let mut out = CMatrix::zeros(basis[0].nrows(), basis[0].ncols());
        for b in basis {
            out += b * self.complex();
        }
        out
    }
}
