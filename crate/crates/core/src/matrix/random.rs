//! Seeded random matrices and vectors.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, C64};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian sample (independent real and imaginary parts).
pub fn gaussian<R: Rng + ?Sized>(r: &mut R) -> C64 {
    C64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, r: &mut R) -> ComplexMatrix {
    let entries: Vec<C64> = (0..n * n).map(|_| gaussian(r)).collect();
    ComplexMatrix::new(DMatrix::from_vec(n, n, entries)).expect("finite samples")
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, r: &mut R) -> DVector<C64> {
    DVector::from_fn(n, |_, _| gaussian(r))
}

/// Real Gaussian vector stored as complex.
pub fn real_gaussian_vector<R: Rng + ?Sized>(n: usize, r: &mut R) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(r.sample(StandardNormal), 0.0))
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of R's
/// diagonal folded into Q.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, r: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, r).into_inner();
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..n {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    ComplexMatrix::new(q).expect("finite unitary")
}
