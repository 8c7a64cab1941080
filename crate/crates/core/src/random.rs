//! Random fixtures: Haar-like states and unitaries, Hermitian and density matrices.
//!
//! Used by the test suites and by the CLI's self-checks; nothing here is
//! needed by the measurement or channel machinery itself.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::ComplexMatrix;
use crate::states::{DensityState, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    (0..dim).map(|_| gaussian(rng)).collect()
}

/// Unit vector with i.i.d. complex Gaussian direction (Haar distributed).
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PureState {
    PureState::renormalized(random_vector(1 << n, rng)).expect("nonzero gaussian vector")
}

/// Gaussian matrix with complex standard-normal entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::new(rows, cols, random_vector(rows * cols, rng)).expect("shape")
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    random_matrix(dim, dim, rng).hermitian_part()
}

/// `A†A` for a Gaussian `A`.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let a = random_matrix(dim, dim, rng);
    &a.dagger() * &a
}

/// Full-rank mixed state `A†A / tr(A†A)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityState {
    let m = random_psd(1 << n, rng);
    let tr = m.trace().expect("square").re;
    DensityState::new(m.scale_real(1.0 / tr)).expect("valid density")
}

/// Orthonormal basis from Gram–Schmidt on Gaussian vectors; the columns of a Haar unitary.
pub fn random_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v = random_vector(dim, rng);
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let proj: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    basis
}

/// Haar-random unitary whose columns are [`random_basis`].
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let basis = random_basis(dim, rng);
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (c, v) in basis.iter().enumerate() {
        for (r, &x) in v.iter().enumerate() {
            u.set(r, c, x);
        }
    }
    u
}

/// Random probability vector of length `k`.
pub fn random_probabilities<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Random Kraus set `{K_y}` on `dim` built from an isometry.
pub fn random_kraus<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let u = random_unitary(dim * count, rng);
    (0..count).map(|y| u.block(y * dim, 0, dim, dim)).collect()
}
