//! Seeded random operator and state generators for tests and experiments.
//!
//! Determinism contract: all generators draw from a ChaCha8 stream seeded
//! with `seed_from_u64`, mapped to standard normals by the Box–Muller
//! transform, so a fixed seed reproduces the same instance on every
//! platform.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::ComplexMatrix;
use crate::operator::{DensityMatrix, HermitianOperator};

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; 1 - u keeps the argument of ln strictly positive.
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random::<f64>();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

/// Square matrix with independent standard-normal complex entries.
fn ginibre(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng))
}

/// GUE sample `(G + G†)/2` with standard-normal complex entries.
pub fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(dim, &mut rng);
    let herm = (&g + g.adjoint()).scale(0.5);
    HermitianOperator::symmetrized(ComplexMatrix::from_dmatrix(herm).expect("finite by construction"))
}

/// Ginibre density matrix `GG† / tr(GG†)`.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(dim, &mut rng);
    let gg = &g * g.adjoint();
    let trace = gg.trace().re;
    let matrix = ComplexMatrix::from_dmatrix(gg.scale(1.0 / trace)).expect("finite by construction");
    DensityMatrix::new(matrix).expect("Ginibre construction is positive with unit trace")
}

/// Pure state |ψ⟩⟨ψ| from a normalized complex Gaussian vector.
pub fn random_pure_state(dim: usize, seed: u64) -> DensityMatrix {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitudes: Vec<Complex64> = (0..dim).map(|_| complex_normal(&mut rng)).collect();
    DensityMatrix::from_pure(&amplitudes).expect("Gaussian vector is nonzero almost surely")
}
