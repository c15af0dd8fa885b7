//! Bipartite composite observables: sums and tensor products of local
//! operators, their closed-form channel actions, the kernel-projector
//! signalling predicate, the two-stage decomposition, and the built-in
//! two-qubit scenario.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{commutator, ket_bra, pauli_x, pauli_z, tensor, ComplexMatrix};
use crate::measurement::{build_channel, conjugate_observable, MeasurementResolution};
use crate::operator::{CompositeStructure, DensityMatrix, HermitianOperator};
use crate::random::random_hermitian;
use crate::signalling::Scenario;
use crate::spectral::{hermitian_eigen_raw, spectral_decompose, SpectralDecomposition};
use crate::tol::{self, TAU_EIG_DEFAULT};

/// A pair of local observables C_A and C_B on the two factors of a
/// bipartite system.
#[derive(Clone, Debug)]
pub struct LocalPair {
    c_a: HermitianOperator,
    c_b: HermitianOperator,
}

impl LocalPair {
    pub fn new(c_a: HermitianOperator, c_b: HermitianOperator) -> Result<Self> {
        Ok(Self { c_a, c_b })
    }

    pub fn c_a(&self) -> &HermitianOperator {
        &self.c_a
    }

    pub fn c_b(&self) -> &HermitianOperator {
        &self.c_b
    }

    pub fn dim_a(&self) -> usize {
        self.c_a.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.c_b.dim()
    }

    /// The pair with the roles of the two factors exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            c_a: self.c_b.clone(),
            c_b: self.c_a.clone(),
        }
    }

    pub fn structure(&self) -> CompositeStructure {
        CompositeStructure::new(vec![self.dim_a(), self.dim_b()])
            .expect("two positive factors")
    }
}

/// C_A ⊗ 𝟙 + 𝟙 ⊗ C_B.
pub fn sum_local(pair: &LocalPair) -> Result<HermitianOperator> {
    let left = tensor(pair.c_a.matrix(), &ComplexMatrix::identity(pair.dim_b()))?;
    let right = tensor(&ComplexMatrix::identity(pair.dim_a()), pair.c_b.matrix())?;
    Ok(HermitianOperator::symmetrized(&left + &right))
}

/// C_A ⊗ C_B.
pub fn tensor_local(pair: &LocalPair) -> Result<HermitianOperator> {
    Ok(HermitianOperator::symmetrized(tensor(
        pair.c_a.matrix(),
        pair.c_b.matrix(),
    )?))
}

/// Kernel projector of a local decomposition, or the zero matrix when the
/// operator has no kernel.
fn kernel_or_zero(decomposition: &SpectralDecomposition, dim: usize) -> ComplexMatrix {
    decomposition
        .kernel_projector()
        .map(|p| p.matrix().clone())
        .unwrap_or_else(|| ComplexMatrix::zeros(dim))
}

/// Projector onto the kernel of C_A ⊗ C_B:
/// `E_A⁰ ⊗ 𝟙 + (𝟙 − E_A⁰) ⊗ E_B⁰`, with absent kernels as zero matrices.
pub fn product_kernel_projector(pair: &LocalPair) -> Result<HermitianOperator> {
    let dec_a = spectral_decompose(&pair.c_a, TAU_EIG_DEFAULT)?;
    let dec_b = spectral_decompose(&pair.c_b, TAU_EIG_DEFAULT)?;
    let e_a0 = kernel_or_zero(&dec_a, pair.dim_a());
    let e_b0 = kernel_or_zero(&dec_b, pair.dim_b());
    let e_a0_perp = &ComplexMatrix::identity(pair.dim_a()) - &e_a0;
    let term1 = tensor(&e_a0, &ComplexMatrix::identity(pair.dim_b()))?;
    let term2 = tensor(&e_a0_perp, &e_b0)?;
    Ok(HermitianOperator::symmetrized(&term1 + &term2))
}

/// ℰ_{C} at perfect resolution applied to a local observable.
fn perfect_action(c: &HermitianOperator, observable: &HermitianOperator) -> Result<HermitianOperator> {
    let channel = build_channel(c, &MeasurementResolution::Perfect, TAU_EIG_DEFAULT)?;
    conjugate_observable(&channel, observable)
}

/// Closed form for the sum observable: ℰ_{sum}(𝟙 ⊗ O_B) = 𝟙_A ⊗ ℰ_{C_B}(O_B).
pub fn closed_form_sum_channel(
    pair: &LocalPair,
    o_b: &HermitianOperator,
) -> Result<HermitianOperator> {
    if o_b.dim() != pair.dim_b() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim_b(),
            got: o_b.dim(),
        });
    }
    let dressed = perfect_action(&pair.c_b, o_b)?;
    Ok(HermitianOperator::symmetrized(tensor(
        &ComplexMatrix::identity(pair.dim_a()),
        dressed.matrix(),
    )?))
}

/// Mirrored closed form: ℰ_{sum}(O_A ⊗ 𝟙) = ℰ_{C_A}(O_A) ⊗ 𝟙_B.
pub fn closed_form_sum_channel_sender(
    pair: &LocalPair,
    o_a: &HermitianOperator,
) -> Result<HermitianOperator> {
    if o_a.dim() != pair.dim_a() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim_a(),
            got: o_a.dim(),
        });
    }
    let dressed = perfect_action(&pair.c_a, o_a)?;
    Ok(HermitianOperator::symmetrized(tensor(
        dressed.matrix(),
        &ComplexMatrix::identity(pair.dim_b()),
    )?))
}

/// Nonzero eigenvalues of a decomposition (every cluster but the kernel).
fn nonzero_eigenvalues(decomposition: &SpectralDecomposition) -> Vec<f64> {
    decomposition
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != decomposition.zero_index())
        .map(|(_, &v)| v)
        .collect()
}

/// Closed form for the product observable:
/// ℰ_{C_A⊗C_B}(𝟙 ⊗ O_B) = E_A⁰ ⊗ O_B + (𝟙 − E_A⁰) ⊗ ℰ_{C_B}(O_B).
///
/// Applicable only when the nonzero eigenvalue products μ_A μ_B are pairwise
/// distinct and separated from zero at the clustering scale of C_A ⊗ C_B;
/// collisions are reported as `ProductDegeneracy`.
pub fn closed_form_product_channel(
    pair: &LocalPair,
    o_b: &HermitianOperator,
) -> Result<HermitianOperator> {
    if o_b.dim() != pair.dim_b() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim_b(),
            got: o_b.dim(),
        });
    }
    let dec_a = spectral_decompose(&pair.c_a, TAU_EIG_DEFAULT)?;
    let dec_b = spectral_decompose(&pair.c_b, TAU_EIG_DEFAULT)?;

    let products: Vec<f64> = nonzero_eigenvalues(&dec_a)
        .iter()
        .flat_map(|&a| nonzero_eigenvalues(&dec_b).iter().map(move |&b| a * b).collect::<Vec<_>>())
        .collect();
    let scale = products.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let gap = TAU_EIG_DEFAULT * scale.max(1.0);
    for (i, p) in products.iter().enumerate() {
        if p.abs() <= gap {
            return Err(Error::ProductDegeneracy {
                reason: format!("nonzero eigenvalue product {p:.3e} collides with the kernel"),
            });
        }
        for q in products.iter().skip(i + 1) {
            if (p - q).abs() <= 1e-9 * scale.max(1.0) {
                return Err(Error::ProductDegeneracy {
                    reason: format!("distinct index pairs share the product value {p:.6e}"),
                });
            }
        }
    }

    let e_a0 = kernel_or_zero(&dec_a, pair.dim_a());
    let e_a0_perp = &ComplexMatrix::identity(pair.dim_a()) - &e_a0;
    let dressed = perfect_action(&pair.c_b, o_b)?;
    let term1 = tensor(&e_a0, o_b.matrix())?;
    let term2 = tensor(&e_a0_perp, dressed.matrix())?;
    Ok(HermitianOperator::symmetrized(&term1 + &term2))
}

/// Does measuring C_A ⊗ C_B at perfect resolution signal for the given local
/// pair (O_A, O_B)? True iff the kernel projector of C_A fails to commute
/// with O_A and ℰ_{C_B} acts non-trivially on O_B, per the factorized
/// commutator `[ℰ(O₃), O₁] = [E_A⁰, O_A] ⊗ (O_B − ℰ_{C_B}(O_B))`.
pub fn product_signals(
    pair: &LocalPair,
    o_a: &HermitianOperator,
    o_b: &HermitianOperator,
) -> Result<bool> {
    if o_a.dim() != pair.dim_a() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim_a(),
            got: o_a.dim(),
        });
    }
    if o_b.dim() != pair.dim_b() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim_b(),
            got: o_b.dim(),
        });
    }
    let dec_a = spectral_decompose(&pair.c_a, TAU_EIG_DEFAULT)?;
    let e_a0 = kernel_or_zero(&dec_a, pair.dim_a());
    let kernel_term = commutator(&e_a0, o_a.matrix())?.frobenius_norm();
    let dressed = perfect_action(&pair.c_b, o_b)?;
    let action_term = (o_b.matrix() - dressed.matrix()).frobenius_norm();

    let tau_kernel =
        tol::COMM_SCALE_DEFAULT * (1.0 + e_a0.frobenius_norm() * o_a.frobenius_norm());
    let tau_action = tol::COMM_SCALE_DEFAULT * (1.0 + o_b.frobenius_norm());
    Ok(kernel_term > tau_kernel && action_term > tau_action)
}

/// The paper channel for O₂ = |1⟩⟨1| ⊗ σᶻ realized as two explicit stages:
/// measure the z-spin of qubit A non-selectively, then measure the z-spin of
/// qubit B non-selectively on the spin-up branch only, and reassemble.
pub fn two_stage_apply(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let id2 = ComplexMatrix::identity(2);
    let a_down = tensor(&ket_bra(2, 0, 0), &id2)?;
    let a_up = tensor(&ket_bra(2, 1, 1), &id2)?;

    // stage i: non-selective z measurement on qubit A
    let stage1 = &(&(&a_down * rho.matrix()) * &a_down) + &(&(&a_up * rho.matrix()) * &a_up);

    // stage ii: on the up branch, non-selective z measurement on qubit B
    let up_branch = &(&a_up * &stage1) * &a_up;
    let down_branch = &(&a_down * &stage1) * &a_down;
    let mut measured_up = ComplexMatrix::zeros(4);
    for b in 0..2 {
        let b_proj = tensor(&id2, &ket_bra(2, b, b))?;
        measured_up = &measured_up + &(&(&b_proj * &up_branch) * &b_proj);
    }
    DensityMatrix::new(&down_branch + &measured_up)
}

/// The built-in two-qubit scenario: ρ₀ = |0⟩⊗(|0⟩+|1⟩)/√2, O₁ = σˣ on the
/// sender, O₂ = |1⟩⟨1| ⊗ σᶻ at perfect resolution, O₃ = σˣ on the receiver.
pub fn paper_scenario() -> Scenario {
    let structure = CompositeStructure::new(vec![2, 2]).expect("two qubits");
    let sx = HermitianOperator::new(pauli_x()).expect("Pauli x is Hermitian");
    let o2 = HermitianOperator::new(
        tensor(&ket_bra(2, 1, 1), &pauli_z()).expect("4x4 product"),
    )
    .expect("product of Hermitian diagonals");
    let rho0 = DensityMatrix::from_pure(&[
        Complex64::ONE,
        Complex64::ONE,
        Complex64::ZERO,
        Complex64::ZERO,
    ])
    .expect("normalized two-qubit product state");
    Scenario::new(
        structure,
        vec![0],
        vec![1],
        sx.clone(),
        o2,
        MeasurementResolution::Perfect,
        sx,
        rho0,
    )
    .expect("the built-in scenario is statically valid")
}

fn spectrum(op: &HermitianOperator) -> Result<Vec<f64>> {
    Ok(hermitian_eigen_raw(op.matrix())?.values)
}

/// All pairwise gaps of `values` and of their images under `combine` must
/// exceed `min_gap`.
fn well_separated(values: &[f64], min_gap: f64) -> bool {
    values
        .iter()
        .enumerate()
        .all(|(i, a)| values.iter().skip(i + 1).all(|b| (a - b).abs() > min_gap))
}

/// Random local pair with non-degenerate local spectra and no accidental
/// sum or product coincidences within 1e-6, optionally with an exact
/// one-dimensional kernel on either factor. Rejection sampling over the
/// seed keeps the construction deterministic.
pub fn random_local_pair_with_kernel(
    dim_a: usize,
    dim_b: usize,
    kernel_a: bool,
    kernel_b: bool,
    seed: u64,
) -> LocalPair {
    const MIN_GAP: f64 = 1e-6;
    let mut attempt = 0u64;
    loop {
        let candidate_seed = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        attempt += 1;
        let c_a = sample_local(dim_a, kernel_a, candidate_seed);
        let c_b = sample_local(dim_b, kernel_b, candidate_seed ^ 0x5bd1_e995);

        let (Ok(spec_a), Ok(spec_b)) = (spectrum(&c_a), spectrum(&c_b)) else {
            continue;
        };
        if !well_separated(&spec_a, MIN_GAP) || !well_separated(&spec_b, MIN_GAP) {
            continue;
        }
        let sums: Vec<f64> = spec_a
            .iter()
            .flat_map(|a| spec_b.iter().map(move |b| a + b))
            .collect();
        let products: Vec<f64> = spec_a
            .iter()
            .flat_map(|a| spec_b.iter().map(move |b| a * b))
            .collect();
        if !well_separated(&sums, MIN_GAP) {
            continue;
        }
        // products of nonzero eigenvalues must stay distinct and clear of 0
        let nonzero_products: Vec<f64> = products.iter().copied().filter(|p| *p != 0.0).collect();
        if !well_separated(&nonzero_products, MIN_GAP)
            || nonzero_products.iter().any(|p| p.abs() <= MIN_GAP)
        {
            continue;
        }
        return LocalPair { c_a, c_b };
    }
}

/// Random local pair with non-degenerate spectra and no sum/product
/// coincidences; see `random_local_pair_with_kernel`.
pub fn random_local_pair(dim_a: usize, dim_b: usize, seed: u64) -> LocalPair {
    random_local_pair_with_kernel(dim_a, dim_b, false, false, seed)
}

/// One local factor: random eigenvectors with eigenvalues drawn away from
/// zero, optionally forcing an exact zero eigenvalue.
fn sample_local(dim: usize, kernel: bool, seed: u64) -> HermitianOperator {
    let vectors = hermitian_eigen_raw(random_hermitian(dim, seed).matrix())
        .expect("GUE samples are well-conditioned")
        .vectors;
    let mut rng_values: Vec<f64> = {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabcd_ef01);
        (0..dim)
            .map(|_| {
                let magnitude = 0.3 + 1.7 * rng.random::<f64>();
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            })
            .collect()
    };
    if kernel {
        rng_values[0] = 0.0;
    }
    let mut matrix = ComplexMatrix::zeros(dim).into_dmatrix();
    for (k, &value) in rng_values.iter().enumerate() {
        let v = vectors.column(k);
        matrix += (&v * v.adjoint()) * Complex64::new(value, 0.0);
    }
    HermitianOperator::symmetrized(
        ComplexMatrix::from_dmatrix(matrix).expect("finite by construction"),
    )
}
