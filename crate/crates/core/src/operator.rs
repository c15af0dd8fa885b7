//! Hermitian operators, density matrices, composite-system structure, local
//! embeddings, and Hermitian operator bases.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::{max_total_dim, spectral, tol};

/// A validated Hermitian operator: ‖M − M†‖_F ≤ τ_herm · max(1, ‖M‖_F).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    pub(crate) matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        let tolerance = tol::TAU_HERM * matrix.frobenius_norm().max(1.0);
        if defect > tolerance {
            return Err(Error::NotHermitian { defect, tolerance });
        }
        Ok(Self { matrix })
    }

    /// Force Hermiticity by replacing `M` with `(M + M†)/2`.
    pub fn symmetrized(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.symmetrized(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// within the documented tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub(crate) matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        let herm_tol = tol::TAU_HERM * matrix.frobenius_norm().max(1.0);
        if defect > herm_tol {
            return Err(Error::NotDensity {
                reason: format!("not Hermitian (defect {defect:.3e})"),
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol::TAU_TRACE || trace.im.abs() > tol::TAU_TRACE {
            return Err(Error::NotDensity {
                reason: format!("trace {} is not 1", trace),
            });
        }
        let eigen = spectral::hermitian_eigen_raw(&matrix)?;
        let min_eig = eigen.values[0];
        if min_eig < -tol::TAU_POSITIVITY {
            return Err(Error::NotDensity {
                reason: format!("negative eigenvalue {min_eig:.3e}"),
            });
        }
        Ok(Self { matrix })
    }

    /// Rank-1 state |ψ⟩⟨ψ| from (unnormalized) amplitudes.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if amplitudes.is_empty() || norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::NotDensity {
                reason: "state vector must be nonzero and finite".into(),
            });
        }
        let matrix = ComplexMatrix::from_fn(amplitudes.len(), |r, c| {
            amplitudes[r] * amplitudes[c].conj() / norm_sq
        })?;
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scaled(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// tr(ρ O) for a Hermitian observable; real up to rounding.
    pub fn expectation_value(&self, observable: &HermitianOperator) -> Result<f64> {
        if self.dim() != observable.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: observable.dim(),
            });
        }
        Ok((&self.matrix * observable.matrix()).trace().re)
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Ordered tensor-factor layout of the composite Hilbert space, with the
/// first factor on the most significant index.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeStructure {
    factor_dims: Vec<usize>,
    total_dim: usize,
}

impl CompositeStructure {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidFactorSubset {
                reason: "at least one factor is required".into(),
            });
        }
        let mut total: usize = 1;
        for &d in &factor_dims {
            if d == 0 {
                return Err(Error::InvalidFactorSubset {
                    reason: "factor dimensions must be positive".into(),
                });
            }
            total = total.checked_mul(d).ok_or(Error::DimensionOverflow {
                requested: usize::MAX,
                max: max_total_dim(),
            })?;
        }
        if total > max_total_dim() {
            return Err(Error::DimensionOverflow {
                requested: total,
                max: max_total_dim(),
            });
        }
        Ok(Self {
            factor_dims,
            total_dim: total,
        })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Validate a factor subset: strictly increasing, nonempty, in range.
    pub fn check_subset(&self, factors: &[usize]) -> Result<()> {
        if factors.is_empty() {
            return Err(Error::InvalidFactorSubset {
                reason: "factor subset must be nonempty".into(),
            });
        }
        for window in factors.windows(2) {
            if window[0] >= window[1] {
                return Err(Error::InvalidFactorSubset {
                    reason: "factor indices must be strictly increasing".into(),
                });
            }
        }
        if let Some(&index) = factors.iter().find(|&&i| i >= self.num_factors()) {
            return Err(Error::FactorIndexOutOfRange {
                index,
                count: self.num_factors(),
            });
        }
        Ok(())
    }

    /// Product of the dimensions of a validated factor subset.
    pub fn subset_dim(&self, factors: &[usize]) -> Result<usize> {
        self.check_subset(factors)?;
        Ok(factors.iter().map(|&i| self.factor_dims[i]).product())
    }
}

/// Decompose a linear index into per-factor digits, most significant first.
fn multi_index(mut linear: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (digit, &d) in digits.iter_mut().zip(dims).rev() {
        *digit = linear % d;
        linear /= d;
    }
    digits
}

fn linear_index(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims)
        .fold(0, |acc, (&digit, &d)| acc * d + digit)
}

/// Embed an operator acting on the listed factors (strictly increasing) into
/// the full space, identity on every other factor.
pub fn embed_on_factors(
    op: &HermitianOperator,
    factors: &[usize],
    structure: &CompositeStructure,
) -> Result<HermitianOperator> {
    let local_dim = structure.subset_dim(factors)?;
    if op.dim() != local_dim {
        return Err(Error::DimensionMismatch {
            expected: local_dim,
            got: op.dim(),
        });
    }
    let dims = structure.factor_dims();
    let local_dims: Vec<usize> = factors.iter().map(|&i| dims[i]).collect();
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !factors.contains(i)).collect();
    let total = structure.total_dim();
    let matrix = ComplexMatrix::from_fn(total, |row, col| {
        let rd = multi_index(row, dims);
        let cd = multi_index(col, dims);
        if rest.iter().any(|&t| rd[t] != cd[t]) {
            return Complex64::ZERO;
        }
        let rs: Vec<usize> = factors.iter().map(|&f| rd[f]).collect();
        let cs: Vec<usize> = factors.iter().map(|&f| cd[f]).collect();
        op.matrix()
            .entry(linear_index(&rs, &local_dims), linear_index(&cs, &local_dims))
    })?;
    // Entries are copied from a validated Hermitian operator or are exact
    // zeros, so the embedding is Hermitian by construction.
    Ok(HermitianOperator { matrix })
}

/// Embed an operator on a single factor: 𝟙 ⊗ … ⊗ op ⊗ … ⊗ 𝟙.
pub fn embed_local(
    op: &HermitianOperator,
    factor_index: usize,
    structure: &CompositeStructure,
) -> Result<HermitianOperator> {
    embed_on_factors(op, &[factor_index], structure)
}

/// Trace out every factor not listed in `keep` (strictly increasing).
pub fn partial_trace(
    matrix: &ComplexMatrix,
    keep: &[usize],
    structure: &CompositeStructure,
) -> Result<ComplexMatrix> {
    structure.check_subset(keep)?;
    if matrix.dim() != structure.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: structure.total_dim(),
            got: matrix.dim(),
        });
    }
    let dims = structure.factor_dims();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&i| dims[i]).collect();
    let rest_total: usize = rest_dims.iter().product();
    let out_dim: usize = keep_dims.iter().product();

    ComplexMatrix::from_fn(out_dim, |row, col| {
        let kr = multi_index(row, &keep_dims);
        let kc = multi_index(col, &keep_dims);
        let mut sum = Complex64::ZERO;
        for traced in 0..rest_total {
            let td = multi_index(traced, &rest_dims);
            let mut full_row = vec![0; dims.len()];
            let mut full_col = vec![0; dims.len()];
            for (pos, &f) in keep.iter().enumerate() {
                full_row[f] = kr[pos];
                full_col[f] = kc[pos];
            }
            for (pos, &f) in rest.iter().enumerate() {
                full_row[f] = td[pos];
                full_col[f] = td[pos];
            }
            sum += matrix.entry(linear_index(&full_row, dims), linear_index(&full_col, dims));
        }
        sum
    })
}

/// A basis of d² linearly independent Hermitian matrices: the identity, the
/// symmetric and antisymmetric pair matrices, and the diagonal traceless
/// ladder (generalized Gell-Mann family, unnormalized).
pub fn hermitian_basis(dim: usize) -> Vec<HermitianOperator> {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut basis = Vec::with_capacity(dim * dim);
    basis.push(HermitianOperator::identity(dim));
    for i in 0..dim {
        for j in (i + 1)..dim {
            // e_ij + e_ji
            let sym = ComplexMatrix::from_fn(dim, |r, c| {
                if (r, c) == (i, j) || (r, c) == (j, i) {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                }
            })
            .expect("static entries");
            basis.push(HermitianOperator { matrix: sym });
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            // i(e_ij - e_ji)
            let antisym = ComplexMatrix::from_fn(dim, |r, c| {
                if (r, c) == (i, j) {
                    Complex64::i()
                } else if (r, c) == (j, i) {
                    -Complex64::i()
                } else {
                    Complex64::ZERO
                }
            })
            .expect("static entries");
            basis.push(HermitianOperator { matrix: antisym });
        }
    }
    for k in 1..dim {
        // diag(1, ..., 1, -k, 0, ..., 0) with k ones
        let mut diag = vec![0.0; dim];
        for entry in diag.iter_mut().take(k) {
            *entry = 1.0;
        }
        diag[k] = -(k as f64);
        basis.push(HermitianOperator {
            matrix: ComplexMatrix::from_real_diagonal(&diag),
        });
    }
    debug_assert_eq!(basis.len(), dim * dim);
    basis
}
