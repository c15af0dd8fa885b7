//! Spectral decomposition of Hermitian operators with degeneracy clustering.
//!
//! Floating-point eigenvalues of a degenerate operator split at the order of
//! machine-eps · ‖O‖, so raw eigenvalues are grouped greedily: two adjacent
//! sorted values join one cluster iff their gap is at most
//! τ_eig · max(1, ‖O‖₂). Each cluster carries the arithmetic mean of its
//! members as eigenvalue and the sum of their rank-1 eigenprojectors,
//! re-symmetrized, as projector. Clusters are ordered by decreasing
//! magnitude, ties broken by descending signed value; a cluster within the
//! gap of zero is flagged as the kernel.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::operator::HermitianOperator;
use crate::tol;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Raw (unclustered) eigendecomposition, eigenvalues ascending with matching
/// eigenvector columns.
pub(crate) struct RawEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// Dense Hermitian eigendecomposition. Non-convergence is reported, never
/// silently recovered.
pub(crate) fn hermitian_eigen_raw(matrix: &ComplexMatrix) -> Result<RawEigen> {
    let symmetrized = matrix.symmetrized();
    let eigen = nalgebra::SymmetricEigen::try_new(
        symmetrized.into_dmatrix(),
        f64::EPSILON,
        EIGEN_MAX_ITERATIONS,
    )
    .ok_or(Error::EigenSolverFailure)?;

    let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[a]
            .partial_cmp(&eigen.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&k| eigen.eigenvalues[k]).collect();
    let columns: Vec<_> = order.iter().map(|&k| eigen.eigenvectors.column(k)).collect();
    Ok(RawEigen {
        values,
        vectors: DMatrix::from_columns(&columns),
    })
}

/// Distinct eigenvalue clusters with orthogonal projectors resolving the
/// identity.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<HermitianOperator>,
    zero_index: Option<usize>,
}

impl SpectralDecomposition {
    /// Cluster eigenvalues, decreasing in magnitude, ties by descending
    /// signed value.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Cluster projectors, parallel to `eigenvalues`.
    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    /// Index of the kernel cluster, if an eigenvalue lies within the
    /// clustering gap of zero.
    pub fn zero_index(&self) -> Option<usize> {
        self.zero_index
    }

    pub fn kernel_projector(&self) -> Option<&HermitianOperator> {
        self.zero_index.map(|k| &self.projectors[k])
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Σ λ_i P_i.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.projectors[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for (value, projector) in self.eigenvalues.iter().zip(&self.projectors) {
            sum = &sum + &projector.matrix().scaled(Complex64::new(*value, 0.0));
        }
        sum
    }
}

fn validate_decomposition(
    operator: &HermitianOperator,
    decomposition: &SpectralDecomposition,
    gap: f64,
) -> Result<()> {
    let tau_num = tol::SPECTRAL_SCALE * operator.frobenius_norm().max(1.0);
    let dim = operator.dim();
    let identity = ComplexMatrix::identity(dim);
    let mut sum = ComplexMatrix::zeros(dim);
    for (i, p) in decomposition.projectors.iter().enumerate() {
        let p2 = p.matrix() * p.matrix();
        let idem = p2.distance(p.matrix());
        if idem > tau_num {
            return Err(Error::InvariantViolation {
                what: "projector idempotence",
                residual: idem,
                tolerance: tau_num,
            });
        }
        for q in decomposition.projectors.iter().skip(i + 1) {
            let cross = (p.matrix() * q.matrix()).frobenius_norm();
            if cross > tau_num {
                return Err(Error::InvariantViolation {
                    what: "projector orthogonality",
                    residual: cross,
                    tolerance: tau_num,
                });
            }
        }
        sum = &sum + p.matrix();
    }
    let completeness = sum.distance(&identity);
    if completeness > tau_num {
        return Err(Error::InvariantViolation {
            what: "projector completeness",
            residual: completeness,
            tolerance: tau_num,
        });
    }
    let reconstruction = decomposition.reconstruct().distance(operator.matrix());
    let recon_tol = tau_num * operator.frobenius_norm().max(1.0);
    if reconstruction > recon_tol {
        return Err(Error::InvariantViolation {
            what: "spectral reconstruction",
            residual: reconstruction,
            tolerance: recon_tol,
        });
    }
    for (i, a) in decomposition.eigenvalues.iter().enumerate() {
        for b in decomposition.eigenvalues.iter().skip(i + 1) {
            if (a - b).abs() <= gap {
                return Err(Error::InvariantViolation {
                    what: "cluster separation",
                    residual: (a - b).abs(),
                    tolerance: gap,
                });
            }
        }
    }
    Ok(())
}

/// Spectral decomposition with degeneracy clustering at width
/// `tau_eig · max(1, ‖O‖₂)`.
pub fn spectral_decompose(
    operator: &HermitianOperator,
    tau_eig: f64,
) -> Result<SpectralDecomposition> {
    assert!(tau_eig > 0.0, "clustering tolerance must be positive");
    let raw = hermitian_eigen_raw(operator.matrix())?;
    let spectral_norm = raw.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = tau_eig * spectral_norm.max(1.0);

    // Greedy clustering over ascending raw eigenvalues.
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &value) in raw.values.iter().enumerate() {
        match clusters.last_mut() {
            Some((_, members)) if value - raw.values[*members.last().unwrap()] <= gap => {
                members.push(k);
            }
            _ => clusters.push((value, vec![k])),
        }
    }
    for (value, members) in clusters.iter_mut() {
        *value = members.iter().map(|&k| raw.values[k]).sum::<f64>() / members.len() as f64;
    }

    // Canonical order: decreasing |λ|, ties by descending signed value.
    clusters.sort_by(|(a, _), (b, _)| {
        b.abs()
            .partial_cmp(&a.abs())
            .expect("finite eigenvalues")
            .then(b.partial_cmp(a).expect("finite eigenvalues"))
    });

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    for (value, members) in &clusters {
        let mut projector = DMatrix::<Complex64>::zeros(operator.dim(), operator.dim());
        for &k in members {
            let v = raw.vectors.column(k);
            projector += &v * v.adjoint();
        }
        eigenvalues.push(*value);
        projectors.push(HermitianOperator::symmetrized(
            ComplexMatrix::from_dmatrix(projector)?,
        ));
    }

    let zero_index = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= gap)
        .min_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).expect("finite"))
        .map(|(k, _)| k);

    let decomposition = SpectralDecomposition {
        eigenvalues,
        projectors,
        zero_index,
    };
    validate_decomposition(operator, &decomposition, gap)?;
    Ok(decomposition)
}

/// Unitary `exp(i·angle·O)` computed as `e^{i·angle·λ}` on each eigenspace.
pub fn unitary_from_generator(operator: &HermitianOperator, angle: f64) -> Result<ComplexMatrix> {
    let raw = hermitian_eigen_raw(operator.matrix())?;
    let dim = operator.dim();
    let mut unitary = DMatrix::<Complex64>::zeros(dim, dim);
    for (k, &value) in raw.values.iter().enumerate() {
        let v = raw.vectors.column(k);
        let phase = Complex64::from_polar(1.0, angle * value);
        unitary += (&v * v.adjoint()) * phase;
    }
    let unitarity = (&unitary * unitary.adjoint() - DMatrix::<Complex64>::identity(dim, dim)).norm();
    if unitarity > tol::TAU_UNITARY {
        return Err(Error::InvariantViolation {
            what: "unitarity of exponentiated generator",
            residual: unitarity,
            tolerance: tol::TAU_UNITARY,
        });
    }
    ComplexMatrix::from_dmatrix(unitary)
}
