//! Dense complex square matrices and the elementary algebra built on them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::max_total_dim;

/// Dense complex square matrix, the carrier for every operator in this crate.
///
/// Entries are validated finite at construction and the dimension is at
/// least 1. Values are immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Wrap an owned nalgebra matrix, validating shape and finiteness.
    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() || inner.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        for row in 0..inner.nrows() {
            for col in 0..inner.ncols() {
                let z = inner[(row, col)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFiniteEntry { row, col });
                }
            }
        }
        Ok(Self { inner })
    }

    /// Build from a list of rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    /// Build from an entry function.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        Self::from_dmatrix(DMatrix::from_fn(dim, dim, |r, c| f(r, c)))
    }

    /// Zero matrix. Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    /// Identity matrix. Panics if `dim == 0`.
    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    /// Diagonal matrix with real entries. Panics on an empty diagonal.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "dimension must be at least 1");
        Self {
            inner: DMatrix::from_fn(diag.len(), diag.len(), |r, c| {
                if r == c {
                    Complex64::new(diag[r], 0.0)
                } else {
                    Complex64::ZERO
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// ‖M − M†‖_F, the distance from the Hermitian cone.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.inner - self.inner.adjoint()).norm()
    }

    /// ‖M + M†‖_F, the distance from the anti-Hermitian cone.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        (&self.inner + self.inner.adjoint()).norm()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            inner: &self.inner * factor,
        }
    }

    /// Frobenius distance to another matrix. Panics on dimension mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        (&self.inner - &other.inner).norm()
    }

    /// (M + M†)/2.
    pub fn symmetrized(&self) -> Self {
        Self {
            inner: (&self.inner + self.inner.adjoint()).scale(0.5),
        }
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

/// Kronecker product `A ⊗ B` with `A` on the most significant index:
/// `(A ⊗ B)[(i·d_B + k, j·d_B + l)] = A[(i, j)] · B[(k, l)]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(Error::DimensionOverflow {
            requested: usize::MAX,
            max: max_total_dim(),
        })?;
    if dim > max_total_dim() {
        return Err(Error::DimensionOverflow {
            requested: dim,
            max: max_total_dim(),
        });
    }
    Ok(ComplexMatrix {
        inner: a.inner.kronecker(&b.inner),
    })
}

/// `AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(ComplexMatrix {
        inner: &a.inner * &b.inner - &b.inner * &a.inner,
    })
}

/// Rank-1 matrix |i⟩⟨j| in the computational basis.
pub fn ket_bra(dim: usize, i: usize, j: usize) -> ComplexMatrix {
    assert!(i < dim && j < dim, "basis index out of range");
    let mut inner = DMatrix::zeros(dim, dim);
    inner[(i, j)] = Complex64::ONE;
    ComplexMatrix { inner }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![Complex64::ZERO, Complex64::ONE],
        vec![Complex64::ONE, Complex64::ZERO],
    ])
    .expect("static 2x2")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![Complex64::ZERO, -Complex64::i()],
        vec![Complex64::i(), Complex64::ZERO],
    ])
    .expect("static 2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}
