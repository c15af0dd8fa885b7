//! Decides whether an ideal (projective, possibly coarse-grained) measurement
//! of an observable on a composite finite-dimensional quantum system enables
//! signalling between separated parties.
//!
//! The crate models non-selective measurements as the channel
//! `rho -> sum_n E_n rho E_n` built from the binned spectral projectors of an
//! observable, simulates the kick–measure–measure protocol, and decides the
//! no-signalling question by sweeping a Hermitian operator basis on the sender
//! and receiver factors.
//!
//! ```
//! use nosignal::{composites, signalling};
//!
//! let s = composites::paper_scenario();
//! let verdict = signalling::is_signalling(
//!     s.o2(), s.resolution(), s.structure(), s.sender_factors(), s.receiver_factors(),
//! ).unwrap();
//! assert!(verdict.signalling);
//!
//! // <O3>(gamma) = cos^2(gamma) for this scenario.
//! let value = signalling::simulate_protocol(&s, std::f64::consts::FRAC_PI_2).unwrap();
//! assert!(value.abs() < 1e-10);
//! ```

use std::sync::atomic::{AtomicUsize, Ordering};

pub mod error;
pub mod matrix;
pub mod operator;
pub mod random;
pub mod spectral;
pub mod measurement;
pub mod signalling;
pub mod composites;
pub mod tol;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use operator::{CompositeStructure, DensityMatrix, HermitianOperator};
pub use spectral::SpectralDecomposition;
pub use measurement::{MeasurementChannel, MeasurementResolution};
pub use signalling::{Scenario, SignalVerdict};
pub use composites::LocalPair;

static MAX_TOTAL_DIM: AtomicUsize = AtomicUsize::new(4096);

/// Largest admissible total Hilbert-space dimension (default 4096).
pub fn max_total_dim() -> usize {
    MAX_TOTAL_DIM.load(Ordering::Relaxed)
}

/// Override the total-dimension cap. Panics if `dim == 0`.
pub fn set_max_total_dim(dim: usize) {
    assert!(dim >= 1, "dimension cap must be at least 1");
    MAX_TOTAL_DIM.store(dim, Ordering::Relaxed);
}
