//! Numerical tolerances pinned by the library's contracts.

/// Hermiticity validation: ‖M − M†‖_F ≤ TAU_HERM · max(1, ‖M‖_F).
pub const TAU_HERM: f64 = 1e-10;

/// Default eigenvalue clustering width, scaled by max(1, ‖O‖₂).
pub const TAU_EIG_DEFAULT: f64 = 1e-8;

/// Density-matrix trace window: |tr ρ − 1| ≤ TAU_TRACE.
pub const TAU_TRACE: f64 = 1e-10;

/// Density-matrix positivity floor: min eigenvalue ≥ −TAU_POSITIVITY.
pub const TAU_POSITIVITY: f64 = 1e-10;

/// Default commutator threshold scale: a basis-pair commutator counts as a
/// signal when ‖C‖_F > COMM_SCALE_DEFAULT · (1 + ‖O₁‖_F‖ℰ(O₃)‖_F).
pub const COMM_SCALE_DEFAULT: f64 = 1e-9;

/// Spectral-decomposition invariant scale: τ_num = SPECTRAL_SCALE · max(1, ‖O‖_F).
pub const SPECTRAL_SCALE: f64 = 1e-9;

/// Unitarity check for exponentiated generators: ‖UU† − 𝟙‖_F ≤ TAU_UNITARY.
pub const TAU_UNITARY: f64 = 1e-10;

/// Selective outcomes below this probability are reported with an absent
/// post-measurement state.
pub const TAU_PROBABILITY: f64 = 1e-12;

/// A commutator with Frobenius norm at or below this floor admits no witness.
pub const TAU_ZERO_COMMUTATOR: f64 = 1e-12;

/// Tunable tolerances threaded through channel construction and the
/// signalling decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Eigenvalue clustering width (relative to max(1, ‖O‖₂)).
    pub tau_eig: f64,
    /// Commutator threshold scale (relative to the operator norms involved).
    pub comm_scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_eig: TAU_EIG_DEFAULT,
            comm_scale: COMM_SCALE_DEFAULT,
        }
    }
}
