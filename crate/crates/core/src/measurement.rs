//! Measurement resolutions, the binned projection-valued measure, and the
//! non-selective measurement channel in Schrödinger and Heisenberg form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::operator::{DensityMatrix, HermitianOperator};
use crate::spectral::spectral_decompose;
use crate::tol;

/// Resolution of the measurement apparatus: either one bin per distinct
/// eigenvalue, or half-open real intervals cut at strictly increasing
/// breakpoints b₁ < … < b_k, giving bins (−∞, b₁), [b₁, b₂), …, [b_k, ∞).
#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementResolution {
    Perfect,
    Intervals { breakpoints: Vec<f64> },
}

impl MeasurementResolution {
    pub fn intervals(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidResolution {
                reason: "interval resolution needs at least one breakpoint".into(),
            });
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidResolution {
                reason: "breakpoints must be finite".into(),
            });
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidResolution {
                reason: "breakpoints must be strictly increasing".into(),
            });
        }
        Ok(Self::Intervals { breakpoints })
    }
}

/// Provenance of a channel: which observable (by entry hash) and which
/// resolution produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSource {
    pub observable_hash: u64,
    pub resolution: MeasurementResolution,
}

/// FNV-1a over the dimension and the raw bit patterns of the entries.
fn observable_hash(matrix: &ComplexMatrix) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(PRIME);
        }
    };
    eat(&(matrix.dim() as u64).to_le_bytes());
    for r in 0..matrix.dim() {
        for c in 0..matrix.dim() {
            let z = matrix.entry(r, c);
            eat(&z.re.to_bits().to_le_bytes());
            eat(&z.im.to_bits().to_le_bytes());
        }
    }
    hash
}

/// The non-selective measurement channel: mutually orthogonal projectors
/// summing to the identity, one per occupied bin.
#[derive(Clone, Debug)]
pub struct MeasurementChannel {
    projectors: Vec<HermitianOperator>,
    bin_labels: Vec<String>,
    source: ChannelSource,
}

impl MeasurementChannel {
    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn bin_labels(&self) -> &[String] {
        &self.bin_labels
    }

    pub fn source(&self) -> &ChannelSource {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

fn validate_channel(projectors: &[HermitianOperator]) -> Result<()> {
    let dim = projectors[0].dim();
    let tau = tol::SPECTRAL_SCALE * (dim as f64).sqrt().max(1.0);
    let mut sum = ComplexMatrix::zeros(dim);
    for (i, p) in projectors.iter().enumerate() {
        if p.frobenius_norm() < 0.5 {
            return Err(Error::InvariantViolation {
                what: "channel projector is numerically zero",
                residual: p.frobenius_norm(),
                tolerance: 0.5,
            });
        }
        let idem = (p.matrix() * p.matrix()).distance(p.matrix());
        if idem > tau {
            return Err(Error::InvariantViolation {
                what: "channel projector idempotence",
                residual: idem,
                tolerance: tau,
            });
        }
        for q in projectors.iter().skip(i + 1) {
            let cross = (p.matrix() * q.matrix()).frobenius_norm();
            if cross > tau {
                return Err(Error::InvariantViolation {
                    what: "channel projector orthogonality",
                    residual: cross,
                    tolerance: tau,
                });
            }
        }
        sum = &sum + p.matrix();
    }
    let completeness = sum.distance(&ComplexMatrix::identity(dim));
    if completeness > tau {
        return Err(Error::InvariantViolation {
            what: "channel completeness",
            residual: completeness,
            tolerance: tau,
        });
    }
    Ok(())
}

fn interval_label(breakpoints: &[f64], bin: usize) -> String {
    let lo = if bin == 0 {
        "-inf".to_string()
    } else {
        format!("{:.6e}", breakpoints[bin - 1])
    };
    let hi = if bin == breakpoints.len() {
        "inf".to_string()
    } else {
        format!("{:.6e}", breakpoints[bin])
    };
    let open = if bin == 0 { "(" } else { "[" };
    format!("{open}{lo}, {hi})")
}

/// Build the channel ρ ↦ Σₙ EₙρEₙ for an observable at a given resolution.
///
/// `Perfect` yields one projector per distinct eigenvalue cluster. For
/// `Intervals`, E(Bₙ) sums the cluster projectors whose eigenvalue falls in
/// the half-open bin Bₙ; a clustered eigenvalue within the clustering gap of
/// a breakpoint is treated as at or above it (assigned rightward). Empty
/// bins are dropped.
pub fn build_channel(
    observable: &HermitianOperator,
    resolution: &MeasurementResolution,
    tau_eig: f64,
) -> Result<MeasurementChannel> {
    let decomposition = spectral_decompose(observable, tau_eig)?;
    let source = ChannelSource {
        observable_hash: observable_hash(observable.matrix()),
        resolution: resolution.clone(),
    };

    let (projectors, bin_labels) = match resolution {
        MeasurementResolution::Perfect => {
            let labels = decomposition
                .eigenvalues()
                .iter()
                .map(|v| format!("{{{v:.6e}}}"))
                .collect();
            (decomposition.projectors().to_vec(), labels)
        }
        MeasurementResolution::Intervals { breakpoints } => {
            let spectral_norm = decomposition
                .eigenvalues()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let snap = tau_eig * spectral_norm.max(1.0);
            let mut bins: Vec<Option<(ComplexMatrix, usize)>> = vec![None; breakpoints.len() + 1];
            for (value, projector) in decomposition
                .eigenvalues()
                .iter()
                .zip(decomposition.projectors())
            {
                let bin = breakpoints.iter().filter(|&&b| value + snap >= b).count();
                bins[bin] = Some(match bins[bin].take() {
                    Some((sum, count)) => (&sum + projector.matrix(), count + 1),
                    None => (projector.matrix().clone(), 1),
                });
            }
            let mut projectors = Vec::new();
            let mut labels = Vec::new();
            for (bin, slot) in bins.into_iter().enumerate() {
                if let Some((sum, _)) = slot {
                    projectors.push(HermitianOperator::symmetrized(sum));
                    labels.push(interval_label(breakpoints, bin));
                }
            }
            (projectors, labels)
        }
    };

    validate_channel(&projectors)?;
    Ok(MeasurementChannel {
        projectors,
        bin_labels,
        source,
    })
}

fn conjugate_sum(projectors: &[HermitianOperator], target: &ComplexMatrix) -> ComplexMatrix {
    let mut sum = ComplexMatrix::zeros(target.dim());
    for p in projectors {
        sum = &sum + &(&(p.matrix() * target) * p.matrix());
    }
    sum
}

/// Schrödinger picture: ρ ↦ ρ' = Σₙ EₙρEₙ.
pub fn apply_nonselective(channel: &MeasurementChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if channel.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            got: rho.dim(),
        });
    }
    DensityMatrix::new(conjugate_sum(&channel.projectors, rho.matrix()))
}

/// Heisenberg picture: O ↦ Σₙ EₙOEₙ. Self-dual to `apply_nonselective`:
/// tr(ρ·ℰ(O)) = tr(ℰ(ρ)·O).
pub fn conjugate_observable(
    channel: &MeasurementChannel,
    observable: &HermitianOperator,
) -> Result<HermitianOperator> {
    if channel.dim() != observable.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            got: observable.dim(),
        });
    }
    Ok(HermitianOperator::symmetrized(conjugate_sum(
        &channel.projectors,
        observable.matrix(),
    )))
}

/// One selective branch: the outcome probability and, when the probability
/// is above the reporting floor, the normalized post-measurement state.
#[derive(Clone, Debug)]
pub struct SelectiveOutcome {
    pub probability: f64,
    pub bin_label: String,
    pub state: Option<DensityMatrix>,
}

/// Selective readout: pₙ = tr(ρEₙ) and ρₙ = EₙρEₙ/pₙ per occupied bin.
/// Branches with pₙ ≤ 1e-12 report an absent post-state.
pub fn selective_outcomes(
    channel: &MeasurementChannel,
    rho: &DensityMatrix,
) -> Result<Vec<SelectiveOutcome>> {
    if channel.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            got: rho.dim(),
        });
    }
    channel
        .projectors
        .iter()
        .zip(&channel.bin_labels)
        .map(|(projector, label)| {
            let probability = (rho.matrix() * projector.matrix()).trace().re;
            let state = if probability > tol::TAU_PROBABILITY {
                let branch = &(projector.matrix() * rho.matrix()) * projector.matrix();
                Some(DensityMatrix::new(
                    branch.scaled(Complex64::new(1.0 / probability, 0.0)),
                )?)
            } else {
                None
            };
            Ok(SelectiveOutcome {
                probability,
                bin_label: label.clone(),
                state,
            })
        })
        .collect()
}

/// Merge projector blocks of a channel. `merge_spec` must partition
/// `0..channel.len()`; each block becomes the sum of its members.
pub fn coarsen(channel: &MeasurementChannel, merge_spec: &[Vec<usize>]) -> Result<MeasurementChannel> {
    let n = channel.len();
    let mut seen = vec![false; n];
    for block in merge_spec {
        if block.is_empty() {
            return Err(Error::InvalidPartition {
                reason: "blocks must be nonempty".into(),
            });
        }
        for &index in block {
            if index >= n {
                return Err(Error::InvalidPartition {
                    reason: format!("index {index} out of range for {n} projectors"),
                });
            }
            if seen[index] {
                return Err(Error::InvalidPartition {
                    reason: format!("index {index} appears more than once"),
                });
            }
            seen[index] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidPartition {
            reason: format!("index {missing} is not covered"),
        });
    }

    let mut projectors = Vec::with_capacity(merge_spec.len());
    let mut bin_labels = Vec::with_capacity(merge_spec.len());
    for block in merge_spec {
        let mut sum = ComplexMatrix::zeros(channel.dim());
        for &index in block {
            sum = &sum + channel.projectors[index].matrix();
        }
        projectors.push(HermitianOperator::symmetrized(sum));
        bin_labels.push(
            block
                .iter()
                .map(|&index| channel.bin_labels[index].as_str())
                .collect::<Vec<_>>()
                .join(" + "),
        );
    }
    validate_channel(&projectors)?;
    Ok(MeasurementChannel {
        projectors,
        bin_labels,
        source: channel.source.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ket_bra, pauli_x, pauli_z, tensor};
    use crate::operator::CompositeStructure;
    use crate::operator::embed_local;
    use crate::random::{random_density, random_hermitian};
    use crate::signalling::kick;
    use crate::tol::TAU_EIG_DEFAULT;

    fn paper_observable() -> HermitianOperator {
        HermitianOperator::new(tensor(&ket_bra(2, 1, 1), &pauli_z()).unwrap()).unwrap()
    }

    fn plus_state() -> DensityMatrix {
        DensityMatrix::from_pure(&[Complex64::ONE, Complex64::ONE]).unwrap()
    }

    #[test]
    fn perfect_channel_of_paper_observable() {
        let ch = build_channel(&paper_observable(), &MeasurementResolution::Perfect, TAU_EIG_DEFAULT)
            .unwrap();
        assert_eq!(ch.len(), 3);
        let id2 = ComplexMatrix::identity(2);
        let expected = [
            tensor(&ket_bra(2, 1, 1), &ket_bra(2, 0, 0)).unwrap(),
            tensor(&ket_bra(2, 1, 1), &ket_bra(2, 1, 1)).unwrap(),
            tensor(&ket_bra(2, 0, 0), &id2).unwrap(),
        ];
        for (p, e) in ch.projectors().iter().zip(&expected) {
            assert!(p.matrix().distance(e) < 1e-12);
        }
    }

    #[test]
    fn whole_spectrum_bin_gives_identity_channel() {
        let o = random_hermitian(4, 3);
        // breakpoints far below and above the spectrum: only the middle bin
        // is occupied and the channel is the identity map
        let res = MeasurementResolution::intervals(vec![-1e6, 1e6]).unwrap();
        let ch = build_channel(&o, &res, TAU_EIG_DEFAULT).unwrap();
        assert_eq!(ch.len(), 1);
        assert!(ch.projectors()[0].matrix().distance(&ComplexMatrix::identity(4)) < 1e-12);

        let rho = random_density(4, 4);
        let rho_after = apply_nonselective(&ch, &rho).unwrap();
        assert!(rho_after.matrix().distance(rho.matrix()) < 1e-12);
    }

    #[test]
    fn sign_binning_of_pauli_z() {
        let sz = HermitianOperator::new(pauli_z()).unwrap();
        let res = MeasurementResolution::intervals(vec![0.0]).unwrap();
        let ch = build_channel(&sz, &res, TAU_EIG_DEFAULT).unwrap();
        assert_eq!(ch.len(), 2);
        // bin (-inf, 0) catches -1, bin [0, inf) catches +1
        assert!(ch.projectors()[0].matrix().distance(&ket_bra(2, 1, 1)) < 1e-12);
        assert!(ch.projectors()[1].matrix().distance(&ket_bra(2, 0, 0)) < 1e-12);
    }

    #[test]
    fn breakpoint_snap_assigns_rightward() {
        // eigenvalue exactly on a breakpoint goes to the right bin
        let sz = HermitianOperator::new(pauli_z()).unwrap();
        let res = MeasurementResolution::intervals(vec![1.0]).unwrap();
        let ch = build_channel(&sz, &res, TAU_EIG_DEFAULT).unwrap();
        assert_eq!(ch.len(), 2);
        assert_eq!(ch.bin_labels()[1], "[1.000000e0, inf)");
        assert!(ch.projectors()[1].matrix().distance(&ket_bra(2, 0, 0)) < 1e-12);
    }

    #[test]
    fn dephasing_of_equal_superposition() {
        let sz = HermitianOperator::new(pauli_z()).unwrap();
        let ch = build_channel(&sz, &MeasurementResolution::Perfect, TAU_EIG_DEFAULT).unwrap();
        let rho_after = apply_nonselective(&ch, &plus_state()).unwrap();
        assert!(rho_after.matrix().distance(&DensityMatrix::maximally_mixed(2).matrix) < 1e-12);
    }

    #[test]
    fn paper_expectation_after_kick_and_measurement() {
        // tr(E(U rho0 U†)·(1 (x) sigma_x)) = cos^2(gamma)
        let structure = CompositeStructure::new(vec![2, 2]).unwrap();
        let o1 = embed_local(&HermitianOperator::new(pauli_x()).unwrap(), 0, &structure).unwrap();
        let o3 = embed_local(&HermitianOperator::new(pauli_x()).unwrap(), 1, &structure).unwrap();
        let rho0 = DensityMatrix::from_pure(&[
            Complex64::ONE,
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ZERO,
        ])
        .unwrap();
        let ch = build_channel(&paper_observable(), &MeasurementResolution::Perfect, TAU_EIG_DEFAULT)
            .unwrap();
        for gamma in [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
            let kicked = kick(&rho0, &o1, gamma).unwrap();
            let measured = apply_nonselective(&ch, &kicked).unwrap();
            let value = measured.expectation_value(&o3).unwrap();
            assert!((value - gamma.cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn observable_conjugation_examples() {
        let sz = HermitianOperator::new(pauli_z()).unwrap();
        let ch = build_channel(&sz, &MeasurementResolution::Perfect, TAU_EIG_DEFAULT).unwrap();
        // off-diagonal observable is fully dephased
        let out = conjugate_observable(&ch, &HermitianOperator::new(pauli_x()).unwrap()).unwrap();
        assert!(out.frobenius_norm() < 1e-12);
        // compatible observable is fixed
        let fixed = conjugate_observable(&ch, &sz).unwrap();
        assert!(fixed.matrix().distance(&pauli_z()) < 1e-12);
    }

    #[test]
    fn paper_heisenberg_action() {
        // E over the paper channel of 1 (x) sigma_x equals |0><0| (x) sigma_x,
        // evaluated directly as sum P (1 (x) sx) P
        let ch = build_channel(&paper_observable(), &MeasurementResolution::Perfect, TAU_EIG_DEFAULT)
            .unwrap();
        let id2 = ComplexMatrix::identity(2);
        let o3 = HermitianOperator::new(tensor(&id2, &pauli_x()).unwrap()).unwrap();
        let out = conjugate_observable(&ch, &o3).unwrap();
        let expected = tensor(&ket_bra(2, 0, 0), &pauli_x()).unwrap();
        assert!(out.matrix().distance(&expected) < 1e-12);
    }

    #[test]
    fn selective_outcomes_on_eigenstate_and_superposition() {
        let sz = HermitianOperator::new(pauli_z()).unwrap();
        let ch = build_channel(&sz, &MeasurementResolution::Perfect, TAU_EIG_DEFAULT).unwrap();

        let ground = DensityMatrix::from_pure(&[Complex64::ONE, Complex64::ZERO]).unwrap();
        let outcomes = selective_outcomes(&ch, &ground).unwrap();
        assert!((outcomes[0].probability - 1.0).abs() < 1e-12);
        assert!(outcomes[0].state.is_some());
        assert!(outcomes[1].probability.abs() < 1e-12);
        assert!(outcomes[1].state.is_none());

        let outcomes = selective_outcomes(&ch, &plus_state()).unwrap();
        for (outcome, target) in outcomes.iter().zip([ket_bra(2, 0, 0), ket_bra(2, 1, 1)]) {
            assert!((outcome.probability - 0.5).abs() < 1e-12);
            assert!(outcome.state.as_ref().unwrap().matrix().distance(&target) < 1e-12);
        }
    }

    #[test]
    fn paper_initial_state_lies_in_the_kernel_bin() {
        let ch = build_channel(&paper_observable(), &MeasurementResolution::Perfect, TAU_EIG_DEFAULT)
            .unwrap();
        let rho0 = DensityMatrix::from_pure(&[
            Complex64::ONE,
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ZERO,
        ])
        .unwrap();
        let outcomes = selective_outcomes(&ch, &rho0).unwrap();
        // kernel bin is the third projector; it absorbs the state untouched
        assert!(outcomes[0].probability.abs() < 1e-12);
        assert!(outcomes[1].probability.abs() < 1e-12);
        assert!((outcomes[2].probability - 1.0).abs() < 1e-12);
        assert!(
            outcomes[2].state.as_ref().unwrap().matrix().distance(rho0.matrix()) < 1e-12
        );
    }

    #[test]
    fn coarsen_merges_and_validates() {
        let ch = build_channel(&paper_observable(), &MeasurementResolution::Perfect, TAU_EIG_DEFAULT)
            .unwrap();

        // merging the +1/-1 bins keeps the kernel separate
        let merged = coarsen(&ch, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(merged.len(), 2);
        let id2 = ComplexMatrix::identity(2);
        assert!(
            merged.projectors()[0]
                .matrix()
                .distance(&tensor(&ket_bra(2, 1, 1), &id2).unwrap())
                < 1e-12
        );
        assert!(
            merged.projectors()[1]
                .matrix()
                .distance(&tensor(&ket_bra(2, 0, 0), &id2).unwrap())
                < 1e-12
        );

        // total merge yields the identity channel
        let total = coarsen(&ch, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(total.len(), 1);
        assert!(total.projectors()[0].matrix().distance(&ComplexMatrix::identity(4)) < 1e-12);

        // singleton partition is a no-op
        let same = coarsen(&ch, &[vec![0], vec![1], vec![2]]).unwrap();
        for (p, q) in same.projectors().iter().zip(ch.projectors()) {
            assert!(p.matrix().distance(q.matrix()) < 1e-15);
        }
    }

    #[test]
    fn coarsen_rejects_bad_partitions() {
        let ch = build_channel(&paper_observable(), &MeasurementResolution::Perfect, TAU_EIG_DEFAULT)
            .unwrap();
        assert!(matches!(
            coarsen(&ch, &[vec![0, 1]]),
            Err(Error::InvalidPartition { .. })
        ));
        assert!(matches!(
            coarsen(&ch, &[vec![0, 0], vec![1, 2]]),
            Err(Error::InvalidPartition { .. })
        ));
        assert!(matches!(
            coarsen(&ch, &[vec![0, 1], vec![2, 3]]),
            Err(Error::InvalidPartition { .. })
        ));
    }

    #[test]
    fn resolution_validation() {
        assert!(MeasurementResolution::intervals(vec![]).is_err());
        assert!(MeasurementResolution::intervals(vec![0.0, 0.0]).is_err());
        assert!(MeasurementResolution::intervals(vec![1.0, -1.0]).is_err());
        assert!(MeasurementResolution::intervals(vec![f64::NAN]).is_err());
        assert!(MeasurementResolution::intervals(vec![-1.0, 0.5, 2.0]).is_ok());
    }

    #[test]
    fn source_records_observable_and_resolution() {
        let o = paper_observable();
        let ch = build_channel(&o, &MeasurementResolution::Perfect, TAU_EIG_DEFAULT).unwrap();
        assert_eq!(ch.source().resolution, MeasurementResolution::Perfect);
        assert_eq!(ch.source().observable_hash, observable_hash(o.matrix()));
        let other = build_channel(
            &HermitianOperator::new(pauli_z()).unwrap(),
            &MeasurementResolution::Perfect,
            TAU_EIG_DEFAULT,
        )
        .unwrap();
        assert_ne!(ch.source().observable_hash, other.source().observable_hash);
    }
}
