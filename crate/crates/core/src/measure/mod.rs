//! Projective measurements, observables and POVMs.

mod observable;
mod povm;
mod projective;

use rand::Rng;

use crate::error::Result;
use crate::states::DensityState;

pub use observable::{
    compatible, exact_pauli_distribution, expectation, expectation_via_pauli, observable_from_hermitian,
    sample_pauli_local, sample_pauli_local_ordered, Observable, PauliString,
};
pub use povm::{
    povm_from_dilation, povm_post_state, povm_probabilities, repeat_measurement_check, usd_povm, Povm,
    RepeatOutcome, RepeatReport,
};
pub use projective::{
    balanced_measurement, born_probabilities, computational_basis, computational_measurement,
    measurement_from_partition, orthonormality_deviation, parity_measurement, post_state,
    projector_from_vectors, sample, ProjectiveMeasurement,
};
pub(crate) use projective::trace_product;

/// Integer outcome label.
pub type Outcome = usize;

/// Outcomes with probability at or below this cannot be conditioned on.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Common surface of projective measurements and POVMs.
pub trait Measurement {
    fn n(&self) -> usize;
    fn labels(&self) -> Vec<Outcome>;
    /// Outcome probabilities in the order of [`Measurement::labels`].
    fn probabilities(&self, rho: &DensityState) -> Result<Vec<f64>>;
    fn post_state(&self, y: Outcome, rho: &DensityState) -> Result<DensityState>;
}

/// Index drawn from `probs` by inverse CDF on one uniform variate.
///
/// Rounding slack in the cumulative sum falls to the last outcome with nonzero mass.
pub(crate) fn inverse_cdf<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p.max(0.0);
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}
