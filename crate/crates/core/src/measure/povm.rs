use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{inverse_cdf, trace_product, Measurement, Outcome, ZERO_PROBABILITY};
use crate::error::{Error, Result};
use crate::linalg::{
    psd_deviation, qubit_count, sqrt_psd, unitary_deviation, ComplexMatrix, STRUCTURAL_TOL,
};
use crate::states::{DensityState, PureState};

/// Positive operator-valued measure `{M_y}` with `Σ M_y = I`.
#[derive(Clone, Debug)]
pub struct Povm {
    n: usize,
    effects: Vec<(Outcome, ComplexMatrix)>,
}

impl Povm {
    /// Checks each effect is PSD and that they sum to the identity, within [`STRUCTURAL_TOL`].
    pub fn new(effects: Vec<(Outcome, ComplexMatrix)>) -> Result<Self> {
        let dim = effects
            .first()
            .map(|(_, m)| m.rows())
            .ok_or_else(|| Error::InvalidMeasurement {
                reason: "no effects".into(),
            })?;
        let n = qubit_count(dim)?;
        for (i, (label, m)) in effects.iter().enumerate() {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.rows(),
                });
            }
            if effects[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::InvalidMeasurement {
                    reason: format!("duplicate outcome label {label}"),
                });
            }
            let herm = m.hermitian_deviation();
            if herm > STRUCTURAL_TOL {
                return Err(Error::NotHermitian { deviation: herm });
            }
            let neg = psd_deviation(m);
            if neg > STRUCTURAL_TOL {
                return Err(Error::NotPsd { min_eigenvalue: -neg });
            }
        }
        let p = Self { n, effects };
        let dev = p.completeness_deviation();
        if dev > STRUCTURAL_TOL {
            return Err(Error::InvalidMeasurement {
                reason: format!("effects do not sum to the identity (deviation {dev:.3e})"),
            });
        }
        Ok(p)
    }

    pub(crate) fn from_parts(n: usize, effects: Vec<(Outcome, ComplexMatrix)>) -> Self {
        Self { n, effects }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn effects(&self) -> &[(Outcome, ComplexMatrix)] {
        &self.effects
    }

    pub fn effect(&self, y: Outcome) -> Result<&ComplexMatrix> {
        self.effects
            .iter()
            .find(|(l, _)| *l == y)
            .map(|(_, m)| m)
            .ok_or(Error::UnknownOutcome { outcome: y })
    }

    /// Max `|Σ_y M_y − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .effects
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, (_, m)| &acc + m);
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }

    /// Samples an outcome and the square-root post-state.
    pub fn sample<R: Rng + ?Sized>(&self, rho: &DensityState, rng: &mut R) -> Result<(Outcome, DensityState)> {
        let probs = self.probabilities(rho)?;
        let y = self.effects[inverse_cdf(&probs, rng)].0;
        Ok((y, self.post_state(y, rho)?))
    }

    /// Samples on a pure state; the post-state `M_y^{1/2}|ψ⟩` stays pure.
    pub fn sample_pure<R: Rng + ?Sized>(&self, psi: &PureState, rng: &mut R) -> Result<(Outcome, PureState)> {
        check_dim(self.dim(), psi.dim())?;
        let probs: Vec<f64> = self
            .effects
            .iter()
            .map(|(_, m)| Ok(m.sandwich(psi.amplitudes(), psi.amplitudes())?.re))
            .collect::<Result<_>>()?;
        let y = self.effects[inverse_cdf(&probs, rng)].0;
        let root = sqrt_psd(self.effect(y)?, STRUCTURAL_TOL)?;
        Ok((y, PureState::renormalized(root.apply(psi.amplitudes())?)?))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl Measurement for Povm {
    fn n(&self) -> usize {
        self.n
    }

    fn labels(&self) -> Vec<Outcome> {
        self.effects.iter().map(|(l, _)| *l).collect()
    }

    /// `p_y = tr(M_y ρ)`.
    fn probabilities(&self, rho: &DensityState) -> Result<Vec<f64>> {
        check_dim(self.dim(), rho.dim())?;
        Ok(self
            .effects
            .iter()
            .map(|(_, m)| trace_product(m, rho.matrix()))
            .collect())
    }

    /// `M_y^{1/2} ρ M_y^{1/2} / tr(M_y ρ)`.
    fn post_state(&self, y: Outcome, rho: &DensityState) -> Result<DensityState> {
        check_dim(self.dim(), rho.dim())?;
        let m = self.effect(y)?;
        let prob = trace_product(m, rho.matrix());
        if prob <= ZERO_PROBABILITY {
            return Err(Error::ZeroProbabilityOutcome {
                outcome: y,
                probability: prob,
            });
        }
        let root = sqrt_psd(m, STRUCTURAL_TOL)?;
        let out = (&(&root * rho.matrix()) * &root).scale_real(1.0 / prob);
        Ok(DensityState::from_matrix_unchecked(out.hermitian_part()))
    }
}

pub fn povm_probabilities(p: &Povm, rho: &DensityState) -> Result<Vec<f64>> {
    p.probabilities(rho)
}

pub fn povm_post_state(p: &Povm, y: Outcome, rho: &DensityState) -> Result<DensityState> {
    p.post_state(y, rho)
}

/// Effects `M_y = U_{y0}† U_{y0}` of a unitary acting on `n_prime` leading ancillas
/// prepared in `|0⟩` followed by the system.
///
/// Every label `y ∈ 0..2^{n_prime}` is kept, including numerically zero effects.
pub fn povm_from_dilation(u: &ComplexMatrix, n_prime: usize) -> Result<Povm> {
    let total = qubit_count(u.ensure_square()?)?;
    if n_prime > total {
        return Err(Error::BadDimension { dim: u.rows() });
    }
    let deviation = unitary_deviation(u);
    if deviation > STRUCTURAL_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let n = total - n_prime;
    let d = 1usize << n;
    let effects = (0..1usize << n_prime)
        .map(|y| {
            let block = u.block(y * d, 0, d, d);
            (y, (&block.dagger() * &block).hermitian_part())
        })
        .collect();
    Povm::new(effects)
}

/// Unambiguous discrimination of `ψ₀` and `ψ₁`: outcome 0 declares `ψ₀`, 1 declares
/// `ψ₁`, 2 is inconclusive.
///
/// With `S` the span of the two states and `a = 1/(1 + |⟨ψ₀|ψ₁⟩|)`, the effects are
/// `M₀ = a(P_S − |ψ₁⟩⟨ψ₁|)`, `M₁ = a(P_S − |ψ₀⟩⟨ψ₀|)` and `M₂ = I − M₀ − M₁`. On a
/// single qubit `P_S = I`; on larger registers restricting to `S` keeps `M₂` PSD.
pub fn usd_povm(psi0: &PureState, psi1: &PureState) -> Result<Povm> {
    let ip = psi0.inner(psi1)?;
    let c = ip.norm();
    if 1.0 - c < ZERO_PROBABILITY {
        return Err(Error::IdenticalStates);
    }
    let a = 1.0 / (1.0 + c);
    let v0 = psi0.amplitudes();
    let v1 = psi1.amplitudes();
    // orthonormal completion of ψ₀ inside the span
    let w: Vec<Complex64> = v1.iter().zip(v0).map(|(b, x)| b - ip * x).collect();
    let w_norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let w: Vec<Complex64> = w.into_iter().map(|x| x / w_norm).collect();
    let p0 = ComplexMatrix::outer(v0, v0);
    let p1 = ComplexMatrix::outer(v1, v1);
    let span = &p0 + &ComplexMatrix::outer(&w, &w);
    let m0 = (&span - &p1).scale_real(a).hermitian_part();
    let m1 = (&span - &p0).scale_real(a).hermitian_part();
    let m2 = (&(&ComplexMatrix::identity(psi0.dim()) - &m0) - &m1).hermitian_part();
    Povm::new(vec![(0, m0), (1, m1), (2, m2)])
}

/// One outcome's probability and the chance that measuring its post-state again
/// returns the same label. Unreachable outcomes have no repeat probability.
#[derive(Clone, Debug, Serialize)]
pub struct RepeatOutcome {
    pub label: Outcome,
    pub probability: f64,
    pub repeat_probability: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RepeatReport {
    /// Sampled first outcome.
    pub first: Outcome,
    pub outcomes: Vec<RepeatOutcome>,
}

impl RepeatReport {
    pub fn repeat_probability(&self, y: Outcome) -> Option<f64> {
        self.outcomes
            .iter()
            .find(|o| o.label == y)
            .and_then(|o| o.repeat_probability)
    }

    pub fn is_repeatable(&self, tol: f64) -> bool {
        self.outcomes
            .iter()
            .filter_map(|o| o.repeat_probability)
            .all(|p| (p - 1.0).abs() <= tol)
    }
}

/// Measures once (sampled), then evaluates `P(second = y | first = y)` analytically
/// for every reachable outcome `y`.
pub fn repeat_measurement_check<M: Measurement, R: Rng + ?Sized>(
    m: &M,
    rho: &DensityState,
    rng: &mut R,
) -> Result<RepeatReport> {
    let labels = m.labels();
    let probs = m.probabilities(rho)?;
    let first = labels[inverse_cdf(&probs, rng)];
    let outcomes = labels
        .iter()
        .zip(&probs)
        .enumerate()
        .map(|(i, (&label, &probability))| {
            let repeat_probability = if probability > ZERO_PROBABILITY {
                let post = m.post_state(label, rho)?;
                Some(m.probabilities(&post)?[i])
            } else {
                None
            };
            Ok(RepeatOutcome {
                label,
                probability,
                repeat_probability,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RepeatReport { first, outcomes })
}
