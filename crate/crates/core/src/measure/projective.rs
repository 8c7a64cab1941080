use num_complex::Complex64;
use rand::Rng;

use super::{Measurement, Outcome, ZERO_PROBABILITY};
use crate::error::{Error, Result};
use crate::linalg::{
    largest_singular_value, qubit_count, top_left_singular, validate, ComplexMatrix,
    ValidationKind, STRUCTURAL_TOL,
};
use crate::states::{DensityState, PureState};

/// Projective measurement `{Π_y}`: orthogonal projectors resolving the identity.
#[derive(Clone, Debug)]
pub struct ProjectiveMeasurement {
    n: usize,
    outcomes: Vec<(Outcome, ComplexMatrix)>,
}

impl ProjectiveMeasurement {
    /// Builds a measurement, checking every projector, mutual orthogonality and
    /// completeness within [`STRUCTURAL_TOL`].
    pub fn new(outcomes: Vec<(Outcome, ComplexMatrix)>) -> Result<Self> {
        let dim = outcomes
            .first()
            .map(|(_, p)| p.rows())
            .ok_or_else(|| Error::InvalidMeasurement {
                reason: "no outcomes".into(),
            })?;
        let n = qubit_count(dim)?;
        for (i, (label, p)) in outcomes.iter().enumerate() {
            if p.rows() != dim || p.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.rows(),
                });
            }
            if outcomes[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::InvalidMeasurement {
                    reason: format!("duplicate outcome label {label}"),
                });
            }
            let report = validate(p, ValidationKind::Projector, STRUCTURAL_TOL);
            if !report.passed() {
                return Err(Error::InvalidMeasurement {
                    reason: format!("outcome {label}: {report}"),
                });
            }
        }
        let m = Self { n, outcomes };
        let orth = m.orthogonality_deviation();
        if orth > STRUCTURAL_TOL {
            return Err(Error::InvalidMeasurement {
                reason: format!("projectors not mutually orthogonal (deviation {orth:.3e})"),
            });
        }
        let comp = m.completeness_deviation();
        if comp > STRUCTURAL_TOL {
            return Err(Error::InvalidMeasurement {
                reason: format!("projectors do not resolve the identity (deviation {comp:.3e})"),
            });
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn outcomes(&self) -> &[(Outcome, ComplexMatrix)] {
        &self.outcomes
    }

    pub fn projector(&self, y: Outcome) -> Result<&ComplexMatrix> {
        self.outcomes
            .iter()
            .find(|(l, _)| *l == y)
            .map(|(_, p)| p)
            .ok_or(Error::UnknownOutcome { outcome: y })
    }

    /// Max `|Σ_y Π_y − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .outcomes
            .iter()
            .fold(ComplexMatrix::zeros(self.dim(), self.dim()), |acc, (_, p)| &acc + p);
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    /// Max `|Π_y Π_y'|` over distinct pairs.
    pub fn orthogonality_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (i, (_, a)) in self.outcomes.iter().enumerate() {
            for (_, b) in &self.outcomes[i + 1..] {
                dev = dev.max((a * b).max_abs());
            }
        }
        dev
    }

    /// `⟨ψ|Π_y|ψ⟩` for every outcome.
    pub fn probabilities_pure(&self, psi: &PureState) -> Result<Vec<f64>> {
        check_dim(self.dim(), psi.dim())?;
        self.outcomes
            .iter()
            .map(|(_, p)| Ok(p.sandwich(psi.amplitudes(), psi.amplitudes())?.re))
            .collect()
    }

    /// `Π_y|ψ⟩ / ‖Π_y|ψ⟩‖`.
    pub fn post_state_pure(&self, y: Outcome, psi: &PureState) -> Result<PureState> {
        check_dim(self.dim(), psi.dim())?;
        let projected = self.projector(y)?.apply(psi.amplitudes())?;
        let p: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        if p <= ZERO_PROBABILITY {
            return Err(Error::ZeroProbabilityOutcome {
                outcome: y,
                probability: p,
            });
        }
        PureState::renormalized(projected)
    }

    /// Samples an outcome on a pure state and returns it with the collapsed state.
    pub fn sample_pure<R: Rng + ?Sized>(&self, psi: &PureState, rng: &mut R) -> Result<(Outcome, PureState)> {
        let probs = self.probabilities_pure(psi)?;
        let y = self.outcomes[super::inverse_cdf(&probs, rng)].0;
        Ok((y, self.post_state_pure(y, psi)?))
    }

    /// Treats the projectors as POVM effects.
    pub fn to_povm(&self) -> super::Povm {
        super::Povm::from_parts(self.n, self.outcomes.clone())
    }

    /// True when every projector factors as `A_y ⊗ B_y` across `dims = (dA, dB)`.
    ///
    /// Each `Π_y` is realigned into a `dA² × dB²` matrix whose rank is one exactly
    /// when it is a product; the test is `σ₂ < 1e-8 · σ₁`.
    pub fn is_local(&self, dims: (usize, usize)) -> Result<bool> {
        let (da, db) = dims;
        if da == 0 || db == 0 || da * db != self.dim() {
            return Err(Error::BadSplit {
                dim_a: da,
                dim_b: db,
                dim: self.dim(),
            });
        }
        for (_, p) in &self.outcomes {
            if !is_product_operator(p, da, db) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Realignment `R[(i,i'),(j,j')] = M[(i,j),(i',j')]`.
fn realign(m: &ComplexMatrix, da: usize, db: usize) -> ComplexMatrix {
    let mut r = ComplexMatrix::zeros(da * da, db * db);
    for i in 0..da {
        for ip in 0..da {
            for j in 0..db {
                for jp in 0..db {
                    r.set(i * da + ip, j * db + jp, m.get(i * db + j, ip * db + jp));
                }
            }
        }
    }
    r
}

fn is_product_operator(m: &ComplexMatrix, da: usize, db: usize) -> bool {
    let r = realign(m, da, db);
    let (sigma1, u) = top_left_singular(&r);
    if sigma1 == 0.0 {
        return true;
    }
    // deflate the top singular direction; σ₂(R) = σ₁((I − u u†) R)
    let uu = ComplexMatrix::outer(&u, &u);
    let residual = &r - &(&uu * &r);
    let sigma2 = largest_singular_value(&residual);
    sigma2 < 1e-8 * sigma1
}

/// `Σ_x |v_x⟩⟨v_x|` for pairwise orthonormal `vs`.
pub fn projector_from_vectors(vs: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let dim = vs.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(Error::NotOrthonormal { deviation: f64::INFINITY });
    }
    let deviation = orthonormality_deviation(vs)?;
    if deviation > STRUCTURAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for v in vs {
        out = &out + &ComplexMatrix::outer(v, v);
    }
    Ok(out)
}

/// Max `|⟨v_i|v_j⟩ − δ_ij|`.
pub fn orthonormality_deviation(vs: &[Vec<Complex64>]) -> Result<f64> {
    let dim = vs.first().map_or(0, Vec::len);
    let mut dev: f64 = 0.0;
    for (i, a) in vs.iter().enumerate() {
        if a.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.len(),
            });
        }
        for (j, b) in vs.iter().enumerate().skip(i) {
            let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((ip - target).norm());
        }
    }
    Ok(dev)
}

/// `Π_y = Σ_{x ∈ X_y} |v_x⟩⟨v_x|`; outcome `y` is the index of `X_y` in `partition`.
pub fn measurement_from_partition(
    basis: &[Vec<Complex64>],
    partition: &[Vec<usize>],
) -> Result<ProjectiveMeasurement> {
    let dim = basis.len();
    qubit_count(dim)?;
    if basis.iter().any(|v| v.len() != dim) {
        return Err(Error::NotOrthonormal { deviation: f64::INFINITY });
    }
    let deviation = orthonormality_deviation(basis)?;
    if deviation > STRUCTURAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let mut seen = vec![false; dim];
    for set in partition {
        if set.is_empty() {
            return Err(Error::BadPartition {
                reason: "empty subset".into(),
            });
        }
        for &x in set {
            if x >= dim {
                return Err(Error::BadPartition {
                    reason: format!("index {x} out of range"),
                });
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::BadPartition {
                    reason: format!("index {x} appears twice"),
                });
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::BadPartition {
            reason: format!("index {missing} not covered"),
        });
    }
    let outcomes = partition
        .iter()
        .enumerate()
        .map(|(y, set)| {
            let vs: Vec<Vec<Complex64>> = set.iter().map(|&x| basis[x].clone()).collect();
            Ok((y, projector_from_vectors(&vs)?))
        })
        .collect::<Result<Vec<_>>>()?;
    ProjectiveMeasurement::new(outcomes)
}

/// Computational basis of `n` qubits as vectors.
pub fn computational_basis(n: usize) -> Vec<Vec<Complex64>> {
    (0..1usize << n)
        .map(|x| PureState::basis(n, x).into_amplitudes())
        .collect()
}

/// Rank-1 measurement `{|x⟩⟨x|}` in the computational basis.
pub fn computational_measurement(n: usize) -> ProjectiveMeasurement {
    let partition: Vec<Vec<usize>> = (0..1usize << n).map(|x| vec![x]).collect();
    measurement_from_partition(&computational_basis(n), &partition).expect("valid basis")
}

/// Even/odd Hamming-weight measurement: `Π₀` spans even-weight basis states.
pub fn parity_measurement(n: usize) -> ProjectiveMeasurement {
    assert!(n >= 1, "parity measurement needs at least one qubit");
    let (even, odd): (Vec<usize>, Vec<usize>) =
        (0..1usize << n).partition(|x| x.count_ones() % 2 == 0);
    measurement_from_partition(&computational_basis(n), &[even, odd]).expect("valid partition")
}

/// Balanced measurement over an ordered basis.
///
/// Vector `k` is `|v_{x,y}⟩` with `y` the low `n_prime` bits of `k`, so
/// `Π_y = Σ_x |v_{x,y}⟩⟨v_{x,y}|`.
pub fn balanced_measurement(basis: &[Vec<Complex64>], n_prime: usize) -> Result<ProjectiveMeasurement> {
    let n = qubit_count(basis.len())?;
    if n_prime > n {
        return Err(Error::NotBalanced {
            reason: format!("{n_prime} outcome bits exceed {n} qubits"),
        });
    }
    let outcomes = 1usize << n_prime;
    let partition: Vec<Vec<usize>> = (0..outcomes)
        .map(|y| (0..basis.len()).filter(|k| k % outcomes == y).collect())
        .collect();
    measurement_from_partition(basis, &partition)
}

pub fn born_probabilities(m: &ProjectiveMeasurement, rho: &DensityState) -> Result<Vec<f64>> {
    m.probabilities(rho)
}

pub fn post_state(m: &ProjectiveMeasurement, y: Outcome, rho: &DensityState) -> Result<DensityState> {
    m.post_state(y, rho)
}

/// Born sampling by inverse CDF, paired with the collapsed state.
pub fn sample<R: Rng + ?Sized>(
    m: &ProjectiveMeasurement,
    rho: &DensityState,
    rng: &mut R,
) -> Result<(Outcome, DensityState)> {
    let probs = m.probabilities(rho)?;
    let y = m.outcomes[super::inverse_cdf(&probs, rng)].0;
    Ok((y, m.post_state(y, rho)?))
}

impl Measurement for ProjectiveMeasurement {
    fn n(&self) -> usize {
        self.n
    }

    fn labels(&self) -> Vec<Outcome> {
        self.outcomes.iter().map(|(l, _)| *l).collect()
    }

    /// `p_y = tr(Π_y ρ)`.
    fn probabilities(&self, rho: &DensityState) -> Result<Vec<f64>> {
        check_dim(self.dim(), rho.dim())?;
        Ok(self
            .outcomes
            .iter()
            .map(|(_, p)| trace_product(p, rho.matrix()))
            .collect())
    }

    /// `Π_y ρ Π_y / tr(Π_y ρ)`.
    fn post_state(&self, y: Outcome, rho: &DensityState) -> Result<DensityState> {
        check_dim(self.dim(), rho.dim())?;
        let p = self.projector(y)?;
        let prob = trace_product(p, rho.matrix());
        if prob <= ZERO_PROBABILITY {
            return Err(Error::ZeroProbabilityOutcome {
                outcome: y,
                probability: prob,
            });
        }
        let out = (&(p * rho.matrix()) * p).scale_real(1.0 / prob);
        Ok(DensityState::from_matrix_unchecked(out))
    }
}

/// `Re tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a.get(i, k) * b.get(k, i);
        }
    }
    s.re
}
