//! Quantum channels in Kraus form.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    embed_operator, gates, qubit_count, unitary_deviation, ComplexMatrix, Predicate, ValidationReport,
    STRUCTURAL_TOL,
};
use crate::measure::inverse_cdf;
use crate::states::{DensityState, Ensemble, PureState};

/// Kraus matrices below this Frobenius norm are dropped after composition.
pub const KRAUS_PRUNE_TOL: f64 = 1e-14;

/// `ρ ↦ Σ_y K_y ρ K_y†`, each `K_y` of shape `2^{n_out} × 2^{n_in}`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    n_in: usize,
    n_out: usize,
    kraus: Vec<ComplexMatrix>,
    deviation: OnceLock<f64>,
}

impl KrausChannel {
    fn from_parts(n_in: usize, n_out: usize, kraus: Vec<ComplexMatrix>) -> Self {
        Self {
            n_in,
            n_out,
            kraus,
            deviation: OnceLock::new(),
        }
    }

    /// Checks shapes only; completeness is reported by [`KrausChannel::validate`]
    /// and enforced by [`KrausChannel::apply`].
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::InvalidChannel {
            deviation: f64::INFINITY,
        })?;
        let (rows, cols) = (first.rows(), first.cols());
        let n_out = qubit_count(rows)?;
        let n_in = qubit_count(cols)?;
        if let Some(k) = kraus.iter().find(|k| k.rows() != rows || k.cols() != cols) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: k.rows(),
            });
        }
        Ok(Self::from_parts(n_in, n_out, kraus))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(n, n, vec![ComplexMatrix::identity(1 << n)])
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Max `|Σ K†K − I|`, computed once per channel.
    pub fn completeness_deviation(&self) -> f64 {
        *self.deviation.get_or_init(|| {
            let d = 1usize << self.n_in;
            let sum = self
                .kraus
                .iter()
                .fold(ComplexMatrix::zeros(d, d), |acc, k| &acc + &(&k.dagger() * k));
            sum.max_abs_diff(&ComplexMatrix::identity(d))
        })
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        report.check(Predicate::Completeness, self.completeness_deviation(), tol);
        report
    }

    fn ensure_valid(&self) -> Result<()> {
        let deviation = self.completeness_deviation();
        if deviation > STRUCTURAL_TOL {
            return Err(Error::InvalidChannel { deviation });
        }
        Ok(())
    }

    fn check_input(&self, dim: usize) -> Result<()> {
        if dim != 1 << self.n_in {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_in,
                found: dim,
            });
        }
        Ok(())
    }

    /// `Σ_y K_y ρ K_y†`.
    pub fn apply(&self, rho: &DensityState) -> Result<DensityState> {
        self.ensure_valid()?;
        self.check_input(rho.dim())?;
        let d = 1usize << self.n_out;
        let out = self.kraus.iter().fold(ComplexMatrix::zeros(d, d), |acc, k| {
            &acc + &(&(k * rho.matrix()) * &k.dagger())
        });
        Ok(DensityState::from_matrix_unchecked(out.hermitian_part()))
    }

    /// Picks branch `y` with probability `‖K_y ψ‖²` and returns it with the normalized
    /// `K_y ψ`. Averaging the branches reproduces [`KrausChannel::apply`].
    pub fn sample_branch<R: Rng + ?Sized>(&self, psi: &PureState, rng: &mut R) -> Result<(usize, PureState)> {
        self.ensure_valid()?;
        self.check_input(psi.dim())?;
        let images: Vec<Vec<Complex64>> = self
            .kraus
            .iter()
            .map(|k| k.apply(psi.amplitudes()))
            .collect::<Result<_>>()?;
        let probs: Vec<f64> = images
            .iter()
            .map(|v| v.iter().map(|a| a.norm_sqr()).sum())
            .collect();
        let y = inverse_cdf(&probs, rng);
        Ok((y, PureState::renormalized(images[y].clone())?))
    }
}

pub fn kraus_validate(c: &KrausChannel, tol: f64) -> ValidationReport {
    c.validate(tol)
}

pub fn apply(c: &KrausChannel, rho: &DensityState) -> Result<DensityState> {
    c.apply(rho)
}

/// Kraus set `K_y = (⟨y| ⊗ I) U (|0⟩ ⊗ I)` for `n_prime` leading ancillas.
pub fn channel_from_dilation(u: &ComplexMatrix, n_prime: usize) -> Result<KrausChannel> {
    let total = qubit_count(u.ensure_square()?)?;
    if n_prime > total {
        return Err(Error::BadDimension { dim: u.rows() });
    }
    let deviation = unitary_deviation(u);
    if deviation > STRUCTURAL_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let d = 1usize << (total - n_prime);
    KrausChannel::new((0..1usize << n_prime).map(|y| u.block(y * d, 0, d, d)).collect())
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbabilities {
            reason: format!("{p} outside [0, 1]"),
        });
    }
    Ok(())
}

/// `ρ ↦ p₀ρ + p₁XρX + p₂YρY + p₃ZρZ`.
pub fn pauli_channel(p: [f64; 4]) -> Result<KrausChannel> {
    for &pk in &p {
        check_probability(pk)?;
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > STRUCTURAL_TOL {
        return Err(Error::BadProbabilities {
            reason: format!("probabilities sum to {sum}"),
        });
    }
    let paulis = [ComplexMatrix::identity(2), gates::x(), gates::y(), gates::z()];
    KrausChannel::new(
        p.iter()
            .zip(paulis)
            .filter(|(&pk, _)| pk > 0.0)
            .map(|(&pk, m)| m.scale_real(pk.sqrt()))
            .collect(),
    )
}

/// `ρ ↦ (1−p)ρ + pXρX`.
pub fn bit_flip(p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    if p > 0.5 {
        log::warn!("bit-flip probability {p} exceeds 1/2; equivalent to X followed by bit_flip({})", 1.0 - p);
    }
    pauli_channel([1.0 - p, p, 0.0, 0.0])
}

/// `ρ ↦ (1−p)ρ + pZρZ`.
pub fn dephasing(p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    if p > 0.5 {
        log::warn!("dephasing probability {p} exceeds 1/2; equivalent to Z followed by dephasing({})", 1.0 - p);
    }
    pauli_channel([1.0 - p, 0.0, 0.0, p])
}

/// Zero-qubit input channel with Kraus columns `√p_x |v_x⟩`.
pub fn state_prep_channel(e: &Ensemble) -> Result<KrausChannel> {
    KrausChannel::new(
        e.members()
            .iter()
            .map(|(p, s)| ComplexMatrix::column(s.amplitudes()).scale_real(p.sqrt()))
            .collect(),
    )
}

/// Full decoherence in the computational basis, `K_x = |x⟩⟨x|`.
pub fn classical_channel(n: usize) -> KrausChannel {
    let d = 1usize << n;
    let kraus = (0..d)
        .map(|x| {
            let mut k = ComplexMatrix::zeros(d, d);
            k.set(x, x, Complex64::new(1.0, 0.0));
            k
        })
        .collect();
    KrausChannel::from_parts(n, n, kraus)
}

/// Lifts each Kraus map onto `targets` of an `n_total`-qubit register.
pub fn embed(c: &KrausChannel, targets: &[usize], n_total: usize) -> Result<KrausChannel> {
    if c.n_in != c.n_out || targets.len() != c.n_in {
        return Err(Error::BadTarget {
            reason: format!(
                "{} targets for a channel on {} -> {} qubits",
                targets.len(),
                c.n_in,
                c.n_out
            ),
        });
    }
    let kraus = c
        .kraus
        .iter()
        .map(|k| embed_operator(k, targets, n_total))
        .collect::<Result<Vec<_>>>()?;
    Ok(KrausChannel::from_parts(n_total, n_total, kraus))
}

/// `c2 ∘ c1`: `c1` acts first. Kraus set `{K₂ᵢ K₁ⱼ}` with negligible products pruned.
pub fn compose(c2: &KrausChannel, c1: &KrausChannel) -> Result<KrausChannel> {
    if c2.n_in != c1.n_out {
        return Err(Error::DimensionMismatch {
            expected: 1 << c2.n_in,
            found: 1 << c1.n_out,
        });
    }
    let mut kraus = Vec::with_capacity(c1.kraus.len() * c2.kraus.len());
    for k2 in &c2.kraus {
        for k1 in &c1.kraus {
            let k = k2 * k1;
            if k.frobenius_norm() >= KRAUS_PRUNE_TOL {
                kraus.push(k);
            }
        }
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(1 << c2.n_out, 1 << c1.n_in));
    }
    Ok(KrausChannel::from_parts(c1.n_in, c2.n_out, kraus))
}
