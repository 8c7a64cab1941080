//! Pure states, density matrices and ensembles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, qubit_count, validate, ComplexMatrix, ValidationKind, ONE, ZERO};

/// Tolerance on `Σ|α|² = 1` and on the density-matrix invariants.
pub const NORM_TOL: f64 = 1e-10;

/// Normalized amplitude vector of `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl PureState {
    /// Rejects vectors whose squared norm deviates from one by more than [`NORM_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = qubit_count(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { n, amplitudes })
    }

    /// Scales an arbitrary nonzero vector to unit norm.
    pub fn renormalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = qubit_count(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= f64::MIN_POSITIVE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let k = 1.0 / norm_sqr.sqrt();
        Ok(Self {
            n,
            amplitudes: amplitudes.into_iter().map(|a| a * k).collect(),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` on `n` qubits.
    pub fn basis(n: usize, index: usize) -> Self {
        assert!(index < 1 << n, "basis index {index} out of range for {n} qubits");
        let mut amplitudes = vec![ZERO; 1 << n];
        amplitudes[index] = ONE;
        Self { n, amplitudes }
    }

    /// Basis vector from a bit string such as `"010"`; qubit 0 is the leftmost character.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let mut index = 0usize;
        for ch in bits.chars() {
            index = match ch {
                '0' => index << 1,
                '1' => (index << 1) | 1,
                _ => {
                    return Err(Error::BadSelector {
                        reason: format!("invalid bit character {ch:?} in {bits:?}"),
                    })
                }
            };
        }
        if bits.is_empty() {
            return Err(Error::BadDimension { dim: 0 });
        }
        Ok(Self::basis(bits.len(), index))
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus(n: usize) -> Self {
        let a = Complex64::new((1.0 / (1u64 << n) as f64).sqrt(), 0.0);
        Self {
            n,
            amplitudes: vec![a; 1 << n],
        }
    }

    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(&[h, -h]).expect("normalized")
    }

    pub fn bell(which: BellState) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = match which {
            BellState::PhiPlus => [h, 0.0, 0.0, h],
            BellState::PhiMinus => [h, 0.0, 0.0, -h],
            BellState::PsiPlus => [0.0, h, h, 0.0],
            BellState::PsiMinus => [0.0, h, -h, 0.0],
        };
        Self::from_real(&amps).expect("normalized")
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(n: usize) -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amplitudes = vec![ZERO; 1 << n];
        amplitudes[0] = h;
        amplitudes[(1 << n) - 1] = h;
        Self { n, amplitudes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a unitary; the result is re-checked for normalization.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(u.apply(&self.amplitudes)?)
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &Self) -> Self {
        let a = ComplexMatrix::column(&self.amplitudes);
        let b = ComplexMatrix::column(&other.amplitudes);
        Self {
            n: self.n + other.n,
            amplitudes: kron(&a, &b).data().to_vec(),
        }
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        let p = Complex64::from_polar(1.0, theta);
        Self {
            n: self.n,
            amplitudes: self.amplitudes.iter().map(|&a| a * p).collect(),
        }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn to_density(&self) -> DensityState {
        DensityState {
            n: self.n,
            rho: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

/// Free-function form of [`PureState::to_density`].
pub fn to_density(psi: &PureState) -> DensityState {
    psi.to_density()
}

/// Hermitian, positive semidefinite, unit-trace matrix on `n` qubits.
///
/// `n = 0` is the scalar state `[1]`, the input of a state-preparation channel.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    n: usize,
    rho: ComplexMatrix,
}

impl DensityState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        rho.ensure_square()?;
        let n = qubit_count(rho.rows())?;
        let report = validate(&rho, ValidationKind::Density, NORM_TOL);
        if !report.passed() {
            return Err(Error::NotDensity {
                reason: report.to_string(),
            });
        }
        Ok(Self { n, rho })
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        Self {
            n,
            rho: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// The trivial state of zero qubits.
    pub fn scalar() -> Self {
        Self {
            n: 0,
            rho: ComplexMatrix::identity(1),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for r in 0..d {
            for c in 0..d {
                s += self.rho.get(r, c).norm_sqr();
            }
        }
        s
    }

    /// Real parts of the diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rho.get(i, i).re).collect()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap(&self, psi: &PureState) -> Result<f64> {
        Ok(self.rho.sandwich(psi.amplitudes(), psi.amplitudes())?.re)
    }

    /// Convex combination `Σ p_k ρ_k`. Weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, DensityState)]) -> Result<Self> {
        let sum: f64 = parts.iter().map(|(p, _)| p).sum();
        if parts.is_empty() || parts.iter().any(|(p, _)| *p < 0.0) || (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::ProbabilityMismatch { sum });
        }
        let dim = parts[0].1.dim();
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for (p, s) in parts {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            rho = &rho + &s.rho.scale_real(*p);
        }
        Ok(Self::from_matrix_unchecked(rho))
    }

    /// Wraps a matrix produced by a trace-preserving operation without re-running the eigensolver.
    pub(crate) fn from_matrix_unchecked(rho: ComplexMatrix) -> Self {
        let n = rho.rows().trailing_zeros() as usize;
        debug_assert_eq!(1usize << n, rho.rows());
        Self { n, rho }
    }
}

pub fn purity(rho: &DensityState) -> f64 {
    rho.purity()
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Probability-weighted list of pure states.
#[derive(Clone, Debug)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let sum: f64 = members.iter().map(|(p, _)| p).sum();
        let in_range = members.iter().all(|(p, _)| (0.0..=1.0).contains(p));
        if members.is_empty() || !in_range || (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::ProbabilityMismatch { sum });
        }
        let n = members[0].1.n();
        if let Some((_, s)) = members.iter().find(|(_, s)| s.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: s.dim(),
            });
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn n(&self) -> usize {
        self.members[0].1.n()
    }

    /// `Σ p_x |φ_x⟩⟨φ_x|`.
    pub fn to_density(&self) -> DensityState {
        let dim = 1usize << self.n();
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for (p, s) in &self.members {
            let term = ComplexMatrix::outer(s.amplitudes(), s.amplitudes()).scale_real(*p);
            rho = &rho + &term;
        }
        DensityState {
            n: self.n(),
            rho,
        }
    }
}

pub fn ensemble_to_density(e: &Ensemble) -> DensityState {
    e.to_density()
}
