use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{trace_product, Measurement, ProjectiveMeasurement};
use crate::error::{Error, Result};
use crate::linalg::{
    degeneracy_tol, eig_hermitian, embed_operator, pauli_decompose, pauli_matrix, pauli_string_matrix,
    pauli_trace, qubit_count, ComplexMatrix,
};
use crate::states::{DensityState, PureState};

/// Hermitian observable with its grouped spectral measurement.
///
/// `spectral` is sorted by descending value, and outcome label `y` of
/// [`Observable::measurement`] is the index into it.
#[derive(Clone, Debug)]
pub struct Observable {
    n: usize,
    matrix: ComplexMatrix,
    spectral: Vec<(f64, ComplexMatrix)>,
}

impl Observable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &[(f64, ComplexMatrix)] {
        &self.spectral
    }

    pub fn values(&self) -> Vec<f64> {
        self.spectral.iter().map(|(v, _)| *v).collect()
    }

    /// `Σ o_y Π_y`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = 1 << self.n;
        self.spectral
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, (v, p)| &acc + &p.scale_real(*v))
    }

    /// The projective measurement `{Π_y}` labeled by spectral index.
    pub fn measurement(&self) -> ProjectiveMeasurement {
        ProjectiveMeasurement::new(
            self.spectral
                .iter()
                .enumerate()
                .map(|(y, (_, p))| (y, p.clone()))
                .collect(),
        )
        .expect("spectral projectors form a measurement")
    }
}

/// Groups the eigenvalues of `h` into distinct outcomes.
pub fn observable_from_hermitian(h: &ComplexMatrix, tol: f64) -> Result<Observable> {
    let n = qubit_count(h.ensure_square()?)?;
    let dec = eig_hermitian(h, tol)?;
    let spectral = dec
        .group_degenerate(degeneracy_tol(h))
        .into_iter()
        .map(|g| (g.value, dec.projector(&g.members)))
        .collect();
    Ok(Observable {
        n,
        matrix: h.clone(),
        spectral,
    })
}

fn check_dim(o: &Observable, rho: &DensityState) -> Result<()> {
    if o.matrix.rows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: o.matrix.rows(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `Re tr(O ρ)`.
pub fn expectation(o: &Observable, rho: &DensityState) -> Result<f64> {
    check_dim(o, rho)?;
    Ok(trace_product(&o.matrix, rho.matrix()))
}

/// `Σ_s a_s ⟨P_s⟩_ρ` with `a_s = tr(O P_s) / 2^n`.
pub fn expectation_via_pauli(o: &Observable, rho: &DensityState) -> Result<f64> {
    check_dim(o, rho)?;
    let coeffs = pauli_decompose(&o.matrix)?;
    Ok(coeffs
        .iter()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(s, a)| (a * pauli_trace(rho.matrix(), &s)).re)
        .sum())
}

/// True iff `‖O₁O₂ − O₂O₁‖_max ≤ tol`.
pub fn compatible(o1: &Observable, o2: &Observable, tol: f64) -> Result<bool> {
    let (a, b) = (&o1.matrix, &o2.matrix);
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.rows(),
        });
    }
    Ok((a * b).max_abs_diff(&(b * a)) <= tol)
}

/// Tensor product of single-qubit Paulis, `0..=3` for `I, X, Y, Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString(pub Vec<u8>);

impl PauliString {
    pub fn new(s: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = s.iter().find(|&&k| k > 3) {
            return Err(Error::InvalidMeasurement {
                reason: format!("Pauli index {bad} out of range"),
            });
        }
        Ok(Self(s))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        pauli_string_matrix(&self.0)
    }

    pub fn observable(&self) -> Observable {
        observable_from_hermitian(&self.matrix(), 1e-10).expect("Pauli strings are Hermitian")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses strings such as `"ZZ"` or `"XIY"`.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(0),
                'X' => Ok(1),
                'Y' => Ok(2),
                'Z' => Ok(3),
                other => Err(Error::InvalidMeasurement {
                    reason: format!("unknown Pauli factor '{other}'"),
                }),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &k in &self.0 {
            f.write_str(["I", "X", "Y", "Z"][k as usize])?;
        }
        Ok(())
    }
}

/// `(I + sign·P_k)/2` on qubit `k` of an `n`-qubit register.
fn factor_projector(s: u8, k: usize, n: usize, plus: bool) -> ComplexMatrix {
    let sign = if plus { 1.0 } else { -1.0 };
    let local = (&ComplexMatrix::identity(2) + &pauli_matrix(s).scale_real(sign)).scale_real(0.5);
    embed_operator(&local, &[k], n).expect("qubit in range")
}

fn check_pauli(p: &PauliString, psi: &PureState) -> Result<()> {
    if p.n() != psi.n() {
        return Err(Error::DimensionMismatch {
            expected: 1 << p.n(),
            found: psi.dim(),
        });
    }
    Ok(())
}

/// Measures each non-identity factor in its own eigenbasis, qubit 0 first, and
/// returns the product of the `±1` results.
pub fn sample_pauli_local<R: Rng + ?Sized>(p: &PauliString, psi: &PureState, rng: &mut R) -> Result<i8> {
    let order: Vec<usize> = (0..p.n()).collect();
    sample_pauli_local_ordered(p, psi, &order, rng)
}

/// [`sample_pauli_local`] with an explicit factor order.
pub fn sample_pauli_local_ordered<R: Rng + ?Sized>(
    p: &PauliString,
    psi: &PureState,
    order: &[usize],
    rng: &mut R,
) -> Result<i8> {
    check_pauli(p, psi)?;
    let n = p.n();
    let mut state = psi.clone();
    let mut product = 1i8;
    for &k in order {
        let s = p.0[k];
        if s == 0 {
            continue;
        }
        let m = ProjectiveMeasurement::new(vec![
            (0, factor_projector(s, k, n, true)),
            (1, factor_projector(s, k, n, false)),
        ])?;
        let (y, post) = m.sample_pure(&state, rng)?;
        if y == 1 {
            product = -product;
        }
        state = post;
    }
    Ok(product)
}

/// Exact `[P(+1), P(−1)]` of the local-product procedure in the given factor order,
/// computed by branching over every intermediate outcome.
pub fn exact_pauli_distribution(p: &PauliString, psi: &PureState, order: &[usize]) -> Result<[f64; 2]> {
    check_pauli(p, psi)?;
    let n = p.n();
    // (probability, sign, unnormalized branch state as a density matrix)
    let mut branches = vec![(1.0f64, 1i8, psi.to_density())];
    for &k in order {
        let s = p.0[k];
        if s == 0 {
            continue;
        }
        let m = ProjectiveMeasurement::new(vec![
            (0, factor_projector(s, k, n, true)),
            (1, factor_projector(s, k, n, false)),
        ])?;
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (prob, sign, rho) in branches {
            let probs = m.probabilities(&rho)?;
            for (y, &py) in probs.iter().enumerate() {
                if py <= super::ZERO_PROBABILITY {
                    continue;
                }
                let post = m.post_state(y, &rho)?;
                next.push((prob * py, if y == 1 { -sign } else { sign }, post));
            }
        }
        branches = next;
    }
    let mut out = [0.0; 2];
    for (prob, sign, _) in branches {
        out[if sign > 0 { 0 } else { 1 }] += prob;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gates, kron};
    use crate::measure::parity_measurement;
    use crate::states::BellState;
    use rand::SeedableRng;

    #[test]
    fn z_and_zz_spectra() {
        let o = observable_from_hermitian(&gates::z(), 1e-10).unwrap();
        assert_eq!(o.values(), vec![1.0, -1.0]);
        assert!(o.spectral()[0].1.max_abs_diff(&ComplexMatrix::diag_real(&[1.0, 0.0])) < 1e-12);

        let zz = observable_from_hermitian(&kron(&gates::z(), &gates::z()), 1e-10).unwrap();
        let parity = parity_measurement(2);
        assert_eq!(zz.values(), vec![1.0, -1.0]);
        assert!(zz.spectral()[0].1.max_abs_diff(parity.projector(0).unwrap()) < 1e-12);
        assert!(zz.spectral()[1].1.max_abs_diff(parity.projector(1).unwrap()) < 1e-12);

        let id = observable_from_hermitian(&ComplexMatrix::identity(8), 1e-10).unwrap();
        assert_eq!(id.spectral().len(), 1);
        assert_eq!(id.values(), vec![1.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(observable_from_hermitian(&m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expectation_examples() {
        let z = observable_from_hermitian(&gates::z(), 1e-10).unwrap();
        assert!(expectation(&z, &PureState::plus(1).to_density()).unwrap().abs() < 1e-15);
        let psi = PureState::from_real(&[0.6, 0.8]).unwrap();
        assert!((expectation(&z, &psi.to_density()).unwrap() - (0.36 - 0.64)).abs() < 1e-15);

        let zz = PauliString::from_str("ZZ").unwrap().observable();
        let phi = PureState::bell(BellState::PhiPlus).to_density();
        assert!((expectation(&zz, &phi).unwrap() - 1.0).abs() < 1e-12);
        assert!((expectation_via_pauli(&zz, &phi).unwrap() - 1.0).abs() < 1e-12);

        let id = observable_from_hermitian(&ComplexMatrix::identity(4), 1e-10).unwrap();
        assert!((expectation_via_pauli(&id, &phi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compatibility_examples() {
        let zi = observable_from_hermitian(&kron(&gates::z(), &ComplexMatrix::identity(2)), 1e-10).unwrap();
        let zz = PauliString::from_str("ZZ").unwrap().observable();
        assert!(compatible(&zi, &zz, 1e-10).unwrap());
        let z = PauliString::from_str("Z").unwrap().observable();
        let x = PauliString::from_str("X").unwrap().observable();
        assert!(!compatible(&z, &x, 1e-10).unwrap());
        let xi = PauliString::from_str("XI").unwrap().observable();
        let iz = PauliString::from_str("IZ").unwrap().observable();
        assert!(compatible(&xi, &iz, 1e-10).unwrap());
        assert!(compatible(&z, &zz, 1e-10).is_err());
    }

    #[test]
    fn local_sampling_examples() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let zz = PauliString::from_str("ZZ").unwrap();
        let phi = PureState::bell(BellState::PhiPlus);
        for _ in 0..200 {
            assert_eq!(sample_pauli_local(&zz, &phi, &mut rng).unwrap(), 1);
        }
        let z = PauliString::from_str("Z").unwrap();
        for _ in 0..50 {
            assert_eq!(sample_pauli_local(&z, &PureState::basis(1, 1), &mut rng).unwrap(), -1);
        }
        assert!(sample_pauli_local(&zz, &PureState::basis(1, 0), &mut rng).is_err());
    }

    #[test]
    fn pauli_string_parse_and_display() {
        let p: PauliString = "xIyZ".parse().unwrap();
        assert_eq!(p.0, vec![1, 0, 2, 3]);
        assert_eq!(p.to_string(), "XIYZ");
        assert!("XQ".parse::<PauliString>().is_err());
    }
}
