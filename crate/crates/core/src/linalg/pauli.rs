//! Pauli matrices, Pauli strings and the Pauli-basis decomposition.

use num_complex::Complex64;

use super::matrix::{kron_all, qubit_count, ComplexMatrix, I, ONE, ZERO};
use crate::error::Result;

/// Single-qubit Pauli matrix `P_s` for `s ∈ {0,1,2,3}` = `{I, X, Y, Z}`.
pub fn pauli_matrix(s: u8) -> ComplexMatrix {
    let data = match s {
        0 => vec![ONE, ZERO, ZERO, ONE],
        1 => vec![ZERO, ONE, ONE, ZERO],
        2 => vec![ZERO, -I, I, ZERO],
        3 => vec![ONE, ZERO, ZERO, -ONE],
        _ => panic!("Pauli index {s} out of range"),
    };
    ComplexMatrix::new(2, 2, data).expect("2x2")
}

/// `P_{s_0} ⊗ … ⊗ P_{s_{n-1}}`.
pub fn pauli_string_matrix(s: &[u8]) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = s.iter().map(|&k| pauli_matrix(k)).collect();
    kron_all(&factors)
}

/// Bit mask flipped by the string and the phase picked up by column `x`.
///
/// `P_s |x⟩ = phase(x) |x ⊕ mask⟩`.
fn action(s: &[u8], x: usize) -> (usize, Complex64) {
    let n = s.len();
    let mut mask = 0usize;
    let mut phase = ONE;
    for (k, &sk) in s.iter().enumerate() {
        let shift = n - 1 - k;
        let bit = (x >> shift) & 1;
        match sk {
            0 => {}
            1 => mask |= 1 << shift,
            2 => {
                mask |= 1 << shift;
                phase *= if bit == 0 { I } else { -I };
            }
            3 => {
                if bit == 1 {
                    phase = -phase;
                }
            }
            _ => panic!("Pauli index {sk} out of range"),
        }
    }
    (mask, phase)
}

/// `tr(A · P_s)` in `O(2^n)` using the permutation-with-phases structure of `P_s`.
pub fn pauli_trace(a: &ComplexMatrix, s: &[u8]) -> Complex64 {
    let dim = 1usize << s.len();
    debug_assert_eq!(a.rows(), dim);
    (0..dim)
        .map(|x| {
            let (mask, phase) = action(s, x);
            a.get(x, x ^ mask) * phase
        })
        .sum()
}

/// Coefficients `a_s` of `A = Σ_s a_s P_s`, indexed by base-4 string with qubit 0 leading.
#[derive(Clone, Debug)]
pub struct PauliCoefficients {
    pub n: usize,
    coeffs: Vec<Complex64>,
}

impl PauliCoefficients {
    pub fn get(&self, s: &[u8]) -> Complex64 {
        self.coeffs[Self::index(s)]
    }

    fn index(s: &[u8]) -> usize {
        s.iter().fold(0usize, |acc, &k| acc * 4 + k as usize)
    }

    pub fn string(n: usize, index: usize) -> Vec<u8> {
        (0..n).map(|k| ((index >> (2 * (n - 1 - k))) & 3) as u8).collect()
    }

    /// All `(s, a_s)` pairs in lexicographic order of `s`.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u8>, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (Self::string(self.n, i), c))
    }

    /// Largest imaginary part over all coefficients.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ_s a_s P_s`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = 1usize << self.n;
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let s = Self::string(self.n, i);
            for x in 0..dim {
                let (mask, phase) = action(&s, x);
                let row = x ^ mask;
                let cur = out.get(row, x);
                out.set(row, x, cur + c * phase);
            }
        }
        out
    }
}

/// Expands a `2^n × 2^n` matrix in the Pauli basis: `a_s = tr(A P_s) / 2^n`.
pub fn pauli_decompose(a: &ComplexMatrix) -> Result<PauliCoefficients> {
    a.ensure_square()?;
    let n = qubit_count(a.rows())?;
    let dim = a.rows() as f64;
    let coeffs = (0..1usize << (2 * n))
        .map(|i| pauli_trace(a, &PauliCoefficients::string(n, i)) / dim)
        .collect();
    Ok(PauliCoefficients { n, coeffs })
}
