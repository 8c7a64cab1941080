//! Dense complex linear algebra.
//!
//! Qubit 0 is the most-significant bit of a computational-basis index, so
//! `kron(A, B)` places `A` on the leading qubits.

mod eigen;
mod matrix;
mod pauli;
mod validate;

pub use eigen::{
    degeneracy_tol, eig_hermitian, min_eigenvalue, sqrt_psd, EigenGroup, SpectralDecomposition,
    DEGENERACY_TOL,
};
pub(crate) use eigen::{largest_singular_value, top_left_singular};
pub use matrix::{
    dagger, embed_operator, kron, kron_all, partial_trace, qubit_count, trace, ComplexJson,
    ComplexMatrix, Subsystem, I, ONE, ZERO,
};
pub(crate) use matrix::check_targets;
pub use pauli::{pauli_decompose, pauli_matrix, pauli_string_matrix, pauli_trace, PauliCoefficients};
pub use validate::{
    psd_deviation, unitary_deviation, validate, Predicate, ValidationFailure, ValidationKind,
    ValidationReport, STRUCTURAL_TOL,
};

/// Named single- and two-qubit gates.
pub mod gates {
    use super::{ComplexMatrix, I, ONE, ZERO};

    pub fn x() -> ComplexMatrix {
        super::pauli_matrix(1)
    }

    pub fn y() -> ComplexMatrix {
        super::pauli_matrix(2)
    }

    pub fn z() -> ComplexMatrix {
        super::pauli_matrix(3)
    }

    pub fn h() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, 2, &[s, s, s, -s]).expect("2x2")
    }

    pub fn s() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, I]).expect("2x2")
    }

    /// CNOT with the first qubit as control.
    pub fn cnot() -> ComplexMatrix {
        ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
        .expect("4x4")
    }

    pub fn cz() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, 1.0, 1.0, -1.0])
    }
}
