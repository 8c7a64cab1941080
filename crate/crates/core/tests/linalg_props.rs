use proptest::prelude::*;
use qmeas::linalg::{
    eig_hermitian, embed_operator, kron, partial_trace, pauli_decompose, pauli_string_matrix, pauli_trace,
    sqrt_psd, validate, ComplexMatrix, Subsystem, ValidationKind,
};
use qmeas::random::{random_density, random_hermitian, random_psd, random_unitary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Swaps qubits `a` and `b` of an `n`-qubit register.
fn swap_permutation(n: usize, a: usize, b: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let mut p = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        let (sa, sb) = (n - 1 - a, n - 1 - b);
        let (ba, bb) = ((i >> sa) & 1, (i >> sb) & 1);
        let j = (i & !(1 << sa) & !(1 << sb)) | (bb << sa) | (ba << sb);
        p.set(j, i, qmeas::linalg::ONE);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn spectral_reconstruction(seed in any::<u64>(), n in 1usize..=3) {
        let h = random_hermitian(1 << n, &mut rng(seed));
        let dec = eig_hermitian(&h, 1e-10).unwrap();
        prop_assert!(dec.reconstruct().max_abs_diff(&h) < 1e-8);
        for w in dec.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        // eigenvectors orthonormal
        let d = dec.dim();
        let mut v = ComplexMatrix::zeros(d, d);
        for (c, vec) in dec.eigenvectors.iter().enumerate() {
            for (r, &x) in vec.iter().enumerate() {
                v.set(r, c, x);
            }
        }
        prop_assert!(validate(&v, ValidationKind::Unitary, 1e-10).passed());
    }

    #[test]
    fn pauli_roundtrip_and_real_coefficients(seed in any::<u64>(), n in 1usize..=3) {
        let h = random_hermitian(1 << n, &mut rng(seed));
        let coeffs = pauli_decompose(&h).unwrap();
        prop_assert!(coeffs.reconstruct().max_abs_diff(&h) < 1e-10);
        prop_assert!(coeffs.max_imag() < 1e-10);
    }

    #[test]
    fn fast_pauli_trace_matches_dense(seed in any::<u64>(), s in proptest::collection::vec(0u8..4, 1..=3)) {
        let a = qmeas::random::random_matrix(1 << s.len(), 1 << s.len(), &mut rng(seed));
        let dense = (&a * &pauli_string_matrix(&s)).trace().unwrap();
        prop_assert!((pauli_trace(&a, &s) - dense).norm() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), na in 1usize..=2, nb in 1usize..=2) {
        let mut r = rng(seed);
        let a = random_density(na, &mut r);
        let b = random_density(nb, &mut r);
        let ab = kron(a.matrix(), b.matrix());
        let dims = (1 << na, 1 << nb);
        prop_assert!(partial_trace(&ab, dims, Subsystem::B).unwrap().max_abs_diff(a.matrix()) < 1e-12);
        prop_assert!(partial_trace(&ab, dims, Subsystem::A).unwrap().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn psd_square_root_squares_back(seed in any::<u64>(), n in 1usize..=2) {
        let m = random_psd(1 << n, &mut rng(seed));
        let r = sqrt_psd(&m, 1e-10).unwrap();
        prop_assert!((&r * &r).max_abs_diff(&m) < 1e-8 * m.max_abs().max(1.0));
        prop_assert!(r.hermitian_deviation() < 1e-10);
    }

    #[test]
    fn embedding_equals_permuted_kron(seed in any::<u64>()) {
        // a two-qubit operator on qubits (2, 0) of three
        let u = random_unitary(4, &mut rng(seed));
        let direct = embed_operator(&u, &[2, 0], 3).unwrap();
        // kron places u on (0, 1); swap 1<->2 then 0<->1 moves its qubits to (2, 0)
        let on01 = kron(&u, &ComplexMatrix::identity(2));
        let p = &swap_permutation(3, 0, 1) * &swap_permutation(3, 1, 2);
        let oracle = &(&p.dagger() * &on01) * &p;
        prop_assert!(direct.max_abs_diff(&oracle) < 1e-12);
        prop_assert!(validate(&direct, ValidationKind::Unitary, 1e-10).passed());
    }
}
