use proptest::prelude::*;
use qmeas::linalg::{
    eig_hermitian, kron, min_eigenvalue, pauli_string_matrix, validate, ComplexMatrix, ValidationKind,
};
use qmeas::measure::{
    born_probabilities, compatible, exact_pauli_distribution, expectation, expectation_via_pauli,
    measurement_from_partition, observable_from_hermitian, parity_measurement, post_state,
    povm_from_dilation, povm_probabilities, projector_from_vectors, repeat_measurement_check, sample,
    sample_pauli_local, usd_povm, Measurement, PauliString, ProjectiveMeasurement,
};
use qmeas::random::{random_basis, random_density, random_hermitian, random_state, random_unitary};
use qmeas::states::{fidelity, BellState, DensityState, PureState};
use qmeas::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_measurement_invariants(m: &ProjectiveMeasurement) -> Result<(), TestCaseError> {
    let d = m.dim();
    let mut sum = ComplexMatrix::zeros(d, d);
    for (i, (_, p)) in m.outcomes().iter().enumerate() {
        prop_assert!(validate(p, ValidationKind::Projector, 1e-10).passed());
        for (_, q) in &m.outcomes()[i + 1..] {
            prop_assert!((p * q).max_abs() < 1e-10);
        }
        sum = &sum + p;
    }
    prop_assert!(sum.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-10);
    Ok(())
}

/// Random partition of `0..dim` into `k` nonempty sets.
fn random_partition<R: Rng>(dim: usize, k: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.shuffle(rng);
    let mut sets: Vec<Vec<usize>> = idx[..k].iter().map(|&i| vec![i]).collect();
    for &i in &idx[k..] {
        let j = rng.random_range(0..k);
        sets[j].push(i);
    }
    sets
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn partition_measurements_are_valid(seed in any::<u64>(), n in 1usize..=3, k in 1usize..=4) {
        let mut r = rng(seed);
        let dim = 1 << n;
        let k = k.min(dim);
        let basis = random_basis(dim, &mut r);
        let m = measurement_from_partition(&basis, &random_partition(dim, k, &mut r)).unwrap();
        check_measurement_invariants(&m)?;
        let rho = random_density(n, &mut r);
        let probs = born_probabilities(&m, &rho).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(probs.iter().all(|&p| p >= -1e-12));
    }

    #[test]
    fn projector_is_basis_independent(seed in any::<u64>()) {
        // rotate a 2-dim span by a random 2x2 unitary
        let mut r = rng(seed);
        let basis = random_basis(4, &mut r);
        let u = random_unitary(2, &mut r);
        let rotated: Vec<Vec<Complex64>> = (0..2)
            .map(|c| (0..4).map(|i| u.get(0, c) * basis[0][i] + u.get(1, c) * basis[1][i]).collect())
            .collect();
        let a = projector_from_vectors(&basis[..2]).unwrap();
        let b = projector_from_vectors(&rotated).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn observable_matches_grouped_eigenbasis_measurement(seed in any::<u64>(), n in 1usize..=3, degenerate in any::<bool>()) {
        let mut r = rng(seed);
        let dim = 1 << n;
        let h = if degenerate {
            // integer spectrum with repeats, rotated into a random basis
            let v = random_unitary(dim, &mut r);
            let diag: Vec<f64> = (0..dim).map(|_| r.random_range(-1i32..=1) as f64).collect();
            (&(&v * &ComplexMatrix::diag_real(&diag)) * &v.dagger()).hermitian_part()
        } else {
            random_hermitian(dim, &mut r)
        };
        let rho = random_density(n, &mut r);
        let o = observable_from_hermitian(&h, 1e-10).unwrap();
        prop_assert!(o.reconstruct().max_abs_diff(&h) < 1e-8);
        check_measurement_invariants(&o.measurement())?;
        let direct = o.measurement().probabilities(&rho).unwrap();

        // brute force: rank-1 measurement in the eigenbasis, grouped by eigenvalue
        let dec = eig_hermitian(&h, 1e-10).unwrap();
        let values = o.values();
        let mut grouped = vec![0.0; values.len()];
        for (lambda, v) in dec.eigenvalues.iter().zip(&dec.eigenvectors) {
            let p = rho.matrix().sandwich(v, v).unwrap().re;
            let slot = values
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - lambda).abs().total_cmp(&(b.1 - lambda).abs()))
                .unwrap()
                .0;
            grouped[slot] += p;
        }
        for (a, b) in direct.iter().zip(&grouped) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        for w in values.windows(2) {
            prop_assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn gentle_measurement(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let dim = 1 << n;
        let k = 2.min(dim);
        let basis = random_basis(dim, &mut r);
        let m = measurement_from_partition(&basis, &random_partition(dim, k, &mut r)).unwrap();
        let y = r.random_range(0..k);
        // random unit vector in range(Π_y)
        let proj = m.projector(y).unwrap();
        let v = proj.apply(&qmeas::random::random_vector(dim, &mut r)).unwrap();
        let psi = PureState::renormalized(v).unwrap();
        let probs = born_probabilities(&m, &psi.to_density()).unwrap();
        prop_assert!((probs[y] - 1.0).abs() < 1e-10);
        let post = post_state(&m, y, &psi.to_density()).unwrap();
        prop_assert!((post.overlap(&psi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expectation_routes_agree(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let o = observable_from_hermitian(&random_hermitian(1 << n, &mut r), 1e-10).unwrap();
        let rho = random_density(n, &mut r);
        let direct = expectation(&o, &rho).unwrap();
        let via = expectation_via_pauli(&o, &rho).unwrap();
        prop_assert!((direct - via).abs() < 1e-8);
        let spectral: f64 = o
            .values()
            .iter()
            .zip(o.measurement().probabilities(&rho).unwrap())
            .map(|(v, p)| v * p)
            .sum();
        prop_assert!((direct - spectral).abs() < 1e-8);
    }

    #[test]
    fn scaling_an_observable(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut r = rng(seed);
        let h = random_hermitian(4, &mut r);
        let rho = random_density(2, &mut r);
        let o = observable_from_hermitian(&h, 1e-10).unwrap();
        let oc = observable_from_hermitian(&h.scale_real(c), 1e-10).unwrap();
        let p = o.measurement().probabilities(&rho).unwrap();
        let pc = oc.measurement().probabilities(&rho).unwrap();
        for (a, b) in p.iter().zip(&pc) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let e = expectation(&o, &rho).unwrap();
        prop_assert!((expectation(&oc, &rho).unwrap() - c * e).abs() < 1e-10 * c.max(1.0) * e.abs().max(1.0));
    }

    #[test]
    fn compatibility_symmetric_and_conjugation_invariant(seed in any::<u64>(), commuting in any::<bool>()) {
        let mut r = rng(seed);
        let (a, b) = if commuting {
            // share an eigenbasis
            let v = random_unitary(4, &mut r);
            let d1: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
            let d2: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
            (
                (&(&v * &ComplexMatrix::diag_real(&d1)) * &v.dagger()).hermitian_part(),
                (&(&v * &ComplexMatrix::diag_real(&d2)) * &v.dagger()).hermitian_part(),
            )
        } else {
            (random_hermitian(4, &mut r), random_hermitian(4, &mut r))
        };
        let w = random_unitary(4, &mut r);
        let conj = |m: &ComplexMatrix| (&(&w * m) * &w.dagger()).hermitian_part();
        let o1 = observable_from_hermitian(&a, 1e-10).unwrap();
        let o2 = observable_from_hermitian(&b, 1e-10).unwrap();
        let c1 = observable_from_hermitian(&conj(&a), 1e-10).unwrap();
        let c2 = observable_from_hermitian(&conj(&b), 1e-10).unwrap();
        let base = compatible(&o1, &o2, 1e-8).unwrap();
        prop_assert_eq!(base, commuting);
        prop_assert_eq!(base, compatible(&o2, &o1, 1e-8).unwrap());
        prop_assert_eq!(base, compatible(&c1, &c2, 1e-8).unwrap());
    }

    #[test]
    fn dilation_povm_matches_ancilla_marginals(seed in any::<u64>(), n in 1usize..=2, n_prime in 1usize..=2) {
        let mut r = rng(seed);
        let u = random_unitary(1 << (n + n_prime), &mut r);
        let p = povm_from_dilation(&u, n_prime).unwrap();
        for (_, m) in p.effects() {
            prop_assert!(min_eigenvalue(m).unwrap() >= -1e-10);
        }
        prop_assert!(p.completeness_deviation() < 1e-10);
        // |0⟩_anc ⊗ ψ evolved by U, then ancilla marginals
        let psi = random_state(n, &mut r);
        let joint = PureState::basis(n_prime, 0).tensor(&psi).evolve(&u).unwrap();
        let d = 1usize << n;
        let probs = povm_probabilities(&p, &psi.to_density()).unwrap();
        for (y, &py) in probs.iter().enumerate() {
            let marginal: f64 = joint.amplitudes()[y * d..(y + 1) * d].iter().map(|a| a.norm_sqr()).sum();
            prop_assert!((marginal - py).abs() < 1e-10);
        }
    }

    #[test]
    fn usd_never_errs(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let psi0 = random_state(n, &mut r);
        let psi1 = random_state(n, &mut r);
        let c = psi0.inner(&psi1).unwrap().norm();
        let p = usd_povm(&psi0, &psi1).unwrap();
        for (_, m) in p.effects() {
            prop_assert!(min_eigenvalue(m).unwrap() >= -1e-10);
        }
        let on0 = povm_probabilities(&p, &psi0.to_density()).unwrap();
        let on1 = povm_probabilities(&p, &psi1.to_density()).unwrap();
        prop_assert!((on0[0] - (1.0 - c)).abs() < 1e-12);
        prop_assert!(on0[1].abs() < 1e-12);
        prop_assert!((on0[2] - c).abs() < 1e-12);
        prop_assert!(on1[0].abs() < 1e-12);
        prop_assert!((on1[1] - (1.0 - c)).abs() < 1e-12);
    }

    #[test]
    fn projective_measurements_are_repeatable(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let dim = 1 << n;
        let basis = random_basis(dim, &mut r);
        let m = measurement_from_partition(&basis, &random_partition(dim, 2.min(dim), &mut r)).unwrap();
        let rho = random_density(n, &mut r);
        let report = repeat_measurement_check(&m, &rho, &mut r).unwrap();
        prop_assert!(report.is_repeatable(1e-10));
    }

    #[test]
    fn local_pauli_product_is_order_invariant(seed in any::<u64>(), s in proptest::collection::vec(0u8..4, 2..=3)) {
        let mut r = rng(seed);
        let p = PauliString(s.clone());
        let psi = random_state(s.len(), &mut r);
        let forward: Vec<usize> = (0..s.len()).collect();
        let backward: Vec<usize> = forward.iter().rev().copied().collect();
        let a = exact_pauli_distribution(&p, &psi, &forward).unwrap();
        let b = exact_pauli_distribution(&p, &psi, &backward).unwrap();
        prop_assert!((a[0] - b[0]).abs() < 1e-10);
        // the product distribution equals the joint observable's
        let joint = observable_from_hermitian(&pauli_string_matrix(&s), 1e-10).unwrap();
        let rho = psi.to_density();
        let ev = expectation(&joint, &rho).unwrap();
        prop_assert!((a[0] - a[1] - ev).abs() < 1e-10);
    }
}

#[test]
fn parity_sampling_frequency() {
    let m = parity_measurement(2);
    let rho = PureState::plus(2).to_density();
    let mut r = rng(42);
    let shots = 100_000;
    let zeros = (0..shots).filter(|_| sample(&m, &rho, &mut r).unwrap().0 == 0).count();
    assert!((zeros as f64 / shots as f64 - 0.5).abs() < 0.005);
}

#[test]
fn local_zz_sampling_on_uniform_state() {
    let zz: PauliString = "ZZ".parse().unwrap();
    let psi = PureState::plus(2);
    let mut r = rng(9);
    let shots = 100_000;
    let plus = (0..shots)
        .filter(|_| sample_pauli_local(&zz, &psi, &mut r).unwrap() == 1)
        .count();
    assert!((plus as f64 / shots as f64 - 0.5).abs() < 0.005);
}

#[test]
fn bell_parity_is_certain() {
    let m = parity_measurement(2);
    let phi = PureState::bell(BellState::PhiPlus);
    let p = born_probabilities(&m, &phi.to_density()).unwrap();
    assert_eq!(p.len(), 2);
    assert!((p[0] - 1.0).abs() < 1e-12);
    let post = m.post_state_pure(0, &phi).unwrap();
    assert!((fidelity(&post, &phi).unwrap() - 1.0).abs() < 1e-12);
    let zi = kron(&pauli_string_matrix(&[3]), &ComplexMatrix::identity(2));
    let o = observable_from_hermitian(&zi, 1e-10).unwrap();
    assert!(expectation(&o, &DensityState::maximally_mixed(2)).unwrap().abs() < 1e-12);
}
