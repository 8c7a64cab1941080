use proptest::prelude::*;
use qmeas::linalg::{gates, kron_all};
use qmeas::qec::{
    apply_error, decode_circuit, decode_circuit_branches, decode_projective, decode_projective_branches,
    encode, CodeKind, ErrorCase, RepetitionCode, Syndrome,
};
use qmeas::random::random_state;
use qmeas::states::{fidelity, PureState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn kind_strategy() -> impl Strategy<Value = CodeKind> {
    prop_oneof![Just(CodeKind::BitFlip), Just(CodeKind::PhaseFlip)]
}

const EXPECTED: [&str; 4] = ["00", "10", "11", "01"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn single_errors_are_corrected(seed in any::<u64>(), kind in kind_strategy()) {
        let mut r = rng(seed);
        let code = RepetitionCode::new(kind);
        let enc = encode(&random_state(1, &mut r), &code).unwrap();
        for (err, want) in ErrorCase::SINGLE.iter().zip(EXPECTED) {
            let bad = apply_error(&enc, *err, &code).unwrap();
            let (s1, c1) = decode_projective(&bad, &code, &mut r).unwrap();
            let (s2, c2) = decode_circuit(&bad, &code, &mut r).unwrap();
            prop_assert_eq!(s1.to_string(), want);
            prop_assert_eq!(s2.to_string(), want);
            prop_assert!(fidelity(&c1, &enc).unwrap() >= 1.0 - 1e-10);
            prop_assert!(fidelity(&c2, &enc).unwrap() >= 1.0 - 1e-10);
            let branches = decode_circuit_branches(&bad, &code).unwrap();
            prop_assert_eq!(branches.len(), 1);
            prop_assert!((branches[0].probability - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn decoders_agree_on_arbitrary_inputs(seed in any::<u64>(), kind in kind_strategy()) {
        let mut r = rng(seed);
        let code = RepetitionCode::new(kind);
        let psi = random_state(3, &mut r);
        let a = decode_projective_branches(&psi, &code).unwrap();
        let b = decode_circuit_branches(&psi, &code).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for x in &a {
            let y = b.iter().find(|y| y.syndrome == x.syndrome).unwrap();
            prop_assert!((x.probability - y.probability).abs() < 1e-10);
            prop_assert!(fidelity(&x.corrected, &y.corrected).unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn syndrome_measurement_is_gentle(seed in any::<u64>(), kind in kind_strategy(), s in 0usize..4) {
        let mut r = rng(seed);
        let code = RepetitionCode::new(kind);
        let p = code.projector(Syndrome::from_value(s));
        let v = p.apply(&qmeas::random::random_vector(8, &mut r)).unwrap();
        let psi = PureState::renormalized(v).unwrap();
        let m = code.measurement();
        let probs = m.probabilities_pure(&psi).unwrap();
        prop_assert!((probs[s] - 1.0).abs() < 1e-10);
        let post = m.post_state_pure(s, &psi).unwrap();
        prop_assert!((fidelity(&post, &psi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phase_flip_decoding_is_conjugated_bit_flip_decoding(seed in any::<u64>()) {
        let psi = random_state(3, &mut rng(seed));
        let h = gates::h();
        let h3 = kron_all([&h, &h, &h]);
        let pf = decode_projective_branches(&psi, &RepetitionCode::new(CodeKind::PhaseFlip)).unwrap();
        let bf = decode_projective_branches(&psi.evolve(&h3).unwrap(), &RepetitionCode::new(CodeKind::BitFlip)).unwrap();
        prop_assert_eq!(pf.len(), bf.len());
        for (a, b) in pf.iter().zip(&bf) {
            prop_assert_eq!(a.syndrome, b.syndrome);
            prop_assert!((a.probability - b.probability).abs() < 1e-10);
            let back = b.corrected.evolve(&h3).unwrap();
            prop_assert!(a.corrected.inner(&back).unwrap().norm() >= 1.0 - 1e-10);
        }
    }
}

#[test]
fn two_flips_decode_to_the_wrong_codeword() {
    let code = RepetitionCode::new(CodeKind::BitFlip);
    let enc = encode(&PureState::basis(1, 0), &code).unwrap();
    let bad = apply_error(&apply_error(&enc, ErrorCase::Flip(0), &code).unwrap(), ErrorCase::Flip(1), &code).unwrap();
    let (s, corrected) = decode_projective(&bad, &code, &mut rng(0)).unwrap();
    assert_eq!(s.to_string(), "01");
    assert!((fidelity(&corrected, &PureState::basis(3, 7)).unwrap() - 1.0).abs() < 1e-12);
}
