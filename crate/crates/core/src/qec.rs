//! Three-qubit repetition codes against single bit flips or single phase flips.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::channels::{bit_flip, dephasing, embed};
use crate::circuit::{run, run_distribution, Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{embed_operator, gates, kron_all, ComplexMatrix, STRUCTURAL_TOL};
use crate::measure::{observable_from_hermitian, Observable, ProjectiveMeasurement, ZERO_PROBABILITY};
use crate::states::{fidelity, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    BitFlip,
    PhaseFlip,
}

impl CodeKind {
    /// The Pauli that the code corrects.
    fn error_gate(self) -> Gate {
        match self {
            CodeKind::BitFlip => Gate::X,
            CodeKind::PhaseFlip => Gate::Z,
        }
    }
}

/// Two syndrome bits: `y0` is the parity of qubits 0,1 and `y1` of qubits 1,2
/// (in the Hadamard frame for the phase-flip code).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome {
    pub y0: u8,
    pub y1: u8,
}

impl Syndrome {
    pub const ALL: [Syndrome; 4] = [
        Syndrome { y0: 0, y1: 0 },
        Syndrome { y0: 0, y1: 1 },
        Syndrome { y0: 1, y1: 0 },
        Syndrome { y0: 1, y1: 1 },
    ];

    /// `2·y0 + y1`.
    pub fn value(self) -> usize {
        (self.y0 as usize) << 1 | self.y1 as usize
    }

    pub fn from_value(v: usize) -> Self {
        Self {
            y0: ((v >> 1) & 1) as u8,
            y1: (v & 1) as u8,
        }
    }

    /// Qubit to correct: `10 → 0`, `11 → 1`, `01 → 2`, `00 →` none.
    pub fn flipped_qubit(self) -> Option<usize> {
        match (self.y0, self.y1) {
            (1, 0) => Some(0),
            (1, 1) => Some(1),
            (0, 1) => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.y0, self.y1)
    }
}

impl Serialize for Syndrome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCase {
    None,
    Flip(usize),
}

impl ErrorCase {
    pub const SINGLE: [ErrorCase; 4] = [ErrorCase::None, ErrorCase::Flip(0), ErrorCase::Flip(1), ErrorCase::Flip(2)];
}

impl fmt::Display for ErrorCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorCase::None => f.write_str("none"),
            ErrorCase::Flip(q) => write!(f, "flip({q})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RepetitionCode {
    kind: CodeKind,
    /// Indexed by [`Syndrome::value`].
    projectors: [ComplexMatrix; 4],
}

impl RepetitionCode {
    pub fn new(kind: CodeKind) -> Self {
        let basis = |bits: u8| -> Vec<num_complex::Complex64> {
            PureState::basis(3, bits as usize).into_amplitudes()
        };
        let projector = |a: u8, b: u8| {
            let (va, vb) = (basis(a), basis(b));
            &ComplexMatrix::outer(&va, &va) + &ComplexMatrix::outer(&vb, &vb)
        };
        // 000/111, 001/110, 100/011, 010/101 for syndromes 00, 01, 10, 11
        let mut projectors = [
            projector(0b000, 0b111),
            projector(0b001, 0b110),
            projector(0b100, 0b011),
            projector(0b010, 0b101),
        ];
        if kind == CodeKind::PhaseFlip {
            let h3 = hadamard3();
            for p in &mut projectors {
                *p = &(&h3 * p) * &h3;
            }
        }
        Self { kind, projectors }
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn projector(&self, s: Syndrome) -> &ComplexMatrix {
        &self.projectors[s.value()]
    }

    /// Syndrome measurement labeled by [`Syndrome::value`].
    pub fn measurement(&self) -> ProjectiveMeasurement {
        ProjectiveMeasurement::new(
            self.projectors
                .iter()
                .enumerate()
                .map(|(y, p)| (y, p.clone()))
                .collect(),
        )
        .expect("syndrome projectors form a measurement")
    }
}

fn hadamard3() -> ComplexMatrix {
    let h = gates::h();
    kron_all([&h, &h, &h])
}

fn check_qubits(state: &PureState, n: usize) -> Result<()> {
    if state.n() != n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: state.dim(),
        });
    }
    Ok(())
}

/// Encoder on 3 qubits with the logical qubit first. The phase-flip encoder is the
/// bit-flip encoder conjugated by Hadamards, so `|+⟩ ↦ |+++⟩` and `|−⟩ ↦ |−−−⟩`.
pub fn encoder_circuit(kind: CodeKind) -> Circuit {
    let cnots = |c: Circuit| c.gate(Gate::Cnot, &[0, 1]).gate(Gate::Cnot, &[0, 2]);
    match kind {
        CodeKind::BitFlip => cnots(Circuit::new(3)),
        CodeKind::PhaseFlip => cnots(Circuit::new(3).gate(Gate::H, &[0]))
            .gate(Gate::H, &[0])
            .gate(Gate::H, &[1])
            .gate(Gate::H, &[2]),
    }
}

/// Bit-flip code: `α₀|0⟩ + α₁|1⟩ ↦ α₀|000⟩ + α₁|111⟩`.
/// Phase-flip code: `α₀|+⟩ + α₁|−⟩ ↦ α₀|+++⟩ + α₁|−−−⟩`.
pub fn encode(psi: &PureState, code: &RepetitionCode) -> Result<PureState> {
    check_qubits(psi, 1)?;
    let padded = psi.tensor(&PureState::basis(2, 0));
    padded.evolve(&encoder_circuit(code.kind).net_unitary()?)
}

fn pauli_on(kind: CodeKind, q: usize) -> ComplexMatrix {
    embed_operator(&kind.error_gate().matrix(), &[q], 3).expect("qubit < 3")
}

/// Applies `X_q` (bit-flip code) or `Z_q` (phase-flip code).
pub fn apply_error(state: &PureState, error: ErrorCase, code: &RepetitionCode) -> Result<PureState> {
    check_qubits(state, 3)?;
    match error {
        ErrorCase::None => Ok(state.clone()),
        ErrorCase::Flip(q) if q < 3 => state.evolve(&pauli_on(code.kind, q)),
        ErrorCase::Flip(q) => Err(Error::BadSelector {
            reason: format!("qubit {q} outside the 3-qubit code"),
        }),
    }
}

fn correct(state: &PureState, s: Syndrome, kind: CodeKind) -> Result<PureState> {
    match s.flipped_qubit() {
        Some(q) => state.evolve(&pauli_on(kind, q)),
        None => Ok(state.clone()),
    }
}

/// A syndrome branch with its probability and corrected state.
#[derive(Clone, Debug)]
pub struct DecodeBranch {
    pub syndrome: Syndrome,
    pub probability: f64,
    pub corrected: PureState,
}

/// Measures the syndrome projectors (sampled) and applies the correction.
pub fn decode_projective<R: Rng + ?Sized>(
    state: &PureState,
    code: &RepetitionCode,
    rng: &mut R,
) -> Result<(Syndrome, PureState)> {
    check_qubits(state, 3)?;
    let (y, post) = code.measurement().sample_pure(state, rng)?;
    let s = Syndrome::from_value(y);
    Ok((s, correct(&post, s, code.kind)?))
}

/// Every reachable syndrome of [`decode_projective`] with exact probabilities.
pub fn decode_projective_branches(state: &PureState, code: &RepetitionCode) -> Result<Vec<DecodeBranch>> {
    check_qubits(state, 3)?;
    let m = code.measurement();
    let probs = m.probabilities_pure(state)?;
    let mut out = Vec::new();
    for (y, &p) in probs.iter().enumerate() {
        if p <= ZERO_PROBABILITY {
            continue;
        }
        let s = Syndrome::from_value(y);
        out.push(DecodeBranch {
            syndrome: s,
            probability: p,
            corrected: correct(&m.post_state_pure(y, state)?, s, code.kind)?,
        });
    }
    Ok(out)
}

/// Five-qubit decoder: data on 0..3, ancillas 3 and 4 collect the parities of
/// pairs (0,1) and (1,2), are measured into `y0, y1`, and drive conditional corrections.
/// The phase-flip decoder runs the same circuit between Hadamard layers.
pub fn decoder_circuit(kind: CodeKind) -> Circuit {
    let hadamards = |c: Circuit| c.gate(Gate::H, &[0]).gate(Gate::H, &[1]).gate(Gate::H, &[2]);
    let mut c = Circuit::new(5);
    if kind == CodeKind::PhaseFlip {
        c = hadamards(c);
    }
    c = c
        .gate(Gate::Cnot, &[0, 3])
        .gate(Gate::Cnot, &[1, 3])
        .gate(Gate::Cnot, &[1, 4])
        .gate(Gate::Cnot, &[2, 4])
        .measure(&[3, 4], &["y0", "y1"])
        .controlled(Gate::X, &[0], "y0 & !y1".parse().expect("literal"))
        .controlled(Gate::X, &[1], "y0 & y1".parse().expect("literal"))
        .controlled(Gate::X, &[2], "!y0 & y1".parse().expect("literal"));
    if kind == CodeKind::PhaseFlip {
        c = hadamards(c);
    }
    c
}

fn syndrome_of(bits: &crate::circuit::ClassicalBits) -> Syndrome {
    Syndrome {
        y0: bits.get("y0").unwrap_or(0),
        y1: bits.get("y1").unwrap_or(0),
    }
}

/// Drops the two measured ancillas, which sit in `|y0 y1⟩`.
fn discard_ancillas(state: &PureState, s: Syndrome) -> Result<PureState> {
    let amps: Vec<_> = (0..8).map(|i| state.amplitudes()[(i << 2) | s.value()]).collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > STRUCTURAL_TOL {
        return Err(Error::InvalidCircuit {
            reason: format!("ancillas not in the measured state (weight {norm})"),
        });
    }
    PureState::renormalized(amps)
}

fn with_ancillas(state: &PureState) -> PureState {
    state.tensor(&PureState::basis(2, 0))
}

/// Runs the decoder circuit once and returns the syndrome and corrected data qubits.
pub fn decode_circuit<R: Rng + ?Sized>(
    state: &PureState,
    code: &RepetitionCode,
    rng: &mut R,
) -> Result<(Syndrome, PureState)> {
    check_qubits(state, 3)?;
    let rec = run(&decoder_circuit(code.kind), &with_ancillas(state), rng)?;
    let s = syndrome_of(&rec.bits);
    Ok((s, discard_ancillas(&rec.final_state, s)?))
}

/// Exact branches of [`decode_circuit`].
pub fn decode_circuit_branches(state: &PureState, code: &RepetitionCode) -> Result<Vec<DecodeBranch>> {
    check_qubits(state, 3)?;
    run_distribution(&decoder_circuit(code.kind), &with_ancillas(state))?
        .into_iter()
        .map(|b| {
            let s = syndrome_of(&b.bits);
            Ok(DecodeBranch {
                syndrome: s,
                probability: b.probability,
                corrected: discard_ancillas(&b.state, s)?,
            })
        })
        .collect()
}

/// Smallest `n` with `2^n ≥ 2^k (m + 1)`.
pub fn hamming_bound(k: usize, m: usize) -> usize {
    let mut extra = 0;
    while (1u128 << extra) < m as u128 + 1 {
        extra += 1;
    }
    k + extra
}

/// `2Π₀₀ − I`: `+1` on codewords, `−1` on single-error corruptions.
pub fn error_detect_observable(code: &RepetitionCode) -> Observable {
    let p00 = code.projector(Syndrome { y0: 0, y1: 0 });
    let o = &p00.scale_real(2.0) - &ComplexMatrix::identity(8);
    observable_from_hermitian(&o, STRUCTURAL_TOL).expect("Hermitian")
}

/// Noise model for Monte-Carlo logical error estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Each qubit independently suffers the code's error with probability `p`.
    Independent,
    /// With probability `p` exactly one uniformly chosen qubit is hit.
    AtMostOne,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogicalTrial {
    pub flips: usize,
    pub syndrome: Syndrome,
    pub logical_error: bool,
}

/// Encodes the input whose codeword is a product state (`|0⟩` for the bit-flip code,
/// `|+⟩` for the phase-flip code), applies noise, decodes projectively and checks
/// whether the corrected state left the codeword.
pub fn logical_error_trial<R: Rng + ?Sized>(
    code: &RepetitionCode,
    noise: NoiseModel,
    p: f64,
    rng: &mut R,
) -> Result<LogicalTrial> {
    let logical = match code.kind {
        CodeKind::BitFlip => PureState::basis(1, 0),
        CodeKind::PhaseFlip => PureState::plus(1),
    };
    let encoded = encode(&logical, code)?;
    let mut state = encoded.clone();
    let mut flips = 0;
    match noise {
        NoiseModel::Independent => {
            let local = match code.kind {
                CodeKind::BitFlip => bit_flip(p)?,
                CodeKind::PhaseFlip => dephasing(p)?,
            };
            for q in 0..3 {
                let (branch, next) = embed(&local, &[q], 3)?.sample_branch(&state, rng)?;
                if is_error_branch(&local.kraus()[branch]) {
                    flips += 1;
                }
                state = next;
            }
        }
        NoiseModel::AtMostOne => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::BadProbabilities {
                    reason: format!("{p} outside [0, 1]"),
                });
            }
            if rng.random::<f64>() < p {
                let q = rng.random_range(0..3);
                state = apply_error(&state, ErrorCase::Flip(q), code)?;
                flips = 1;
            }
        }
    }
    let (syndrome, corrected) = decode_projective(&state, code, rng)?;
    let logical_error = fidelity(&corrected, &encoded)? < 0.5;
    Ok(LogicalTrial {
        flips,
        syndrome,
        logical_error,
    })
}

/// True unless `k` is a multiple of the identity.
fn is_error_branch(k: &ComplexMatrix) -> bool {
    let scaled_identity = ComplexMatrix::identity(k.rows()).scale(k.get(0, 0));
    k.max_abs_diff(&scaled_identity) > 1e-12
}

/// `3p² − 2p³`, the probability of two or more independent flips.
pub fn logical_error_rate(p: f64) -> f64 {
    3.0 * p * p - 2.0 * p * p * p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::expectation;
    use rand::SeedableRng;

    fn codes() -> [RepetitionCode; 2] {
        [RepetitionCode::new(CodeKind::BitFlip), RepetitionCode::new(CodeKind::PhaseFlip)]
    }

    #[test]
    fn projectors_form_a_rank2_measurement() {
        for code in codes() {
            let m = code.measurement();
            for (_, p) in m.outcomes() {
                assert!((p.trace().unwrap().re - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn encode_examples() {
        let bf = RepetitionCode::new(CodeKind::BitFlip);
        let pf = RepetitionCode::new(CodeKind::PhaseFlip);
        let e = encode(&PureState::basis(1, 0), &bf).unwrap();
        assert!((fidelity(&e, &PureState::basis(3, 0)).unwrap() - 1.0).abs() < 1e-15);
        let e = encode(&PureState::plus(1), &bf).unwrap();
        assert!((fidelity(&e, &PureState::ghz(3)).unwrap() - 1.0).abs() < 1e-12);
        let e = encode(&PureState::plus(1), &pf).unwrap();
        assert!((fidelity(&e, &PureState::plus(3)).unwrap() - 1.0).abs() < 1e-12);
        assert!(encode(&PureState::basis(2, 0), &bf).is_err());
    }

    #[test]
    fn error_examples() {
        let bf = RepetitionCode::new(CodeKind::BitFlip);
        let out = apply_error(&PureState::basis(3, 0), ErrorCase::Flip(0), &bf).unwrap();
        assert!((fidelity(&out, &PureState::from_bits("100").unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            apply_error(&PureState::basis(3, 0), ErrorCase::Flip(3), &bf),
            Err(Error::BadSelector { .. })
        ));
    }

    #[test]
    fn syndrome_table() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        let psi = PureState::from_real(&[0.6, 0.8]).unwrap();
        let expected = ["00", "10", "11", "01"];
        for code in codes() {
            let enc = encode(&psi, &code).unwrap();
            for (err, want) in ErrorCase::SINGLE.iter().zip(expected) {
                let corrupted = apply_error(&enc, *err, &code).unwrap();
                for (s, fixed) in [
                    decode_projective(&corrupted, &code, &mut rng).unwrap(),
                    decode_circuit(&corrupted, &code, &mut rng).unwrap(),
                ] {
                    assert_eq!(s.to_string(), want);
                    assert!((fidelity(&fixed, &enc).unwrap() - 1.0).abs() < 1e-10);
                }
                assert_eq!(decode_circuit_branches(&corrupted, &code).unwrap().len(), 1);
            }
        }
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_bound(1, 3), 3);
        assert_eq!(hamming_bound(1, 0), 1);
        assert_eq!(hamming_bound(2, 3), 4);
    }

    #[test]
    fn detection_observable() {
        let bf = RepetitionCode::new(CodeKind::BitFlip);
        let o = error_detect_observable(&bf);
        let enc = encode(&PureState::plus(1), &bf).unwrap();
        assert!((expectation(&o, &enc.to_density()).unwrap() - 1.0).abs() < 1e-12);
        let bad = apply_error(&enc, ErrorCase::Flip(0), &bf).unwrap();
        assert!((expectation(&o, &bad.to_density()).unwrap() + 1.0).abs() < 1e-12);
        let mix: Vec<_> = enc
            .amplitudes()
            .iter()
            .zip(bad.amplitudes())
            .map(|(a, b)| a + b)
            .collect();
        let sup = PureState::renormalized(mix).unwrap();
        assert!(expectation(&o, &sup.to_density()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_extremes() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        for kind in [CodeKind::BitFlip, CodeKind::PhaseFlip] {
            let code = RepetitionCode::new(kind);
            for _ in 0..20 {
                assert!(!logical_error_trial(&code, NoiseModel::Independent, 0.0, &mut rng).unwrap().logical_error);
                assert!(logical_error_trial(&code, NoiseModel::Independent, 1.0, &mut rng).unwrap().logical_error);
                assert!(!logical_error_trial(&code, NoiseModel::AtMostOne, 1.0, &mut rng).unwrap().logical_error);
            }
        }
    }
}
