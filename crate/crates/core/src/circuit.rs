//! Gate-level simulation with mid-circuit computational-basis measurements and
//! classically controlled gates.
//!
//! Builders place system qubits first and ancillas last.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    check_targets, embed_operator, gates, qubit_count, unitary_deviation, ComplexMatrix, STRUCTURAL_TOL,
    ZERO,
};
use crate::measure::{inverse_cdf, orthonormality_deviation, Outcome, ZERO_PROBABILITY};
use crate::states::{DensityState, PureState};

/// Cap on measured bits for exact branch enumeration.
pub const MAX_BRANCH_BITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X,
    Y,
    Z,
    H,
    S,
    /// Control is the first target.
    Cnot,
    Cz,
    Unitary(ComplexMatrix),
}

impl Gate {
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            Gate::X => gates::x(),
            Gate::Y => gates::y(),
            Gate::Z => gates::z(),
            Gate::H => gates::h(),
            Gate::S => gates::s(),
            Gate::Cnot => gates::cnot(),
            Gate::Cz => gates::cz(),
            Gate::Unitary(u) => u.clone(),
        }
    }

    /// Number of qubits the gate acts on, or `None` for a non-power-of-two matrix.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Gate::X | Gate::Y | Gate::Z | Gate::H | Gate::S => Some(1),
            Gate::Cnot | Gate::Cz => Some(2),
            Gate::Unitary(u) if u.is_square() => qubit_count(u.rows()).ok(),
            Gate::Unitary(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::Cnot => "CNOT",
            Gate::Cz => "CZ",
            Gate::Unitary(_) => "U",
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "H" => Gate::H,
            "S" => Gate::S,
            "CNOT" | "CX" => Gate::Cnot,
            "CZ" => Gate::Cz,
            _ => {
                return Err(Error::InvalidCircuit {
                    reason: format!("unknown gate '{s}'"),
                })
            }
        })
    }
}

/// A bit literal: `name` or `!name`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub name: String,
    pub value: bool,
}

/// Conjunction of bit literals, written `"y0 & !y1"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition(pub Vec<Literal>);

impl Condition {
    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn eval(&self, bits: &ClassicalBits) -> Result<bool> {
        for lit in &self.0 {
            let b = bits.get(&lit.name).ok_or_else(|| Error::InvalidCircuit {
                reason: format!("condition reads undefined bit '{}'", lit.name),
            })?;
            if (b == 1) != lit.value {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let literals = s
            .split('&')
            .map(|term| {
                let term = term.trim();
                let (value, name) = match term.strip_prefix('!') {
                    Some(rest) => (false, rest.trim()),
                    None => (true, term),
                };
                let valid = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !valid {
                    return Err(Error::InvalidCircuit {
                        reason: format!("bad condition term '{term}'"),
                    });
                }
                Ok(Literal {
                    name: name.to_string(),
                    value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Condition(literals))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| if l.value { l.name.clone() } else { format!("!{}", l.name) })
            .collect();
        f.write_str(&parts.join(" & "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CircuitOp {
    Gate {
        gate: Gate,
        targets: Vec<usize>,
    },
    /// Computational-basis measurement; `store[j]` receives the bit of `targets[j]`.
    Measure {
        targets: Vec<usize>,
        store: Vec<String>,
    },
    Controlled {
        gate: Gate,
        targets: Vec<usize>,
        condition: Condition,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub ops: Vec<CircuitOp>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, ops: Vec::new() }
    }

    pub fn gate(mut self, gate: Gate, targets: &[usize]) -> Self {
        self.ops.push(CircuitOp::Gate {
            gate,
            targets: targets.to_vec(),
        });
        self
    }

    pub fn measure(mut self, targets: &[usize], store: &[&str]) -> Self {
        self.ops.push(CircuitOp::Measure {
            targets: targets.to_vec(),
            store: store.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn controlled(mut self, gate: Gate, targets: &[usize], condition: Condition) -> Self {
        self.ops.push(CircuitOp::Controlled {
            gate,
            targets: targets.to_vec(),
            condition,
        });
        self
    }

    /// Appends all ops of `other`, which must act on the same register.
    pub fn then(mut self, other: Circuit) -> Self {
        self.ops.extend(other.ops);
        self
    }

    /// Total number of measured bits.
    pub fn measured_bits(&self) -> usize {
        self.ops
            .iter()
            .map(|op| match op {
                CircuitOp::Measure { targets, .. } => targets.len(),
                _ => 0,
            })
            .sum()
    }

    /// Checks targets, gate shapes and unitarity, and that every condition reads
    /// a bit stored by an earlier measurement.
    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidCircuit { reason };
        let mut defined: Vec<&str> = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            match op {
                CircuitOp::Gate { gate, targets } | CircuitOp::Controlled { gate, targets, .. } => {
                    check_targets(targets, self.n).map_err(|e| invalid(format!("op {i}: {e}")))?;
                    match gate.arity() {
                        Some(k) if k == targets.len() => {}
                        _ => {
                            return Err(invalid(format!(
                                "op {i}: gate {} does not act on {} qubits",
                                gate.name(),
                                targets.len()
                            )))
                        }
                    }
                    if let Gate::Unitary(u) = gate {
                        let dev = unitary_deviation(u);
                        if dev > STRUCTURAL_TOL {
                            return Err(invalid(format!("op {i}: matrix not unitary (deviation {dev:.3e})")));
                        }
                    }
                    if let CircuitOp::Controlled { condition, .. } = op {
                        if let Some(l) = condition.0.iter().find(|l| !defined.contains(&l.name.as_str())) {
                            return Err(invalid(format!("op {i}: condition reads undefined bit '{}'", l.name)));
                        }
                    }
                }
                CircuitOp::Measure { targets, store } => {
                    check_targets(targets, self.n).map_err(|e| invalid(format!("op {i}: {e}")))?;
                    if targets.is_empty() || store.len() != targets.len() {
                        return Err(invalid(format!(
                            "op {i}: {} bit names for {} measured qubits",
                            store.len(),
                            targets.len()
                        )));
                    }
                    for name in store {
                        if defined.contains(&name.as_str()) || store.iter().filter(|s| *s == name).count() > 1 {
                            return Err(invalid(format!("op {i}: bit '{name}' stored twice")));
                        }
                        defined.push(name);
                    }
                }
            }
        }
        Ok(())
    }

    /// Product of the gate ops in order; measurements and controlled gates are skipped.
    pub fn net_unitary(&self) -> Result<ComplexMatrix> {
        let mut u = ComplexMatrix::identity(1 << self.n);
        for op in &self.ops {
            if let CircuitOp::Gate { gate, targets } = op {
                u = &embed_operator(&gate.matrix(), targets, self.n)? * &u;
            }
        }
        Ok(u)
    }
}

/// Stored classical bits in measurement order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassicalBits(pub Vec<(String, u8)>);

impl ClassicalBits {
    pub fn get(&self, name: &str) -> Option<u8> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, b)| *b)
    }

    fn push(&mut self, name: &str, bit: u8) {
        self.0.push((name.to_string(), bit));
    }

    /// Bit values concatenated in measurement order, e.g. `"10"`.
    pub fn label(&self) -> String {
        self.0.iter().map(|(_, b)| char::from(b'0' + b)).collect()
    }

    /// Bits read as a binary number, first-measured bit most significant.
    pub fn value(&self) -> Outcome {
        self.0.iter().fold(0, |acc, (_, b)| (acc << 1) | *b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Serialize for ClassicalBits {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, bit) in &self.0 {
            map.serialize_entry(name, bit)?;
        }
        map.end()
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub final_state: PureState,
    pub bits: ClassicalBits,
    /// Product of the Born probabilities of the realized outcomes.
    pub trajectory_probability: f64,
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub bits: ClassicalBits,
    pub probability: f64,
    pub state: PureState,
}

#[derive(Clone, Debug)]
pub struct MixedBranch {
    pub bits: ClassicalBits,
    pub probability: f64,
    pub state: DensityState,
}

/// Local index of global basis index `i` on `targets`, `targets[0]` most significant.
fn local_index(i: usize, n: usize, targets: &[usize]) -> usize {
    targets
        .iter()
        .fold(0, |acc, &t| (acc << 1) | ((i >> (n - 1 - t)) & 1))
}

/// Applies a `2^k` operator on `targets` to a state vector in place.
fn apply_local(amps: &mut [Complex64], n: usize, op: &ComplexMatrix, targets: &[usize]) {
    let k = targets.len();
    let shifts: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
    let mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|local| {
            shifts
                .iter()
                .enumerate()
                .filter(|(j, _)| (local >> (k - 1 - j)) & 1 == 1)
                .map(|(_, &s)| 1usize << s)
                .sum()
        })
        .collect();
    let mut buf = vec![ZERO; 1 << k];
    for base in (0..amps.len()).filter(|b| b & mask == 0) {
        for (l, &off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            amps[base | off] = (0..buf.len()).map(|c| op.get(r, c) * buf[c]).sum();
        }
    }
}

fn outcome_probabilities(amps: &[Complex64], n: usize, targets: &[usize]) -> Vec<f64> {
    let mut probs = vec![0.0; 1 << targets.len()];
    for (i, a) in amps.iter().enumerate() {
        probs[local_index(i, n, targets)] += a.norm_sqr();
    }
    probs
}

/// `Π_y ψ / √p_y` for the computational outcome `y` on `targets`.
fn collapse(amps: &[Complex64], n: usize, targets: &[usize], y: usize, p: f64) -> Vec<Complex64> {
    let scale = 1.0 / p.sqrt();
    amps.iter()
        .enumerate()
        .map(|(i, &a)| if local_index(i, n, targets) == y { a * scale } else { ZERO })
        .collect()
}

fn store_bits(bits: &mut ClassicalBits, store: &[String], y: usize) {
    let k = store.len();
    for (j, name) in store.iter().enumerate() {
        bits.push(name, ((y >> (k - 1 - j)) & 1) as u8);
    }
}

fn check_input(c: &Circuit, dim: usize) -> Result<()> {
    if dim != 1 << c.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << c.n,
            found: dim,
        });
    }
    c.validate()
}

/// Runs one sampled trajectory.
pub fn run<R: Rng + ?Sized>(c: &Circuit, input: &PureState, rng: &mut R) -> Result<RunRecord> {
    check_input(c, input.dim())?;
    let n = c.n;
    let mut amps = input.amplitudes().to_vec();
    let mut bits = ClassicalBits::default();
    let mut prob = 1.0;
    for op in &c.ops {
        match op {
            CircuitOp::Gate { gate, targets } => apply_local(&mut amps, n, &gate.matrix(), targets),
            CircuitOp::Controlled {
                gate,
                targets,
                condition,
            } => {
                if condition.eval(&bits)? {
                    apply_local(&mut amps, n, &gate.matrix(), targets);
                }
            }
            CircuitOp::Measure { targets, store } => {
                let probs = outcome_probabilities(&amps, n, targets);
                let y = inverse_cdf(&probs, rng);
                amps = collapse(&amps, n, targets, y, probs[y]);
                prob *= probs[y];
                store_bits(&mut bits, store, y);
            }
        }
    }
    Ok(RunRecord {
        final_state: PureState::renormalized(amps)?,
        bits,
        trajectory_probability: prob,
    })
}

/// Enumerates every measurement branch with its exact probability and final state.
///
/// Branches at or below probability `1e-12` are dropped.
pub fn run_distribution(c: &Circuit, input: &PureState) -> Result<Vec<Branch>> {
    check_input(c, input.dim())?;
    check_branch_bits(c)?;
    let n = c.n;
    let mut branches = vec![(ClassicalBits::default(), 1.0f64, input.amplitudes().to_vec())];
    for op in &c.ops {
        match op {
            CircuitOp::Gate { gate, targets } => {
                let m = gate.matrix();
                for (_, _, amps) in &mut branches {
                    apply_local(amps, n, &m, targets);
                }
            }
            CircuitOp::Controlled {
                gate,
                targets,
                condition,
            } => {
                let m = gate.matrix();
                for (bits, _, amps) in &mut branches {
                    if condition.eval(bits)? {
                        apply_local(amps, n, &m, targets);
                    }
                }
            }
            CircuitOp::Measure { targets, store } => {
                let mut next = Vec::new();
                for (bits, p, amps) in branches {
                    let probs = outcome_probabilities(&amps, n, targets);
                    for (y, &py) in probs.iter().enumerate() {
                        if p * py <= ZERO_PROBABILITY {
                            continue;
                        }
                        let mut b = bits.clone();
                        store_bits(&mut b, store, y);
                        next.push((b, p * py, collapse(&amps, n, targets, y, py)));
                    }
                }
                branches = next;
            }
        }
    }
    branches
        .into_iter()
        .map(|(bits, probability, amps)| {
            Ok(Branch {
                bits,
                probability,
                state: PureState::renormalized(amps)?,
            })
        })
        .collect()
}

fn check_branch_bits(c: &Circuit) -> Result<()> {
    let bits = c.measured_bits();
    if bits > MAX_BRANCH_BITS {
        return Err(Error::TooManyBranches {
            bits,
            limit: MAX_BRANCH_BITS,
        });
    }
    Ok(())
}

/// Applies `op` on `targets` as `ρ ↦ U ρ U†`.
fn apply_local_density(rho: &mut ComplexMatrix, n: usize, op: &ComplexMatrix, targets: &[usize]) {
    let d = rho.rows();
    let conj = ComplexMatrix::new(op.rows(), op.cols(), op.data().iter().map(|z| z.conj()).collect())
        .expect("same shape");
    for c in 0..d {
        let mut col = rho.col(c);
        apply_local(&mut col, n, op, targets);
        for (r, v) in col.into_iter().enumerate() {
            rho.set(r, c, v);
        }
    }
    for r in 0..d {
        let mut row = rho.row(r);
        apply_local(&mut row, n, &conj, targets);
        for (c, v) in row.into_iter().enumerate() {
            rho.set(r, c, v);
        }
    }
}

/// [`run_distribution`] for a density-matrix input; each branch carries the
/// conditional mixed state.
pub fn run_distribution_mixed(c: &Circuit, input: &DensityState) -> Result<Vec<MixedBranch>> {
    check_input(c, input.dim())?;
    check_branch_bits(c)?;
    let n = c.n;
    // unnormalized branch operators; trace is the branch probability
    let mut branches = vec![(ClassicalBits::default(), input.matrix().clone())];
    for op in &c.ops {
        match op {
            CircuitOp::Gate { gate, targets } => {
                let m = gate.matrix();
                for (_, rho) in &mut branches {
                    apply_local_density(rho, n, &m, targets);
                }
            }
            CircuitOp::Controlled {
                gate,
                targets,
                condition,
            } => {
                let m = gate.matrix();
                for (bits, rho) in &mut branches {
                    if condition.eval(bits)? {
                        apply_local_density(rho, n, &m, targets);
                    }
                }
            }
            CircuitOp::Measure { targets, store } => {
                let mut next = Vec::new();
                let d = 1usize << n;
                for (bits, rho) in branches {
                    for y in 0..1usize << targets.len() {
                        let mut out = ComplexMatrix::zeros(d, d);
                        let mut p = 0.0;
                        for r in (0..d).filter(|&r| local_index(r, n, targets) == y) {
                            p += rho.get(r, r).re;
                            for cc in (0..d).filter(|&cc| local_index(cc, n, targets) == y) {
                                out.set(r, cc, rho.get(r, cc));
                            }
                        }
                        if p <= ZERO_PROBABILITY {
                            continue;
                        }
                        let mut b = bits.clone();
                        store_bits(&mut b, store, y);
                        next.push((b, out));
                    }
                }
                branches = next;
            }
        }
    }
    Ok(branches
        .into_iter()
        .map(|(bits, rho)| {
            let p = rho.trace().expect("square").re;
            MixedBranch {
                bits,
                probability: p,
                state: DensityState::from_matrix_unchecked(rho.scale_real(1.0 / p).hermitian_part()),
            }
        })
        .collect())
}

/// `U_BC |x, y⟩ = |x, x ⊕ y⟩` on `2n` qubits, source block first.
pub fn basis_copy(n: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let mut u = ComplexMatrix::zeros(d * d, d * d);
    for x in 0..d {
        for y in 0..d {
            u.set(x * d + (x ^ y), x * d + y, Complex64::new(1.0, 0.0));
        }
    }
    u
}

/// `U = Σ_k |k⟩⟨v_k|`, sending the `k`-th basis vector to computational state `k`.
pub fn change_of_basis(basis: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let d = basis.len();
    qubit_count(d)?;
    if basis.iter().any(|v| v.len() != d) {
        return Err(Error::NotOrthonormal {
            deviation: f64::INFINITY,
        });
    }
    let deviation = orthonormality_deviation(basis)?;
    if deviation > STRUCTURAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for (k, v) in basis.iter().enumerate() {
        for (j, a) in v.iter().enumerate() {
            u.set(k, j, a.conj());
        }
    }
    Ok(u)
}

fn outcome_bit_names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|j| format!("{prefix}{j}")).collect()
}

fn measure_op(targets: Vec<usize>, prefix: &str) -> CircuitOp {
    let store = outcome_bit_names(prefix, targets.len());
    CircuitOp::Measure { targets, store }
}

/// `[U, measure the last n_prime qubits, U†]`, where `basis[k]` is `|v_{x,y}⟩` with
/// `k = x·2^{n_prime} + y`. Bits are stored as `y0, y1, …`, `y0` most significant.
pub fn balanced_measurement_circuit(basis: &[Vec<Complex64>], n_prime: usize) -> Result<Circuit> {
    let n = qubit_count(basis.len())?;
    if n_prime == 0 || n_prime > n {
        return Err(Error::NotBalanced {
            reason: format!("cannot measure {n_prime} of {n} qubits"),
        });
    }
    let u = change_of_basis(basis)?;
    let all: Vec<usize> = (0..n).collect();
    Ok(Circuit {
        n,
        ops: vec![
            CircuitOp::Gate {
                gate: Gate::Unitary(u.clone()),
                targets: all.clone(),
            },
            measure_op((n - n_prime..n).collect(), "y"),
            CircuitOp::Gate {
                gate: Gate::Unitary(u.dagger()),
                targets: all,
            },
        ],
    })
}

/// Reorders `basis` so that `partition[y][x]` lands at index `x·2^{n'} + y`.
///
/// Fails with [`Error::NotBalanced`] unless there are `2^{n'}` subsets of equal size.
pub fn balanced_basis_order(basis: &[Vec<Complex64>], partition: &[Vec<usize>]) -> Result<(Vec<Vec<Complex64>>, usize)> {
    let outcomes = partition.len();
    let not_balanced = |reason: String| Error::NotBalanced { reason };
    if outcomes == 0 || !outcomes.is_power_of_two() {
        return Err(not_balanced(format!("{outcomes} outcomes is not a power of two")));
    }
    let size = basis.len() / outcomes;
    if partition.iter().any(|s| s.len() != size) || size * outcomes != basis.len() {
        return Err(not_balanced("subsets have unequal sizes".into()));
    }
    let mut ordered = vec![Vec::new(); basis.len()];
    let mut seen = vec![false; basis.len()];
    for (y, set) in partition.iter().enumerate() {
        for (x, &k) in set.iter().enumerate() {
            if k >= basis.len() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::BadPartition {
                    reason: format!("index {k} out of range or repeated"),
                });
            }
            ordered[x * outcomes + y] = basis[k].clone();
        }
    }
    Ok((ordered, outcomes.trailing_zeros() as usize))
}

/// [`balanced_measurement_circuit`] for a partition of `basis`; outcome `y` is the
/// subset index.
pub fn partition_measurement_circuit(basis: &[Vec<Complex64>], partition: &[Vec<usize>]) -> Result<Circuit> {
    let (ordered, n_prime) = balanced_basis_order(basis, partition)?;
    balanced_measurement_circuit(&ordered, n_prime)
}

/// Von Neumann measurement in `basis` with `n` ancillas appended after the system:
/// `[U on system, basis copy, measure ancillas, U† on system]`. Bits are `x0, x1, …`.
pub fn ancilla_von_neumann_circuit(basis: &[Vec<Complex64>]) -> Result<Circuit> {
    let n = qubit_count(basis.len())?;
    let u = change_of_basis(basis)?;
    let system: Vec<usize> = (0..n).collect();
    Ok(Circuit {
        n: 2 * n,
        ops: vec![
            CircuitOp::Gate {
                gate: Gate::Unitary(u.clone()),
                targets: system.clone(),
            },
            CircuitOp::Gate {
                gate: Gate::Unitary(basis_copy(n)),
                targets: (0..2 * n).collect(),
            },
            measure_op((n..2 * n).collect(), "x"),
            CircuitOp::Gate {
                gate: Gate::Unitary(u.dagger()),
                targets: system,
            },
        ],
    })
}

/// Two-qubit parity measurement: CNOT, measure qubit 1 into `y`, CNOT.
pub fn parity_partial_circuit() -> Circuit {
    Circuit::new(2)
        .gate(Gate::Cnot, &[0, 1])
        .measure(&[1], &["y"])
        .gate(Gate::Cnot, &[0, 1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityVariant {
    /// Change of basis, copy of qubit 1 into the ancilla, inverse change of basis.
    ThreeCnot,
    /// The ancilla accumulates the parity with one CNOT from each system qubit.
    Compact,
}

/// Parity of qubits 0 and 1 read out through ancilla qubit 2 into bit `y`.
pub fn parity_ancilla_circuit(variant: ParityVariant) -> Circuit {
    let c = Circuit::new(3);
    match variant {
        ParityVariant::ThreeCnot => c
            .gate(Gate::Cnot, &[0, 1])
            .gate(Gate::Cnot, &[1, 2])
            .gate(Gate::Cnot, &[0, 1])
            .measure(&[2], &["y"]),
        ParityVariant::Compact => c
            .gate(Gate::Cnot, &[0, 2])
            .gate(Gate::Cnot, &[1, 2])
            .measure(&[2], &["y"]),
    }
}
