//! Turns an [`ExperimentSpec`] into executable stages, recording structural deviations.

use std::collections::BTreeMap;
use std::str::FromStr;

use qmeas::channels::{bit_flip, compose, dephasing, embed, pauli_channel, KrausChannel};
use qmeas::circuit::{Circuit, CircuitOp, Condition, Gate};
use qmeas::linalg::{embed_operator, psd_deviation, unitary_deviation, ComplexMatrix, STRUCTURAL_TOL};
use qmeas::measure::{
    computational_measurement, measurement_from_partition, observable_from_hermitian, orthonormality_deviation,
    parity_measurement, usd_povm, PauliString, Povm, ProjectiveMeasurement,
};
use qmeas::{Complex64, DensityState, PureState};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::experiment::{ChannelSpec, ExperimentSpec, InitialState, MeasurementSpec, Mode, OpSpec, StageKind};

pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Register cap, overridable through `QMEAS_MAX_QUBITS`.
pub fn max_qubits() -> usize {
    std::env::var("QMEAS_MAX_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

#[derive(Clone, Debug)]
pub enum MeasOp {
    Projective(ProjectiveMeasurement),
    Povm(Povm),
}

#[derive(Clone, Debug)]
pub struct PlannedMeasurement {
    pub op: MeasOp,
    /// Eigenvalue of each outcome label for observables.
    pub values: Option<Vec<f64>>,
    pub observable: Option<String>,
}

#[derive(Clone, Debug)]
pub enum StageOp {
    Circuit(Circuit),
    Channel(KrausChannel),
    Measurement(PlannedMeasurement),
}

#[derive(Clone, Debug)]
pub struct PlannedStage {
    pub label: String,
    pub kind: &'static str,
    pub op: StageOp,
}

#[derive(Clone, Debug)]
pub enum Initial {
    Pure(PureState),
    Mixed(DensityState),
}

impl Initial {
    pub fn density(&self) -> DensityState {
        match self {
            Initial::Pure(p) => p.to_density(),
            Initial::Mixed(d) => d.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Plan {
    pub qubits: usize,
    pub initial: Initial,
    pub stages: Vec<PlannedStage>,
    pub shots: u64,
    pub seed: u64,
    pub mode: Mode,
}

/// Maximum deviations found for one stage (or the initial state).
#[derive(Clone, Debug, Serialize)]
pub struct StageCheck {
    pub stage: String,
    pub kind: String,
    pub deviations: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl StageCheck {
    fn new(stage: String, kind: &str) -> Self {
        Self {
            stage,
            kind: kind.to_string(),
            deviations: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn record(&mut self, what: &'static str, deviation: f64) {
        let e = self.deviations.entry(what).or_insert(0.0);
        *e = e.max(deviation);
        // NaN fails too
        if !(deviation <= STRUCTURAL_TOL) {
            self.failures
                .push(format!("{what} deviation {deviation:.3e} exceeds {STRUCTURAL_TOL:.0e}"));
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationSummary {
    pub qubits: usize,
    pub valid: bool,
    pub tolerance: f64,
    pub checks: Vec<StageCheck>,
}

impl ValidationSummary {
    pub fn first_failure(&self) -> Option<String> {
        self.checks
            .iter()
            .find_map(|c| c.failures.first().map(|f| format!("{} ({}): {f}", c.stage, c.kind)))
    }
}

/// Validates `spec` and, when every check passes, builds the executable plan.
///
/// Shape errors (bad targets, unknown names, wrong dimensions) are returned directly;
/// numeric deviations are collected in the summary.
pub fn check(spec: &ExperimentSpec) -> CliResult<(ValidationSummary, Option<Plan>)> {
    let n = spec.qubits;
    let cap = max_qubits();
    if n == 0 {
        return Err(CliError::validation("register must have at least one qubit"));
    }
    if n > cap {
        return Err(CliError::validation(format!(
            "register of {n} qubits exceeds the cap of {cap} (set QMEAS_MAX_QUBITS to raise it)"
        )));
    }
    if spec.mode.sample() && spec.shots == 0 {
        return Err(CliError::validation("sampling needs shots >= 1"));
    }

    let mut checks = Vec::new();
    let mut init_check = StageCheck::new("initial".into(), "state");
    let initial = match spec.initial.resolve(n)? {
        InitialState::Pure(p) => Initial::Pure(p),
        InitialState::Mixed(m) => {
            init_check.record("hermitian", m.hermitian_deviation());
            init_check.record("psd", psd_deviation(&m));
            init_check.record("trace", (m.trace().map_err(CliError::validation_from)? - 1.0).norm());
            Initial::Mixed(DensityState::new(m.hermitian_part()).unwrap_or_else(|_| DensityState::maximally_mixed(n)))
        }
    };
    checks.push(init_check);

    let mut stages = Vec::new();
    for (i, st) in spec.stages.iter().enumerate() {
        let label = st.label.clone().unwrap_or_else(|| format!("stage{i}"));
        let mut c = StageCheck::new(label.clone(), st.kind.name());
        let op = match &st.kind {
            StageKind::Circuit(ops) => build_circuit(n, i, ops, &mut c)?.map(StageOp::Circuit),
            StageKind::Channel(ch) => Some(StageOp::Channel(build_channel(n, ch, &mut c)?)),
            StageKind::Measurement(m) => build_measurement(n, m, &mut c)?.map(StageOp::Measurement),
        };
        let failed = !c.failures.is_empty();
        checks.push(c);
        if let (Some(op), false) = (op, failed) {
            stages.push(PlannedStage {
                label,
                kind: st.kind.name(),
                op,
            });
        }
    }

    let valid = checks.iter().all(|c| c.failures.is_empty());
    let summary = ValidationSummary {
        qubits: n,
        valid,
        tolerance: STRUCTURAL_TOL,
        checks,
    };
    let plan = valid.then(|| Plan {
        qubits: n,
        initial,
        stages,
        shots: spec.shots,
        seed: spec.seed,
        mode: spec.mode,
    });
    Ok((summary, plan))
}

/// Validates and builds, turning any failed check into a validation error.
pub fn build(spec: &ExperimentSpec) -> CliResult<Plan> {
    let (summary, plan) = check(spec)?;
    plan.ok_or_else(|| CliError::validation(summary.first_failure().unwrap_or_default()))
}

fn targets_or_all(targets: Option<&[usize]>, n: usize) -> Vec<usize> {
    targets.map_or_else(|| (0..n).collect(), <[usize]>::to_vec)
}

fn check_targets(targets: &[usize], n: usize) -> CliResult<()> {
    if targets.is_empty() {
        return Err(CliError::validation("empty target list"));
    }
    for (j, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(CliError::validation(format!("target {t} outside a {n}-qubit register")));
        }
        if targets[..j].contains(&t) {
            return Err(CliError::validation(format!("target {t} repeated")));
        }
    }
    Ok(())
}

fn lift(m: &ComplexMatrix, targets: &[usize], n: usize) -> CliResult<ComplexMatrix> {
    if targets.len() == n && targets.iter().enumerate().all(|(i, &t)| i == t) {
        if m.rows() != 1 << n || m.cols() != 1 << n {
            return Err(CliError::validation(format!(
                "operator is {}x{}, register needs {}x{}",
                m.rows(),
                m.cols(),
                1 << n,
                1 << n
            )));
        }
        return Ok(m.clone());
    }
    embed_operator(m, targets, n).map_err(CliError::validation_from)
}

fn build_circuit(n: usize, stage: usize, ops: &[OpSpec], check: &mut StageCheck) -> CliResult<Option<Circuit>> {
    let mut c = Circuit::new(n);
    let parse_condition = |s: &Option<String>| -> CliResult<Option<Condition>> {
        s.as_deref()
            .map(|s| Condition::from_str(s).map_err(CliError::validation_from))
            .transpose()
    };
    for op in ops {
        let (gate, targets, condition) = match op {
            OpSpec::Gate {
                gate,
                targets,
                condition,
            } => (
                Gate::from_str(gate).map_err(CliError::validation_from)?,
                targets,
                parse_condition(condition)?,
            ),
            OpSpec::Unitary {
                unitary,
                targets,
                condition,
            } => {
                check.record("unitarity", unitary_deviation(unitary));
                (Gate::Unitary(unitary.clone()), targets, parse_condition(condition)?)
            }
            OpSpec::Measure { measure, store } => {
                let names: Vec<String> = match store {
                    Some(s) => s.clone(),
                    None => measure.iter().map(|q| format!("s{stage}q{q}")).collect(),
                };
                c.ops.push(CircuitOp::Measure {
                    targets: measure.clone(),
                    store: names,
                });
                continue;
            }
        };
        c.ops.push(match condition {
            Some(condition) => CircuitOp::Controlled {
                gate,
                targets: targets.clone(),
                condition,
            },
            None => CircuitOp::Gate {
                gate,
                targets: targets.clone(),
            },
        });
    }
    if !check.failures.is_empty() {
        return Ok(None);
    }
    c.validate().map_err(CliError::validation_from)?;
    Ok(Some(c))
}

fn build_channel(n: usize, spec: &ChannelSpec, check: &mut StageCheck) -> CliResult<KrausChannel> {
    let single = |local: KrausChannel, targets: &Option<Vec<usize>>| -> CliResult<KrausChannel> {
        let targets = targets_or_all(targets.as_deref(), n);
        check_targets(&targets, n)?;
        targets.iter().try_fold(KrausChannel::identity(n), |acc, &q| {
            let step = embed(&local, &[q], n).map_err(CliError::validation_from)?;
            compose(&step, &acc).map_err(CliError::validation_from)
        })
    };
    let channel = match spec {
        ChannelSpec::Pauli { p, targets } => single(pauli_channel(*p).map_err(CliError::validation_from)?, targets)?,
        ChannelSpec::BitFlip { p, targets } => single(bit_flip(*p).map_err(CliError::validation_from)?, targets)?,
        ChannelSpec::Dephasing { p, targets } => single(dephasing(*p).map_err(CliError::validation_from)?, targets)?,
        ChannelSpec::Kraus { kraus, targets } => {
            let targets = targets_or_all(targets.as_deref(), n);
            check_targets(&targets, n)?;
            if kraus.is_empty() {
                return Err(CliError::validation("channel has no Kraus operators"));
            }
            let lifted = kraus
                .iter()
                .map(|k| lift(k, &targets, n))
                .collect::<CliResult<Vec<_>>>()?;
            KrausChannel::new(lifted).map_err(CliError::validation_from)?
        }
        ChannelSpec::Embed { inner, targets } => {
            check_targets(targets, n)?;
            let local = build_channel(targets.len(), inner, check)?;
            embed(&local, targets, n).map_err(CliError::validation_from)?
        }
    };
    check.record("completeness", channel.completeness_deviation());
    Ok(channel)
}

fn matrix_sum(ms: &[ComplexMatrix], dim: usize) -> ComplexMatrix {
    ms.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, m| &acc + m)
}

fn build_measurement(
    n: usize,
    spec: &MeasurementSpec,
    check: &mut StageCheck,
) -> CliResult<Option<PlannedMeasurement>> {
    let targets = targets_or_all(spec.targets(), n);
    check_targets(&targets, n)?;
    let k = targets.len();
    let dim = 1usize << n;
    let lift_all = |ms: Vec<ComplexMatrix>| -> CliResult<Vec<ComplexMatrix>> {
        ms.iter().map(|m| lift(m, &targets, n)).collect()
    };
    let local_projectors = |m: ProjectiveMeasurement| m.outcomes().iter().map(|(_, p)| p.clone()).collect();

    let mut values = None;
    let mut observable = None;
    let op = match spec {
        MeasurementSpec::Computational { .. } => {
            projective(lift_all(local_projectors(computational_measurement(k)))?, dim, check)
        }
        MeasurementSpec::Parity { n: declared, .. } => {
            if let Some(d) = declared.filter(|&d| d != k) {
                return Err(CliError::validation(format!("parity over {d} qubits but {k} are measured")));
            }
            projective(lift_all(local_projectors(parity_measurement(k)))?, dim, check)
        }
        MeasurementSpec::Projective {
            projectors,
            basis,
            partition,
            ..
        } => {
            let local = match (projectors, basis, partition) {
                (Some(ps), None, None) => ps.clone(),
                (None, Some(b), Some(part)) => {
                    let b: Vec<Vec<Complex64>> = b.iter().map(|v| v.iter().map(|c| c.0).collect()).collect();
                    if b.len() != 1 << k || b.iter().any(|v| v.len() != 1 << k) {
                        return Err(CliError::validation(format!(
                            "basis must hold {} vectors of length {}",
                            1 << k,
                            1 << k
                        )));
                    }
                    check.record("orthonormality", orthonormality_deviation(&b).map_err(CliError::validation_from)?);
                    if !check.failures.is_empty() {
                        return Ok(None);
                    }
                    local_projectors(measurement_from_partition(&b, part).map_err(CliError::validation_from)?)
                }
                _ => {
                    return Err(CliError::validation(
                        "projective measurement needs either 'projectors' or 'basis' with 'partition'",
                    ))
                }
            };
            projective(lift_all(local)?, dim, check)
        }
        MeasurementSpec::Observable { matrix, pauli, .. } => {
            let (local, name) = match (matrix, pauli) {
                (Some(m), None) => (m.clone(), "matrix".to_string()),
                (None, Some(p)) => {
                    let ps = PauliString::from_str(p).map_err(CliError::validation_from)?;
                    if ps.n() != k {
                        return Err(CliError::validation(format!("Pauli string '{p}' does not act on {k} qubits")));
                    }
                    (ps.matrix(), ps.to_string())
                }
                _ => return Err(CliError::validation("observable needs exactly one of 'matrix' or 'pauli'")),
            };
            let h = lift(&local, &targets, n)?;
            check.record("hermitian", h.hermitian_deviation());
            if !check.failures.is_empty() {
                return Ok(None);
            }
            let o = observable_from_hermitian(&h, STRUCTURAL_TOL).map_err(CliError::validation_from)?;
            values = Some(o.values());
            observable = Some(name);
            Some(MeasOp::Projective(o.measurement()))
        }
        MeasurementSpec::Povm { effects, .. } => {
            if effects.is_empty() {
                return Err(CliError::validation("POVM has no effects"));
            }
            let lifted = lift_all(effects.clone())?;
            for e in &lifted {
                check.record("hermitian", e.hermitian_deviation());
                check.record("psd", psd_deviation(e));
            }
            check.record(
                "completeness",
                matrix_sum(&lifted, dim).max_abs_diff(&ComplexMatrix::identity(dim)),
            );
            if !check.failures.is_empty() {
                return Ok(None);
            }
            let labeled = lifted.into_iter().enumerate().collect();
            Some(MeasOp::Povm(Povm::new(labeled).map_err(CliError::validation_from)?))
        }
        MeasurementSpec::Usd { psi0, psi1, .. } => {
            let a = psi0.resolve_pure(k)?;
            let b = psi1.resolve_pure(k)?;
            let local = usd_povm(&a, &b).map_err(CliError::validation_from)?;
            let lifted = lift_all(local.effects().iter().map(|(_, m)| m.clone()).collect())?;
            check.record(
                "completeness",
                matrix_sum(&lifted, dim).max_abs_diff(&ComplexMatrix::identity(dim)),
            );
            let labeled = lifted.into_iter().enumerate().collect();
            Some(MeasOp::Povm(Povm::new(labeled).map_err(CliError::validation_from)?))
        }
    };
    Ok(op.map(|op| PlannedMeasurement {
        op,
        values,
        observable,
    }))
}

fn projective(projectors: Vec<ComplexMatrix>, dim: usize, check: &mut StageCheck) -> Option<MeasOp> {
    for p in &projectors {
        check.record("hermitian", p.hermitian_deviation());
        check.record("idempotence", (p * p).max_abs_diff(p));
    }
    for (i, a) in projectors.iter().enumerate() {
        for b in &projectors[i + 1..] {
            check.record("orthogonality", (a * b).max_abs());
        }
    }
    check.record(
        "completeness",
        matrix_sum(&projectors, dim).max_abs_diff(&ComplexMatrix::identity(dim)),
    );
    if !check.failures.is_empty() {
        return None;
    }
    let labeled = projectors.into_iter().enumerate().collect();
    ProjectiveMeasurement::new(labeled).ok().map(MeasOp::Projective)
}
