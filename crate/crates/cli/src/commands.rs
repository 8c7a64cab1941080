//! The `qec`, `usd` and `channel` subcommands.

use std::path::Path;

use qmeas::linalg::ComplexMatrix;
use qmeas::qec::{
    apply_error, decode_circuit, decode_projective, encode, hamming_bound, logical_error_rate, logical_error_trial,
    CodeKind, ErrorCase, NoiseModel, RepetitionCode,
};
use qmeas::random::random_state;
use qmeas::states::fidelity;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::exec::{execute, ResultReport};
use crate::experiment::{ChannelSpec, ExperimentSpec, MeasurementSpec, Mode, StageKind, StageSpec, StateSpec};
use crate::plan::{build, StageOp};

#[derive(Clone, Debug, Serialize)]
pub struct SyndromeRow {
    pub error: String,
    pub syndrome: String,
    pub corrected_qubit: Option<usize>,
    pub fidelity_projective: f64,
    pub fidelity_circuit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HammingCheck {
    pub logical_qubits: usize,
    pub correctable_errors: usize,
    pub min_qubits: usize,
    /// `2^n = 2^k (m + 1)`.
    pub saturated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloRow {
    pub p: f64,
    pub shots: u64,
    pub logical_errors: u64,
    pub logical_error_rate: f64,
    pub standard_error: f64,
    /// Closed-form rate for the noise model.
    pub predicted: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QecReport {
    pub kind: CodeKind,
    pub noise: NoiseModel,
    pub seed: u64,
    pub table: Vec<SyndromeRow>,
    pub hamming: HammingCheck,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub monte_carlo: Vec<MonteCarloRow>,
}

/// Syndrome table for a seeded random logical state, plus a Monte-Carlo logical error
/// rate for each `p`.
pub fn cmd_qec(kind: CodeKind, noise: NoiseModel, ps: &[f64], shots: u64, seed: u64) -> CliResult<QecReport> {
    if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::validation(format!("flip probability {p} outside [0, 1]")));
    }
    if !ps.is_empty() && shots == 0 {
        return Err(CliError::validation("Monte-Carlo mode needs shots >= 1"));
    }
    let code = RepetitionCode::new(kind);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logical = random_state(1, &mut rng);
    let encoded = encode(&logical, &code).map_err(CliError::runtime)?;
    let mut table = Vec::with_capacity(4);
    for err in ErrorCase::SINGLE {
        let corrupted = apply_error(&encoded, err, &code).map_err(CliError::runtime)?;
        let (s, a) = decode_projective(&corrupted, &code, &mut rng).map_err(CliError::runtime)?;
        let (_, b) = decode_circuit(&corrupted, &code, &mut rng).map_err(CliError::runtime)?;
        table.push(SyndromeRow {
            error: err.to_string(),
            syndrome: s.to_string(),
            corrected_qubit: s.flipped_qubit(),
            fidelity_projective: fidelity(&a, &encoded).map_err(CliError::runtime)?,
            fidelity_circuit: fidelity(&b, &encoded).map_err(CliError::runtime)?,
        });
    }
    let min_qubits = hamming_bound(1, 3);
    let hamming = HammingCheck {
        logical_qubits: 1,
        correctable_errors: 3,
        min_qubits,
        saturated: 1usize << min_qubits == (1 << 1) * (3 + 1),
    };

    let mut monte_carlo = Vec::with_capacity(ps.len());
    for &p in ps {
        let errors: u64 = (0..shots)
            .into_par_iter()
            .map(|shot| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(shot);
                logical_error_trial(&code, noise, p, &mut rng).map(|t| u64::from(t.logical_error))
            })
            .collect::<qmeas::Result<Vec<u64>>>()
            .map_err(CliError::runtime)?
            .into_iter()
            .sum();
        let rate = errors as f64 / shots as f64;
        monte_carlo.push(MonteCarloRow {
            p,
            shots,
            logical_errors: errors,
            logical_error_rate: rate,
            standard_error: (rate * (1.0 - rate) / shots as f64).sqrt(),
            predicted: match noise {
                NoiseModel::Independent => logical_error_rate(p),
                NoiseModel::AtMostOne => 0.0,
            },
        });
    }
    Ok(QecReport {
        kind,
        noise,
        seed,
        table,
        hamming,
        monte_carlo,
    })
}

/// Parses a state argument: JSON (`[[0.6,0],[0.8,0]]`, `{"amplitudes": ...}`) or a name.
pub fn parse_state_arg(s: &str) -> CliResult<StateSpec> {
    let t = s.trim();
    if t.starts_with('[') || t.starts_with('{') || t.starts_with('"') {
        serde_json::from_str(t).map_err(|e| CliError::from_json("argument", e))
    } else {
        Ok(StateSpec::Named(t.to_string()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UsdReport {
    pub overlap: f64,
    pub truth: usize,
    /// Closed-form outcome probabilities: conclusive for the true state, never wrong.
    pub predicted: [f64; 3],
    pub result: ResultReport,
}

/// Discriminates `psi0` from `psi1` when the register holds `psi_truth`.
pub fn cmd_usd(psi0: StateSpec, psi1: StateSpec, truth: usize, shots: u64, seed: u64, mode: Mode) -> CliResult<UsdReport> {
    if truth > 1 {
        return Err(CliError::validation("the true state must be 0 or 1"));
    }
    let n = psi0
        .implied_qubits()
        .or_else(|| psi1.implied_qubits())
        .ok_or_else(|| CliError::validation("cannot infer the register size from the states"))?;
    let (a, b) = (psi0.resolve_pure(n)?, psi1.resolve_pure(n)?);
    let overlap = a.inner(&b).map_err(CliError::validation_from)?.norm();
    let spec = ExperimentSpec {
        qubits: n,
        initial: if truth == 0 { psi0.clone() } else { psi1.clone() },
        stages: vec![StageSpec {
            label: Some("usd".into()),
            kind: StageKind::Measurement(MeasurementSpec::Usd {
                psi0,
                psi1,
                targets: None,
            }),
        }],
        shots,
        seed,
        mode,
    };
    let result = execute(&build(&spec)?)?;
    let mut predicted = [0.0, 0.0, overlap];
    predicted[truth] = 1.0 - overlap;
    Ok(UsdReport {
        overlap,
        truth,
        predicted,
        result,
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub qubits: usize,
    #[serde(default)]
    pub initial: StateSpec,
    pub channel: OneOrMany<ChannelSpec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelReport {
    pub qubits: usize,
    pub completeness_deviation: f64,
    pub output: ComplexMatrix,
    pub diagonal: Vec<f64>,
    pub purity: f64,
}

/// Applies the channels of a channel file in order and reports the output density.
pub fn cmd_channel(path: &Path) -> CliResult<ChannelReport> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse {
        source: source.clone(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    let file: ChannelFile = serde_json::from_str(&text).map_err(|e| CliError::from_json(&source, e))?;
    let channels = match file.channel {
        OneOrMany::One(c) => vec![c],
        OneOrMany::Many(cs) => cs,
    };
    let spec = ExperimentSpec {
        qubits: file.qubits,
        initial: file.initial,
        stages: channels
            .into_iter()
            .map(|c| StageSpec {
                label: None,
                kind: StageKind::Channel(c),
            })
            .collect(),
        shots: 1,
        seed: 0,
        mode: Mode::Exact,
    };
    let plan = build(&spec)?;
    let mut rho = plan.initial.density();
    let mut deviation: f64 = 0.0;
    for stage in &plan.stages {
        if let StageOp::Channel(ch) = &stage.op {
            deviation = deviation.max(ch.completeness_deviation());
            rho = ch.apply(&rho).map_err(CliError::runtime)?;
        }
    }
    Ok(ChannelReport {
        qubits: plan.qubits,
        completeness_deviation: deviation,
        diagonal: rho.diagonal(),
        purity: rho.purity(),
        output: rho.into_matrix(),
    })
}
