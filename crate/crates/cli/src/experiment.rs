//! Experiment files: the JSON schema accepted by `qmeas run` and `qmeas validate`.

use std::fmt;
use std::path::Path;

use qmeas::linalg::ComplexJson;
use qmeas::states::BellState;
use qmeas::{Complex64, ComplexMatrix, PureState};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sample,
    #[default]
    Both,
}

impl Mode {
    pub fn exact(self) -> bool {
        matches!(self, Mode::Exact | Mode::Both)
    }

    pub fn sample(self) -> bool {
        matches!(self, Mode::Sample | Mode::Both)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Sample => "sample",
            Mode::Both => "both",
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub qubits: usize,
    #[serde(default)]
    pub initial: StateSpec,
    pub stages: Vec<StageSpec>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
}

fn default_shots() -> u64 {
    1000
}

impl ExperimentSpec {
    pub fn from_json(text: &str, source: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::from_json(source, e))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse {
            source: source.clone(),
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
        Self::from_json(&text, &source)
    }
}

/// A state given by name (`"010"`, `"plus"`, `"ghz"`, `"phi+"`...), by amplitudes or
/// by a density matrix. `{"basis": "010"}` and `{"bell": "phi+"}` are accepted as well.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Amplitudes(Vec<ComplexJson>),
    Pure { amplitudes: Vec<ComplexJson> },
    Mixed { density: ComplexMatrix },
    Basis { basis: String },
    Bell { bell: String },
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::Named("zero".into())
    }
}

/// Initial state after name resolution.
#[derive(Clone, Debug)]
pub enum InitialState {
    Pure(PureState),
    Mixed(ComplexMatrix),
}

impl StateSpec {
    /// Resolves the spec on an `n`-qubit register. Names that fix their own size
    /// (bit strings, Bell states) must agree with `n`.
    pub fn resolve(&self, n: usize) -> CliResult<InitialState> {
        match self {
            StateSpec::Named(name) => named_state(name, n).map(InitialState::Pure),
            StateSpec::Basis { basis } => {
                if !is_bits(basis) {
                    return Err(CliError::validation(format!("'{basis}' is not a bit string")));
                }
                named_state(basis, n).map(InitialState::Pure)
            }
            StateSpec::Bell { bell } => {
                if !matches!(bell.as_str(), "phi+" | "phi-" | "psi+" | "psi-") {
                    return Err(CliError::validation(format!("unknown Bell state '{bell}'")));
                }
                named_state(bell, n).map(InitialState::Pure)
            }
            StateSpec::Amplitudes(a) | StateSpec::Pure { amplitudes: a } => {
                let amps: Vec<Complex64> = a.iter().map(|c| c.0).collect();
                check_dim("state", amps.len(), 1 << n)?;
                PureState::new(amps)
                    .map(InitialState::Pure)
                    .map_err(|e| CliError::validation(format!("state: {e}")))
            }
            StateSpec::Mixed { density } => {
                check_dim("density matrix", density.rows(), 1 << n)?;
                Ok(InitialState::Mixed(density.clone()))
            }
        }
    }

    pub fn resolve_pure(&self, n: usize) -> CliResult<PureState> {
        match self.resolve(n)? {
            InitialState::Pure(p) => Ok(p),
            InitialState::Mixed(_) => Err(CliError::validation("a pure state is required here")),
        }
    }

    /// Qubit count implied by the spec itself, when it has one.
    pub fn implied_qubits(&self) -> Option<usize> {
        let dim = match self {
            StateSpec::Named(name) | StateSpec::Basis { basis: name } | StateSpec::Bell { bell: name } => {
                if is_bits(name) {
                    return Some(name.len());
                }
                return match name.as_str() {
                    "+" | "-" | "plus" | "minus" => Some(1),
                    "phi+" | "phi-" | "psi+" | "psi-" => Some(2),
                    _ => ghz_size(name),
                };
            }
            StateSpec::Amplitudes(a) | StateSpec::Pure { amplitudes: a } => a.len(),
            StateSpec::Mixed { density } => density.rows(),
        };
        dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
    }
}

fn named_state(name: &str, n: usize) -> CliResult<PureState> {
    let bell = |b| {
        check_dim("Bell state", 4, 1 << n)?;
        Ok(PureState::bell(b))
    };
    match name {
        "zero" => Ok(PureState::basis(n, 0)),
        "plus" | "+" => Ok(PureState::plus(n)),
        "minus" | "-" => {
            check_dim("|->", 2, 1 << n)?;
            Ok(PureState::minus())
        }
        "ghz" => Ok(PureState::ghz(n)),
        ghz if ghz_size(ghz).is_some() => {
            check_dim(ghz, 1 << ghz_size(ghz).unwrap_or(0), 1 << n)?;
            Ok(PureState::ghz(n))
        }
        "phi+" => bell(BellState::PhiPlus),
        "phi-" => bell(BellState::PhiMinus),
        "psi+" => bell(BellState::PsiPlus),
        "psi-" => bell(BellState::PsiMinus),
        bits if is_bits(bits) => {
            check_dim("bit string", 1 << bits.len(), 1 << n)?;
            PureState::from_bits(bits).map_err(CliError::validation_from)
        }
        other => Err(CliError::validation(format!("unknown state name '{other}'"))),
    }
}

fn is_bits(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c == '0' || c == '1')
}

/// `ghz3` -> 3.
fn ghz_size(name: &str) -> Option<usize> {
    name.strip_prefix("ghz")?.parse().ok().filter(|&k| k >= 1)
}

fn check_dim(what: &str, found: usize, expected: usize) -> CliResult<()> {
    if found != expected {
        return Err(CliError::validation(format!(
            "{what} has dimension {found}, register needs {expected}"
        )));
    }
    Ok(())
}

impl CliError {
    pub(crate) fn validation_from(e: qmeas::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct StageSpec {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(flatten)]
    pub kind: StageKind,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Circuit(Vec<OpSpec>),
    Channel(ChannelSpec),
    Measurement(MeasurementSpec),
}

impl StageKind {
    pub fn name(&self) -> &'static str {
        match self {
            StageKind::Circuit(_) => "circuit",
            StageKind::Channel(c) => c.name(),
            StageKind::Measurement(m) => m.name(),
        }
    }
}

/// One circuit instruction. `if` takes a condition such as `"y0 & !y1"` over bits
/// stored earlier in the same circuit stage.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OpSpec {
    Gate {
        gate: String,
        targets: Vec<usize>,
        #[serde(default, rename = "if")]
        condition: Option<String>,
    },
    Unitary {
        unitary: ComplexMatrix,
        targets: Vec<usize>,
        #[serde(default, rename = "if")]
        condition: Option<String>,
    },
    Measure {
        measure: Vec<usize>,
        #[serde(default)]
        store: Option<Vec<String>>,
    },
}

/// A channel; single-qubit channels listed with several targets act on each independently.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Pauli {
        p: [f64; 4],
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    #[serde(alias = "bitflip")]
    BitFlip {
        p: f64,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    Dephasing {
        p: f64,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    /// Kraus operators acting jointly on `targets` (all qubits when omitted).
    Kraus {
        #[serde(alias = "matrices")]
        kraus: Vec<ComplexMatrix>,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    /// `inner` built on a register of `targets.len()` qubits, then placed on `targets`.
    Embed { inner: Box<ChannelSpec>, targets: Vec<usize> },
}

impl ChannelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelSpec::Pauli { .. } => "pauli",
            ChannelSpec::BitFlip { .. } => "bit_flip",
            ChannelSpec::Dephasing { .. } => "dephasing",
            ChannelSpec::Kraus { .. } => "kraus",
            ChannelSpec::Embed { .. } => "embed",
        }
    }
}

/// A measurement on `targets` (all qubits when omitted).
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementSpec {
    Computational {
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    /// `n`, when given, must match the number of measured qubits.
    Parity {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    /// Either explicit projectors, or an orthonormal basis with a partition of its indices.
    Projective {
        #[serde(default)]
        projectors: Option<Vec<ComplexMatrix>>,
        #[serde(default)]
        basis: Option<Vec<Vec<ComplexJson>>>,
        #[serde(default)]
        partition: Option<Vec<Vec<usize>>>,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    /// A Hermitian matrix or a Pauli string such as `"ZZ"`.
    Observable {
        #[serde(default)]
        matrix: Option<ComplexMatrix>,
        #[serde(default)]
        pauli: Option<String>,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    Povm {
        effects: Vec<ComplexMatrix>,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
    /// Unambiguous discrimination of two pure states.
    Usd {
        psi0: StateSpec,
        psi1: StateSpec,
        #[serde(default)]
        targets: Option<Vec<usize>>,
    },
}

impl MeasurementSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MeasurementSpec::Computational { .. } => "computational",
            MeasurementSpec::Parity { .. } => "parity",
            MeasurementSpec::Projective { .. } => "projective",
            MeasurementSpec::Observable { .. } => "observable",
            MeasurementSpec::Povm { .. } => "povm",
            MeasurementSpec::Usd { .. } => "usd",
        }
    }

    pub fn targets(&self) -> Option<&[usize]> {
        match self {
            MeasurementSpec::Computational { targets }
            | MeasurementSpec::Parity { targets, .. }
            | MeasurementSpec::Projective { targets, .. }
            | MeasurementSpec::Observable { targets, .. }
            | MeasurementSpec::Povm { targets, .. }
            | MeasurementSpec::Usd { targets, .. } => targets.as_deref(),
        }
    }
}
