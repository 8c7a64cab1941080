//! Exact and sampled execution of a [`Plan`].

use std::collections::BTreeMap;

use qmeas::channels::KrausChannel;
use qmeas::circuit::{run, run_distribution_mixed};
use qmeas::linalg::{eig_hermitian, sqrt_psd, STRUCTURAL_TOL};
use qmeas::measure::{Measurement, ZERO_PROBABILITY};
use qmeas::{DensityState, PureState};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::experiment::Mode;
use crate::plan::{Initial, MeasOp, Plan, PlannedMeasurement, StageOp};

/// Sampled and exact results further apart than this many standard errors are flagged.
pub const DIVERGENCE_SIGMAS: f64 = 4.0;

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeRow {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Expectation {
    pub observable: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<OutcomeRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation: Option<Expectation>,
    /// Largest `|frequency − probability| / σ` over the outcomes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sigma: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub diverged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FinalState {
    pub diagonal: Vec<f64>,
    pub purity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultReport {
    pub qubits: usize,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub stages: Vec<StageReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<FinalState>,
    pub diverged: bool,
}

/// Outcome table of one stage: key to exact probability. `None` for stages that record nothing.
type ExactTable = Option<BTreeMap<usize, f64>>;

fn measurement_probabilities(m: &MeasOp, rho: &DensityState) -> qmeas::Result<Vec<f64>> {
    match m {
        MeasOp::Projective(p) => p.probabilities(rho),
        MeasOp::Povm(p) => p.probabilities(rho),
    }
}

fn measurement_post_state(m: &MeasOp, y: usize, rho: &DensityState) -> qmeas::Result<DensityState> {
    match m {
        MeasOp::Projective(p) => p.post_state(y, rho),
        MeasOp::Povm(p) => p.post_state(y, rho),
    }
}

/// `Σ p_k ρ_k` with weights renormalized over the kept branches.
fn blend(parts: Vec<(f64, DensityState)>) -> CliResult<DensityState> {
    let total: f64 = parts.iter().map(|(p, _)| p).sum();
    let parts: Vec<(f64, DensityState)> = parts.into_iter().map(|(p, s)| (p / total, s)).collect();
    DensityState::mixture(&parts).map_err(CliError::runtime)
}

/// Propagates the density matrix through every stage. Each recorded outcome is
/// averaged over before the next stage.
pub fn run_exact(plan: &Plan) -> CliResult<(Vec<ExactTable>, DensityState)> {
    let mut rho = plan.initial.density();
    let mut tables = Vec::with_capacity(plan.stages.len());
    for stage in &plan.stages {
        match &stage.op {
            StageOp::Circuit(c) => {
                let branches = run_distribution_mixed(c, &rho).map_err(CliError::runtime)?;
                let table = (c.measured_bits() > 0).then(|| {
                    let mut t = BTreeMap::new();
                    for b in &branches {
                        *t.entry(b.bits.value()).or_insert(0.0) += b.probability;
                    }
                    t
                });
                tables.push(table);
                rho = blend(branches.into_iter().map(|b| (b.probability, b.state)).collect())?;
            }
            StageOp::Channel(ch) => {
                rho = ch.apply(&rho).map_err(CliError::runtime)?;
                tables.push(None);
            }
            StageOp::Measurement(m) => {
                let probs = measurement_probabilities(&m.op, &rho).map_err(CliError::runtime)?;
                let mut parts = Vec::new();
                for (y, &p) in probs.iter().enumerate() {
                    if p > ZERO_PROBABILITY {
                        parts.push((p, measurement_post_state(&m.op, y, &rho).map_err(CliError::runtime)?));
                    }
                }
                tables.push(Some(probs.into_iter().enumerate().collect()));
                rho = blend(parts)?;
            }
        }
    }
    Ok((tables, rho))
}

/// Per-run data shared by all shots.
struct Sampler<'a> {
    plan: &'a Plan,
    /// Eigen-ensemble of a mixed initial state.
    ensemble: Option<(WeightedIndex<f64>, Vec<PureState>)>,
    /// Square-root instruments of the POVM stages, indexed by stage.
    roots: Vec<Option<KrausChannel>>,
}

impl<'a> Sampler<'a> {
    fn new(plan: &'a Plan) -> CliResult<Self> {
        let ensemble = match &plan.initial {
            Initial::Pure(_) => None,
            Initial::Mixed(rho) => {
                let dec = eig_hermitian(rho.matrix(), STRUCTURAL_TOL).map_err(CliError::runtime)?;
                let (weights, states): (Vec<f64>, Vec<PureState>) = dec
                    .eigenvalues
                    .iter()
                    .zip(dec.eigenvectors)
                    .filter(|(l, _)| **l > ZERO_PROBABILITY)
                    .map(|(l, v)| Ok((*l, PureState::renormalized(v)?)))
                    .collect::<qmeas::Result<Vec<_>>>()
                    .map_err(CliError::runtime)?
                    .into_iter()
                    .unzip();
                let index = WeightedIndex::new(&weights).map_err(CliError::runtime)?;
                Some((index, states))
            }
        };
        let roots = plan
            .stages
            .iter()
            .map(|s| match &s.op {
                StageOp::Measurement(PlannedMeasurement {
                    op: MeasOp::Povm(p), ..
                }) => {
                    let ks = p
                        .effects()
                        .iter()
                        .map(|(_, m)| sqrt_psd(m, STRUCTURAL_TOL))
                        .collect::<qmeas::Result<Vec<_>>>()?;
                    KrausChannel::new(ks).map(Some)
                }
                _ => Ok(None),
            })
            .collect::<qmeas::Result<Vec<_>>>()
            .map_err(CliError::runtime)?;
        Ok(Self { plan, ensemble, roots })
    }

    /// One trajectory on its own stream; returns the recorded key of each stage.
    fn shot(&self, shot: u64) -> qmeas::Result<Vec<Option<usize>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.plan.seed);
        rng.set_stream(shot);
        let mut psi = match (&self.plan.initial, &self.ensemble) {
            (_, Some((index, states))) => states[index.sample(&mut rng)].clone(),
            (Initial::Pure(p), None) => p.clone(),
            (Initial::Mixed(_), None) => unreachable!("mixed initial states carry an ensemble"),
        };
        let mut keys = Vec::with_capacity(self.plan.stages.len());
        for (stage, root) in self.plan.stages.iter().zip(&self.roots) {
            let key = match (&stage.op, root) {
                (StageOp::Circuit(c), _) => {
                    let rec = run(c, &psi, &mut rng)?;
                    psi = rec.final_state;
                    (!rec.bits.is_empty()).then(|| rec.bits.value())
                }
                (StageOp::Channel(ch), _) => {
                    psi = ch.sample_branch(&psi, &mut rng)?.1;
                    None
                }
                (StageOp::Measurement(_), Some(instrument)) => {
                    let (y, post) = instrument.sample_branch(&psi, &mut rng)?;
                    psi = post;
                    Some(y)
                }
                (StageOp::Measurement(m), None) => {
                    let MeasOp::Projective(p) = &m.op else {
                        unreachable!("POVM stages carry an instrument")
                    };
                    let (y, post) = p.sample_pure(&psi, &mut rng)?;
                    psi = post;
                    Some(y)
                }
            };
            keys.push(key);
        }
        Ok(keys)
    }
}

/// Counts per stage and key over `plan.shots` independent trajectories.
///
/// Shot `i` draws from the ChaCha8 stream `i` of `plan.seed`, so counts do not
/// depend on thread scheduling.
pub fn run_sampled(plan: &Plan) -> CliResult<Vec<BTreeMap<usize, u64>>> {
    let sampler = Sampler::new(plan)?;
    let per_shot: Vec<Vec<Option<usize>>> = (0..plan.shots)
        .into_par_iter()
        .map(|s| sampler.shot(s))
        .collect::<qmeas::Result<_>>()
        .map_err(CliError::runtime)?;
    let mut counts = vec![BTreeMap::new(); plan.stages.len()];
    for keys in &per_shot {
        for (table, key) in counts.iter_mut().zip(keys) {
            if let Some(k) = key {
                *table.entry(*k).or_insert(0u64) += 1;
            }
        }
    }
    Ok(counts)
}

fn z_score(p: f64, f: f64, shots: u64) -> f64 {
    let sigma = (p * (1.0 - p) / shots as f64).sqrt();
    if sigma > 1e-15 {
        (f - p).abs() / sigma
    } else if (f - p).abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Runs the plan in its mode and assembles the report.
pub fn execute(plan: &Plan) -> CliResult<ResultReport> {
    let (exact, final_state) = if plan.mode.exact() {
        let (t, rho) = run_exact(plan)?;
        (Some(t), Some(rho))
    } else {
        (None, None)
    };
    let sampled = if plan.mode.sample() {
        Some(run_sampled(plan)?)
    } else {
        None
    };

    let mut stages = Vec::with_capacity(plan.stages.len());
    let mut any_diverged = false;
    for (i, stage) in plan.stages.iter().enumerate() {
        let ex = exact.as_ref().and_then(|t| t[i].as_ref());
        let counts = sampled.as_ref().map(|c| &c[i]);
        let records = match &stage.op {
            StageOp::Circuit(c) => c.measured_bits() > 0,
            StageOp::Channel(_) => false,
            StageOp::Measurement(_) => true,
        };
        let mut report = StageReport {
            stage: stage.label.clone(),
            kind: stage.kind.to_string(),
            outcomes: Vec::new(),
            expectation: None,
            max_sigma: None,
            diverged: false,
        };
        if records {
            let (width, values, observable) = match &stage.op {
                StageOp::Circuit(c) => (Some(c.measured_bits()), None, None),
                StageOp::Measurement(m) => (None, m.values.as_ref(), m.observable.as_ref()),
                StageOp::Channel(_) => unreachable!(),
            };
            let mut keys: Vec<usize> = ex.map(|t| t.keys().copied().collect()).unwrap_or_default();
            if let Some(c) = counts {
                keys.extend(c.keys().filter(|k| ex.is_none_or(|t| !t.contains_key(k))));
                keys.sort_unstable();
            }
            let mut max_sigma: f64 = 0.0;
            for k in keys {
                let probability = ex.map(|t| t.get(&k).copied().unwrap_or(0.0));
                let count = counts.map(|c| c.get(&k).copied().unwrap_or(0));
                let frequency = count.map(|c| c as f64 / plan.shots as f64);
                if let (Some(p), Some(f)) = (probability, frequency) {
                    max_sigma = max_sigma.max(z_score(p, f, plan.shots));
                }
                report.outcomes.push(OutcomeRow {
                    label: match width {
                        Some(w) => format!("{k:0w$b}"),
                        None => k.to_string(),
                    },
                    value: values.map(|v| v[k]),
                    probability,
                    frequency,
                    count,
                });
            }
            if ex.is_some() && counts.is_some() {
                report.diverged = max_sigma > DIVERGENCE_SIGMAS;
                report.max_sigma = max_sigma.is_finite().then_some(max_sigma);
                if report.diverged {
                    log::warn!("stage {}: sampled frequencies differ from exact by {max_sigma:.2} sigma", stage.label);
                }
                any_diverged |= report.diverged;
            }
            if let (Some(values), Some(name)) = (values, observable) {
                report.expectation = Some(expectation(name, values, ex, counts, plan.shots));
            }
        }
        stages.push(report);
    }

    Ok(ResultReport {
        qubits: plan.qubits,
        mode: plan.mode,
        shots: plan.mode.sample().then_some(plan.shots),
        seed: plan.mode.sample().then_some(plan.seed),
        stages,
        final_state: final_state.map(|rho| FinalState {
            diagonal: rho.diagonal(),
            purity: rho.purity(),
        }),
        diverged: any_diverged,
    })
}

fn expectation(
    name: &str,
    values: &[f64],
    exact: Option<&BTreeMap<usize, f64>>,
    counts: Option<&BTreeMap<usize, u64>>,
    shots: u64,
) -> Expectation {
    let exact = exact.map(|t| t.iter().map(|(&k, &p)| p * values[k]).sum());
    let (estimate, standard_error) = match counts {
        Some(c) => {
            let n = shots as f64;
            let mean: f64 = c.iter().map(|(&k, &m)| values[k] * m as f64).sum::<f64>() / n;
            let var: f64 = c.iter().map(|(&k, &m)| (values[k] - mean).powi(2) * m as f64).sum::<f64>() / n;
            (Some(mean), Some((var / n).sqrt()))
        }
        None => (None, None),
    };
    Expectation {
        observable: name.to_string(),
        exact,
        estimate,
        standard_error,
    }
}
