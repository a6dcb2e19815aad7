//! Cross-entropy training with Adam, accuracy metrics, and the five-run
//! uncertainty protocol (weight-initialisation spread vs sampling spread).

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_qaoa_embedding, build_qaum, evaluate, permute_features, ParamCircuit};
use crate::data::{self, LabeledDataset, SampleSpec, N_FEATURES};
use crate::error::{Error, Result};
use crate::gradient::loss_and_grad;
use crate::rng::{self, Purpose};
use crate::statevector::BlochVector;

pub const READOUT_WIRE: usize = 0;
pub const DEFAULT_CHECKPOINTS: [usize; 4] = [1, 50, 100, 150];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ansatz {
    Qaum,
    Qaoa,
}

impl std::fmt::Display for Ansatz {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Ansatz::Qaum => "QAUM",
            Ansatz::Qaoa => "QAOA",
        })
    }
}

impl std::str::FromStr for Ansatz {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qaum" => Ok(Ansatz::Qaum),
            "qaoa" => Ok(Ansatz::Qaoa),
            _ => Err(Error::Config(format!("unknown ansatz {s:?} (expected qaum or qaoa)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub ansatz: Ansatz,
    pub repetitions: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub clamp_epsilon: f64,
    pub weight_seed: u64,
    pub sample_seed: u64,
    pub sample_size: usize,
    /// Wire count of the QAOA embedding; the extra wire beyond the features
    /// carries no encoding.
    pub qaoa_wires: usize,
    /// Optional relabelling of feature slots, see [`permute_features`].
    pub feature_order: Option<Vec<usize>>,
    /// Epochs at which Bloch coordinates are recorded (QAUM only).
    pub checkpoints: Vec<usize>,
    /// Points per Bloch checkpoint; 0 disables the trajectory.
    pub bloch_points: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            ansatz: Ansatz::Qaum,
            repetitions: 2,
            learning_rate: 0.1,
            epochs: 150,
            clamp_epsilon: 1e-7,
            weight_seed: 0,
            sample_seed: 0,
            sample_size: 100,
            qaoa_wires: 9,
            feature_order: None,
            checkpoints: DEFAULT_CHECKPOINTS.to_vec(),
            bloch_points: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be ≥ 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be ≥ 1".into()));
        }
        if !(self.clamp_epsilon > 0.0 && self.clamp_epsilon < 0.5) {
            return Err(Error::Config(format!("clamp_epsilon must lie in (0, 0.5), got {}", self.clamp_epsilon)));
        }
        if self.sample_size == 0 || !self.sample_size.is_multiple_of(2) {
            return Err(Error::Config(format!("sample_size must be even and positive, got {}", self.sample_size)));
        }
        if self.ansatz == Ansatz::Qaoa && self.qaoa_wires < N_FEATURES {
            return Err(Error::Config(format!("qaoa_wires must be ≥ {N_FEATURES}, got {}", self.qaoa_wires)));
        }
        Ok(())
    }

    pub fn build_circuit(&self) -> Result<ParamCircuit> {
        let circuit = match self.ansatz {
            Ansatz::Qaum => build_qaum(N_FEATURES, self.repetitions)?,
            Ansatz::Qaoa => build_qaoa_embedding(self.qaoa_wires, N_FEATURES, self.repetitions)?,
        };
        match &self.feature_order {
            Some(order) => permute_features(&circuit, order),
            None => Ok(circuit),
        }
    }
}

/// Binary cross-entropy with `p1` clamped to `[ε, 1 − ε]`.
pub fn cross_entropy(p1: f64, label: u8, clamp_epsilon: f64) -> f64 {
    let q = p1.clamp(clamp_epsilon, 1.0 - clamp_epsilon);
    if label == 1 {
        -q.ln()
    } else {
        -(1.0 - q).ln()
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First and second moment estimates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl MomentState {
    pub fn zeros(n: usize) -> Self {
        MomentState { m: vec![0.0; n], v: vec![0.0; n] }
    }
}

/// One bias-corrected Adam update. `step_index` counts from 1.
pub fn adam_step(
    weights: &mut [f64],
    grads: &[f64],
    state: &mut MomentState,
    step_index: u32,
    learning_rate: f64,
) -> Result<()> {
    if weights.len() != grads.len() || state.m.len() != grads.len() || state.v.len() != grads.len() {
        return Err(Error::Structure(format!(
            "Adam length mismatch: {} weights, {} gradients, {}/{} moments",
            weights.len(),
            grads.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    if step_index == 0 {
        return Err(Error::Usage("Adam step index starts at 1".into()));
    }
    if let Some(k) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("gradient entry {k} is {} at step {step_index}", grads[k])));
    }
    let c1 = 1.0 - ADAM_BETA1.powi(step_index as i32);
    let c2 = 1.0 - ADAM_BETA2.powi(step_index as i32);
    for k in 0..weights.len() {
        let g = grads[k];
        state.m[k] = ADAM_BETA1 * state.m[k] + (1.0 - ADAM_BETA1) * g;
        state.v[k] = ADAM_BETA2 * state.v[k] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = state.m[k] / c1;
        let v_hat = state.v[k] / c2;
        weights[k] -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub label: u8,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    fn new(label: u8, b: BlochVector) -> Self {
        BlochPoint { label, x: b.x, y: b.y, z: b.z }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochCheckpoint {
    pub epoch: usize,
    pub points: Vec<BlochPoint>,
}

impl BlochCheckpoint {
    /// Mean z over points with the given label, `None` if there are none.
    pub fn mean_z(&self, label: u8) -> Option<f64> {
        let zs: Vec<f64> = self.points.iter().filter(|p| p.label == label).map(|p| p.z).collect();
        (!zs.is_empty()).then(|| zs.iter().sum::<f64>() / zs.len() as f64)
    }
}

/// Final single-qubit state of every row (up to `max_points`) on the Bloch sphere.
pub fn bloch_checkpoint<F: AsRef<[f64]>>(
    circuit: &ParamCircuit,
    weights: &[f64],
    rows: &[F],
    labels: &[u8],
    max_points: usize,
) -> Result<Vec<BlochPoint>> {
    if circuit.n_qubits() != 1 {
        return Err(Error::Structure(format!(
            "Bloch checkpoints need a single-qubit ansatz, circuit has {} qubits",
            circuit.n_qubits()
        )));
    }
    rows.iter()
        .zip(labels)
        .take(max_points)
        .map(|(x, &y)| Ok(BlochPoint::new(y, circuit.state(weights, x.as_ref())?.bloch()?)))
        .collect()
}

/// Fraction of rows where `p1 > 0.5` agrees with the label.
pub fn accuracy<F: AsRef<[f64]> + Sync>(circuit: &ParamCircuit, weights: &[f64], rows: &[F], labels: &[u8]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Usage("accuracy of an empty set".into()));
    }
    let hits: Vec<bool> = rows
        .par_iter()
        .zip(labels.par_iter())
        .map(|(x, &y)| Ok((evaluate(circuit, weights, x.as_ref(), READOUT_WIRE)?.p1 > 0.5) == (y == 1)))
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / rows.len() as f64)
}

pub fn initial_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, Purpose::WeightInit);
    (0..n).map(|_| rng.random_range(0.0..=2.0 * PI)).collect()
}

/// Settings of the bare optimization loop. Unlike [`TrainConfig`] this
/// accepts a zero learning rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopSettings {
    pub learning_rate: f64,
    pub epochs: usize,
    pub clamp_epsilon: f64,
}

pub struct LoopOutcome {
    /// Loss at the start of each epoch, before that epoch's update.
    pub loss_curve: Vec<f64>,
    pub final_weights: Vec<f64>,
}

/// Full-batch Adam descent. `on_epoch(epoch, weights)` runs with the weights
/// in effect at the start of each 1-based epoch.
pub fn optimize<F: AsRef<[f64]> + Sync>(
    circuit: &ParamCircuit,
    mut weights: Vec<f64>,
    rows: &[F],
    labels: &[u8],
    settings: LoopSettings,
    mut on_epoch: impl FnMut(usize, &[f64]) -> Result<()>,
) -> Result<LoopOutcome> {
    let mut moments = MomentState::zeros(weights.len());
    let mut loss_curve = Vec::with_capacity(settings.epochs);
    for epoch in 1..=settings.epochs {
        on_epoch(epoch, &weights)?;
        let (loss, grad) = loss_and_grad(circuit, &weights, rows, labels, READOUT_WIRE, settings.clamp_epsilon)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("loss is {loss} at epoch {epoch}")));
        }
        loss_curve.push(loss);
        adam_step(&mut weights, grad.as_slice(), &mut moments, epoch as u32, settings.learning_rate)?;
    }
    Ok(LoopOutcome { loss_curve, final_weights: weights })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub n_qubits: usize,
    pub n_weights: usize,
    pub loss_curve: Vec<f64>,
    pub min_loss: f64,
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
    pub train_indices: Vec<usize>,
    pub holdout_indices: Vec<usize>,
    pub final_weights: Vec<f64>,
    pub wall_time: f64,
    pub bloch_trajectory: Option<Vec<BlochCheckpoint>>,
}

/// Trains one model on a balanced sample of the (already scaled) dataset.
pub fn train(config: &TrainConfig, dataset: &LabeledDataset) -> Result<TrainReport> {
    config.validate()?;
    if dataset.scaling().is_none() {
        return Err(Error::Usage("training expects a scaled dataset (call fit_scale first)".into()));
    }
    let started = Instant::now();
    let circuit = config.build_circuit()?;
    let (train_idx, holdout_idx) =
        data::balanced_sample_indices(dataset, SampleSpec { size: config.sample_size, seed: config.sample_seed })?;
    let train_set = dataset.subset(&train_idx);
    let holdout_set = dataset.subset(&holdout_idx);

    let track_bloch = config.ansatz == Ansatz::Qaum && config.bloch_points > 0;
    let display = if track_bloch {
        dataset.subset(&data::display_indices(dataset, config.bloch_points, config.sample_seed))
    } else {
        dataset.subset(&[])
    };
    let mut trajectory = Vec::new();

    let settings = LoopSettings {
        learning_rate: config.learning_rate,
        epochs: config.epochs,
        clamp_epsilon: config.clamp_epsilon,
    };
    let weights = initial_weights(circuit.n_weights(), config.weight_seed);
    let outcome = optimize(&circuit, weights, train_set.features(), train_set.labels(), settings, |epoch, w| {
        if track_bloch && config.checkpoints.contains(&epoch) {
            let points = bloch_checkpoint(&circuit, w, display.features(), display.labels(), config.bloch_points)?;
            trajectory.push(BlochCheckpoint { epoch, points });
        }
        Ok(())
    })?;

    let w = &outcome.final_weights;
    let train_accuracy = accuracy(&circuit, w, train_set.features(), train_set.labels())?;
    let holdout_accuracy = accuracy(&circuit, w, holdout_set.features(), holdout_set.labels())?;
    let min_loss = outcome.loss_curve.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(TrainReport {
        config: config.clone(),
        n_qubits: circuit.n_qubits(),
        n_weights: circuit.n_weights(),
        min_loss,
        loss_curve: outcome.loss_curve,
        train_accuracy,
        holdout_accuracy,
        train_indices: train_idx,
        holdout_indices: holdout_idx,
        final_weights: outcome.final_weights,
        wall_time: started.elapsed().as_secs_f64(),
        bloch_trajectory: track_bloch.then_some(trajectory),
    })
}

/// Compact per-run record kept by the uncertainty protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub weight_seed: u64,
    pub sample_seed: u64,
    pub min_loss: f64,
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
}

impl From<&TrainReport> for RunSummary {
    fn from(r: &TrainReport) -> Self {
        RunSummary {
            weight_seed: r.config.weight_seed,
            sample_seed: r.config.sample_seed,
            min_loss: r.min_loss,
            train_accuracy: r.train_accuracy,
            holdout_accuracy: r.holdout_accuracy,
        }
    }
}

pub const PROTOCOL_RUNS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub ansatz: Ansatz,
    pub repetitions: usize,
    pub n_weights: usize,
    /// Mean min loss over the sampling runs.
    pub mean_min_loss: f64,
    /// Sample std of min loss over weight seeds on one fixed sample.
    pub init_err: f64,
    /// Sample std of min loss over training samples with one fixed weight seed.
    pub sampling_err: f64,
    pub mean_train_accuracy: f64,
    pub mean_holdout_accuracy: f64,
    pub init_runs: Vec<RunSummary>,
    pub sampling_runs: Vec<RunSummary>,
}

/// Sample (n − 1) standard deviation.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Five weight seeds `base_w + i` on sample `base_s`, and five samples
/// `base_s + i` with weight seed `base_w`, where the bases come from `config`.
pub fn uncertainty_protocol(config: &TrainConfig, dataset: &LabeledDataset) -> Result<UncertaintyReport> {
    let seeds = |base: u64| std::array::from_fn(|i| base + i as u64);
    uncertainty_with_seeds(config, dataset, seeds(config.weight_seed), seeds(config.sample_seed))
}

/// Runs `init_seeds` on `sample_seeds[0]` and `sample_seeds` with
/// `init_seeds[0]`. Identical `(weight, sample)` pairs are trained once.
pub fn uncertainty_with_seeds(
    config: &TrainConfig,
    dataset: &LabeledDataset,
    init_seeds: [u64; PROTOCOL_RUNS],
    sample_seeds: [u64; PROTOCOL_RUNS],
) -> Result<UncertaintyReport> {
    config.validate()?;
    let init_pairs: Vec<(u64, u64)> = init_seeds.iter().map(|&w| (w, sample_seeds[0])).collect();
    let sampling_pairs: Vec<(u64, u64)> = sample_seeds.iter().map(|&s| (init_seeds[0], s)).collect();
    let mut unique: Vec<(u64, u64)> = init_pairs.iter().chain(&sampling_pairs).copied().collect();
    unique.sort_unstable();
    unique.dedup();

    let runs: Vec<((u64, u64), RunSummary, usize)> = unique
        .par_iter()
        .map(|&(w, s)| {
            let cfg = TrainConfig { weight_seed: w, sample_seed: s, bloch_points: 0, ..config.clone() };
            let report = train(&cfg, dataset)?;
            Ok(((w, s), RunSummary::from(&report), report.n_weights))
        })
        .collect::<Result<_>>()?;
    let lookup = |pair: &(u64, u64)| runs.iter().find(|(p, _, _)| p == pair).map(|(_, r, _)| r.clone()).unwrap();
    let init_runs: Vec<RunSummary> = init_pairs.iter().map(lookup).collect();
    let sampling_runs: Vec<RunSummary> = sampling_pairs.iter().map(lookup).collect();

    let losses = |rs: &[RunSummary]| rs.iter().map(|r| r.min_loss).collect::<Vec<_>>();
    Ok(UncertaintyReport {
        ansatz: config.ansatz,
        repetitions: config.repetitions,
        n_weights: runs[0].2,
        mean_min_loss: mean(sampling_runs.iter().map(|r| r.min_loss)),
        init_err: sample_std(&losses(&init_runs)),
        sampling_err: sample_std(&losses(&sampling_runs)),
        mean_train_accuracy: mean(sampling_runs.iter().map(|r| r.train_accuracy)),
        mean_holdout_accuracy: mean(sampling_runs.iter().map(|r| r.holdout_accuracy)),
        init_runs,
        sampling_runs,
    })
}
