//! Parameter-shift gradients.
//!
//! Every trainable slot is `exp(-iθG/2)` with `G² = I` (RX, RY, RZ, ZZ), so
//! `∂p1/∂θ = [p1(θ + π/2) − p1(θ − π/2)] / 2` holds exactly.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{evaluate, ParamCircuit, Slot};
use crate::error::{Error, Result};
use crate::statevector::{Gate, StateVector};
use crate::training::cross_entropy;

/// `∂p1/∂w_k` for every weight, in weight-index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientVector(pub Vec<f64>);

impl GradientVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_shiftable(circuit: &ParamCircuit) -> Result<()> {
    for k in 0..circuit.n_weights() {
        match circuit.weight_kind(k) {
            Some(kind) if kind.is_pauli_rotation() => {}
            Some(kind) => {
                return Err(Error::Structure(format!(
                    "weight {k} drives a {kind} gate, which has no parameter-shift rule"
                )))
            }
            None => return Err(Error::Structure(format!("weight {k} has no slot"))),
        }
    }
    Ok(())
}

/// Runs the two shifted circuits per weight. The state before each weight
/// slot is cached, so a shifted run replays only the gates after its slot.
fn shift_gradient(circuit: &ParamCircuit, weights: &[f64], features: &[f64], readout_wire: usize) -> Result<Vec<f64>> {
    let gates = circuit.bind(weights, features)?;
    let mut prefix = Vec::with_capacity(gates.len());
    let mut state = StateVector::zero(circuit.n_qubits())?;
    for gate in &gates {
        prefix.push(state.clone());
        state.apply(gate)?;
    }

    let mut grad = vec![0.0; weights.len()];
    for (pos, slot) in circuit.ops().iter().enumerate() {
        let Slot::Weight { index, .. } = *slot else { continue };
        let run = |shift: f64| -> Result<f64> {
            let mut s = prefix[pos].clone();
            s.apply(&Gate { angle: gates[pos].angle + shift, ..gates[pos] })?;
            for g in &gates[pos + 1..] {
                s.apply(g)?;
            }
            s.prob_one(readout_wire)
        };
        grad[index] = (run(FRAC_PI_2)? - run(-FRAC_PI_2)?) / 2.0;
    }
    Ok(grad)
}

pub fn grad_p1(circuit: &ParamCircuit, weights: &[f64], features: &[f64], readout_wire: usize) -> Result<GradientVector> {
    check_shiftable(circuit)?;
    // surface length and wire errors before shifting
    evaluate(circuit, weights, features, readout_wire)?;
    shift_gradient(circuit, weights, features, readout_wire).map(GradientVector)
}

/// Derivative of the clamped cross-entropy with respect to `p1`. Zero outside
/// the open interval `(ε, 1 − ε)` where the clamp is active.
pub fn cross_entropy_slope(p1: f64, label: u8, clamp_epsilon: f64) -> f64 {
    if p1 <= clamp_epsilon || p1 >= 1.0 - clamp_epsilon {
        return 0.0;
    }
    if label == 1 {
        -1.0 / p1
    } else {
        1.0 / (1.0 - p1)
    }
}

/// Per-sample loss and its weight gradient.
fn sample_loss_grad(
    circuit: &ParamCircuit,
    weights: &[f64],
    features: &[f64],
    label: u8,
    readout_wire: usize,
    clamp_epsilon: f64,
) -> Result<(f64, Vec<f64>)> {
    let p1 = evaluate(circuit, weights, features, readout_wire)?.p1;
    let loss = cross_entropy(p1, label, clamp_epsilon);
    let slope = cross_entropy_slope(p1, label, clamp_epsilon);
    if slope == 0.0 {
        return Ok((loss, vec![0.0; weights.len()]));
    }
    let mut g = shift_gradient(circuit, weights, features, readout_wire)?;
    g.iter_mut().for_each(|v| *v *= slope);
    Ok((loss, g))
}

/// Mean clamped cross-entropy over the batch and its gradient. Samples are
/// evaluated in parallel; the reduction runs in batch order so the result is
/// bit-reproducible.
pub fn loss_and_grad<F: AsRef<[f64]> + Sync>(
    circuit: &ParamCircuit,
    weights: &[f64],
    rows: &[F],
    labels: &[u8],
    readout_wire: usize,
    clamp_epsilon: f64,
) -> Result<(f64, GradientVector)> {
    if rows.is_empty() {
        return Err(Error::Usage("gradient of an empty batch".into()));
    }
    if rows.len() != labels.len() {
        return Err(Error::Structure(format!("{} rows but {} labels", rows.len(), labels.len())));
    }
    check_shiftable(circuit)?;
    evaluate(circuit, weights, rows[0].as_ref(), readout_wire)?;

    let per_sample: Vec<(f64, Vec<f64>)> = rows
        .par_iter()
        .zip(labels.par_iter())
        .map(|(x, &y)| sample_loss_grad(circuit, weights, x.as_ref(), y, readout_wire, clamp_epsilon))
        .collect::<Result<_>>()?;

    let n = per_sample.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    for (l, g) in &per_sample {
        loss += l;
        grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
    }
    grad.iter_mut().for_each(|v| *v /= n);
    Ok((loss / n, GradientVector(grad)))
}

pub fn grad_loss<F: AsRef<[f64]> + Sync>(
    circuit: &ParamCircuit,
    weights: &[f64],
    rows: &[F],
    labels: &[u8],
    readout_wire: usize,
    clamp_epsilon: f64,
) -> Result<GradientVector> {
    loss_and_grad(circuit, weights, rows, labels, readout_wire, clamp_epsilon).map(|(_, g)| g)
}
