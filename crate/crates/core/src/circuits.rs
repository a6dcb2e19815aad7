//! Parametrized circuits and the two ansatz builders.
//!
//! A [`ParamCircuit`] is an ordered list of slots. Fixed slots carry a bound
//! gate; weight slots read `weights[index]`; feature slots read
//! `scale * features[index]`. Binding both arrays yields a concrete gate
//! sequence run from `|0…0⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Gate, GateKind, StateVector, Wires};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "slot", rename_all = "snake_case")]
pub enum Slot {
    Fixed(Gate),
    Weight {
        kind: GateKind,
        wires: Wires,
        index: usize,
    },
    Feature {
        kind: GateKind,
        wires: Wires,
        index: usize,
        scale: f64,
    },
}

impl Slot {
    fn kind_and_wires(&self) -> (GateKind, Wires) {
        match self {
            Slot::Fixed(g) => (g.kind, g.wires),
            Slot::Weight { kind, wires, .. } | Slot::Feature { kind, wires, .. } => (*kind, *wires),
        }
    }

    fn bind(&self, weights: &[f64], features: &[f64]) -> Gate {
        match *self {
            Slot::Fixed(g) => g,
            Slot::Weight { kind, wires, index } => Gate { kind, wires, angle: weights[index] },
            Slot::Feature { kind, wires, index, scale } => Gate {
                kind,
                wires,
                angle: scale * features[index],
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamCircuit {
    n_qubits: usize,
    n_weights: usize,
    n_features: usize,
    ops: Vec<Slot>,
}

impl ParamCircuit {
    /// Validates wire ranges, gate arities, and slot indexing: every weight
    /// index is used exactly once and every feature index at least once.
    pub fn new(n_qubits: usize, n_weights: usize, n_features: usize, ops: Vec<Slot>) -> Result<Self> {
        StateVector::zero(n_qubits)?;
        let mut weight_uses = vec![0usize; n_weights];
        let mut feature_uses = vec![0usize; n_features];
        for (pos, slot) in ops.iter().enumerate() {
            let (kind, wires) = slot.kind_and_wires();
            Gate::new(kind, wires, 0.0)
                .map_err(|e| Error::Structure(format!("op {pos}: {e}")))?;
            if wires.max() >= n_qubits {
                return Err(Error::Structure(format!(
                    "op {pos}: wire {} out of range for {n_qubits} qubit(s)",
                    wires.max()
                )));
            }
            match *slot {
                Slot::Weight { index, .. } => {
                    *weight_uses
                        .get_mut(index)
                        .ok_or_else(|| Error::Structure(format!("op {pos}: weight index {index} ≥ {n_weights}")))? += 1;
                }
                Slot::Feature { index, scale, .. } => {
                    if !scale.is_finite() {
                        return Err(Error::Structure(format!("op {pos}: non-finite feature scale")));
                    }
                    *feature_uses
                        .get_mut(index)
                        .ok_or_else(|| Error::Structure(format!("op {pos}: feature index {index} ≥ {n_features}")))? += 1;
                }
                Slot::Fixed(_) => {}
            }
        }
        if let Some(k) = weight_uses.iter().position(|&n| n != 1) {
            return Err(Error::Structure(format!(
                "weight {k} used {} times, expected exactly once",
                weight_uses[k]
            )));
        }
        if let Some(k) = feature_uses.iter().position(|&n| n == 0) {
            return Err(Error::Structure(format!("feature {k} is never encoded")));
        }
        Ok(ParamCircuit { n_qubits, n_weights, n_features, ops })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_weights(&self) -> usize {
        self.n_weights
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn ops(&self) -> &[Slot] {
        &self.ops
    }

    /// Gate kind sitting in weight slot `index`.
    pub fn weight_kind(&self, index: usize) -> Option<GateKind> {
        self.ops.iter().find_map(|s| match *s {
            Slot::Weight { kind, index: i, .. } if i == index => Some(kind),
            _ => None,
        })
    }

    /// Number of encoding gates per feature. For the QAUM ansatz this is the
    /// repetition count `L` for every feature.
    pub fn encodings_per_feature(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_features];
        for slot in &self.ops {
            if let Slot::Feature { index, .. } = *slot {
                counts[index] += 1;
            }
        }
        counts
    }

    fn check_lengths(&self, weights: &[f64], features: &[f64]) -> Result<()> {
        if weights.len() != self.n_weights {
            return Err(Error::Structure(format!(
                "expected {} weights, got {}",
                self.n_weights,
                weights.len()
            )));
        }
        if features.len() != self.n_features {
            return Err(Error::Structure(format!(
                "expected {} features, got {}",
                self.n_features,
                features.len()
            )));
        }
        Ok(())
    }

    /// Concrete gate sequence for one parameter binding.
    pub fn bind(&self, weights: &[f64], features: &[f64]) -> Result<Vec<Gate>> {
        self.check_lengths(weights, features)?;
        Ok(self.ops.iter().map(|s| s.bind(weights, features)).collect())
    }

    /// Final pre-measurement state.
    pub fn state(&self, weights: &[f64], features: &[f64]) -> Result<StateVector> {
        self.check_lengths(weights, features)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        for slot in &self.ops {
            state.apply(&slot.bind(weights, features))?;
        }
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ParamCircuit =
            serde_json::from_str(text).map_err(|e| Error::Structure(format!("circuit JSON: {e}")))?;
        ParamCircuit::new(raw.n_qubits, raw.n_weights, raw.n_features, raw.ops)
    }
}

/// Probability of measuring `|1⟩` on the readout wire.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub p1: f64,
}

pub fn evaluate(circuit: &ParamCircuit, weights: &[f64], features: &[f64], readout_wire: usize) -> Result<ModelOutput> {
    let p1 = circuit.state(weights, features)?.prob_one(readout_wire)?;
    Ok(ModelOutput { p1 })
}

fn push_trainable_layer(ops: &mut Vec<Slot>, next_weight: &mut usize) {
    for kind in [GateKind::Rz, GateKind::Rx, GateKind::Ry] {
        ops.push(Slot::Weight { kind, wires: Wires::One(0), index: *next_weight });
        *next_weight += 1;
    }
}

/// Single-qubit re-uploading classifier: `H`, then for every repetition and
/// feature a trainable `RZ·RX·RY` layer followed by `RZ(x_i)`, closed by one
/// last trainable layer. Consecutive repetitions share the layer between
/// them, giving `3·(n_features·repetitions + 1)` weights.
pub fn build_qaum(n_features: usize, repetitions: usize) -> Result<ParamCircuit> {
    if n_features == 0 || repetitions == 0 {
        return Err(Error::Config(format!(
            "QAUM needs n_features ≥ 1 and repetitions ≥ 1 (got {n_features}, {repetitions})"
        )));
    }
    let mut ops = vec![Slot::Fixed(Gate::h(0))];
    let mut next = 0;
    push_trainable_layer(&mut ops, &mut next);
    for _ in 0..repetitions {
        for i in 0..n_features {
            ops.push(Slot::Feature { kind: GateKind::Rz, wires: Wires::One(0), index: i, scale: 1.0 });
            push_trainable_layer(&mut ops, &mut next);
        }
    }
    ParamCircuit::new(1, next, n_features, ops)
}

fn push_feature_layer(ops: &mut Vec<Slot>, n_features: usize) {
    for i in 0..n_features {
        ops.push(Slot::Feature { kind: GateKind::Rx, wires: Wires::One(i), index: i, scale: 1.0 });
    }
}

/// Layered multi-qubit embedding. Each repetition encodes `RX(x_i)` on wire
/// `i`, applies trainable `ZZ` entanglers around the ring
/// `(w, w+1 mod n_wires)`, then trainable `RY` local fields on every wire.
/// The feature layer is applied once more after the last repetition.
/// Weights are laid out per repetition as `[zz_0..zz_{n-1}, ry_0..ry_{n-1}]`.
pub fn build_qaoa_embedding(n_wires: usize, n_features: usize, repetitions: usize) -> Result<ParamCircuit> {
    if n_wires < 2 {
        return Err(Error::Config(format!("QAOA embedding needs at least 2 wires, got {n_wires}")));
    }
    if n_features == 0 || n_features > n_wires {
        return Err(Error::Config(format!(
            "QAOA embedding encodes one feature per wire: {n_features} features on {n_wires} wires"
        )));
    }
    if repetitions == 0 {
        return Err(Error::Config("QAOA embedding needs repetitions ≥ 1".into()));
    }
    let mut ops = Vec::new();
    let mut next = 0;
    for _ in 0..repetitions {
        push_feature_layer(&mut ops, n_features);
        for w in 0..n_wires {
            ops.push(Slot::Weight {
                kind: GateKind::Zz,
                wires: Wires::Two(w, (w + 1) % n_wires),
                index: next,
            });
            next += 1;
        }
        for w in 0..n_wires {
            ops.push(Slot::Weight { kind: GateKind::Ry, wires: Wires::One(w), index: next });
            next += 1;
        }
    }
    push_feature_layer(&mut ops, n_features);
    ParamCircuit::new(n_wires, next, n_features, ops)
}

/// Relabels feature slots: a slot reading feature `i` reads
/// `permutation[i]` afterwards.
pub fn permute_features(circuit: &ParamCircuit, permutation: &[usize]) -> Result<ParamCircuit> {
    let n = circuit.n_features;
    if permutation.len() != n {
        return Err(Error::Structure(format!(
            "permutation has {} entries, circuit has {n} features",
            permutation.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in permutation {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Structure(format!("{permutation:?} is not a permutation of 0..{n}")));
        }
    }
    let ops = circuit
        .ops
        .iter()
        .map(|slot| match *slot {
            Slot::Feature { kind, wires, index, scale } => Slot::Feature {
                kind,
                wires,
                index: permutation[index],
                scale,
            },
            ref other => other.clone(),
        })
        .collect();
    Ok(ParamCircuit { ops, ..circuit.clone() })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_pcg::Pcg64;

    use super::*;

    type M2 = [[Complex64; 2]; 2];

    // Independent 2×2 oracle: explicit matrices written out from the rotation
    // definitions, multiplied in order onto |0⟩.
    fn oracle_matrix(kind: GateKind, t: f64) -> M2 {
        let i = Complex64::i();
        let c = Complex64::from((t / 2.0).cos());
        let s = Complex64::from((t / 2.0).sin());
        match kind {
            GateKind::H => {
                let r = Complex64::from(1.0 / 2f64.sqrt());
                [[r, r], [r, -r]]
            }
            GateKind::Rx => [[c, -i * s], [-i * s, c]],
            GateKind::Ry => [[c, -s], [s, c]],
            GateKind::Rz => [[(-i * t / 2.0).exp(), 0.0.into()], [0.0.into(), (i * t / 2.0).exp()]],
            GateKind::Zz => panic!("single qubit oracle"),
        }
    }

    fn oracle_p1(circuit: &ParamCircuit, w: &[f64], x: &[f64]) -> f64 {
        let mut psi = [Complex64::from(1.0), Complex64::from(0.0)];
        for slot in circuit.ops() {
            let (kind, angle) = match *slot {
                Slot::Fixed(g) => (g.kind, g.angle),
                Slot::Weight { kind, index, .. } => (kind, w[index]),
                Slot::Feature { kind, index, scale, .. } => (kind, scale * x[index]),
            };
            let m = oracle_matrix(kind, angle);
            psi = [m[0][0] * psi[0] + m[0][1] * psi[1], m[1][0] * psi[0] + m[1][1] * psi[1]];
        }
        psi[1].norm_sqr()
    }

    fn random_vec(rng: &mut Pcg64, n: usize, hi: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(0.0..hi)).collect()
    }

    #[test]
    fn qaum_weight_counts() {
        assert_eq!(build_qaum(8, 1).unwrap().n_weights(), 27);
        assert_eq!(build_qaum(8, 2).unwrap().n_weights(), 51);
        assert_eq!(build_qaum(8, 3).unwrap().n_weights(), 75);
        assert!(matches!(build_qaum(0, 1), Err(Error::Config(_))));
        assert!(matches!(build_qaum(8, 0), Err(Error::Config(_))));
    }

    #[test]
    fn qaum_layer_order() {
        let c = build_qaum(2, 1).unwrap();
        let kinds: Vec<String> = c
            .ops()
            .iter()
            .map(|s| match s {
                Slot::Fixed(g) => g.kind.to_string(),
                Slot::Weight { kind, .. } => format!("w{kind}"),
                Slot::Feature { kind, index, .. } => format!("x{index}{kind}"),
            })
            .collect();
        assert_eq!(
            kinds,
            ["H", "wRZ", "wRX", "wRY", "x0RZ", "wRZ", "wRX", "wRY", "x1RZ", "wRZ", "wRX", "wRY"]
        );
        assert_eq!(c.encodings_per_feature(), vec![1, 1]);
        assert_eq!(build_qaum(3, 4).unwrap().encodings_per_feature(), vec![4, 4, 4]);
    }

    #[test]
    fn qaoa_weight_counts() {
        assert_eq!(build_qaoa_embedding(9, 8, 1).unwrap().n_weights(), 18);
        assert_eq!(build_qaoa_embedding(9, 8, 2).unwrap().n_weights(), 36);
        assert_eq!(build_qaoa_embedding(9, 8, 3).unwrap().n_weights(), 54);
        assert!(matches!(build_qaoa_embedding(4, 8, 1), Err(Error::Config(_))));
        assert!(matches!(build_qaoa_embedding(1, 1, 1), Err(Error::Config(_))));
    }

    #[test]
    fn qaoa_structure() {
        let c = build_qaoa_embedding(9, 8, 1).unwrap();
        // 8 RX + 9 ZZ + 9 RY + 8 RX
        assert_eq!(c.ops().len(), 34);
        assert_eq!(c.n_qubits(), 9);
        assert_eq!(c.encodings_per_feature(), vec![2; 8]);
        assert_eq!(c.weight_kind(8), Some(GateKind::Zz));
        assert_eq!(c.weight_kind(9), Some(GateKind::Ry));
        assert!(c.ops().iter().any(|s| matches!(s, Slot::Weight { wires: Wires::Two(8, 0), .. })));
        // wire 8 never carries a feature
        assert!(!c.ops().iter().any(|s| matches!(s, Slot::Feature { wires: Wires::One(8), .. })));
    }

    #[test]
    fn weight_and_feature_slot_invariants() {
        let rz = |index| Slot::Weight { kind: GateKind::Rz, wires: Wires::One(0), index };
        let enc = |index| Slot::Feature { kind: GateKind::Rz, wires: Wires::One(0), index, scale: 1.0 };
        assert!(ParamCircuit::new(1, 2, 1, vec![rz(0), enc(0), rz(1)]).is_ok());
        assert!(ParamCircuit::new(1, 2, 1, vec![rz(0), enc(0), rz(0)]).is_err());
        assert!(ParamCircuit::new(1, 2, 2, vec![rz(0), enc(0), rz(1)]).is_err());
        assert!(ParamCircuit::new(1, 1, 1, vec![rz(0), enc(0), enc(3)]).is_err());
        let two_wire = Slot::Weight { kind: GateKind::Zz, wires: Wires::Two(0, 1), index: 0 };
        assert!(ParamCircuit::new(1, 1, 0, vec![two_wire]).is_err());
    }

    #[test]
    fn all_zero_parameters_leave_plus_state() {
        let c = build_qaum(8, 1).unwrap();
        let p = evaluate(&c, &[0.0; 27], &[0.0; 8], 0).unwrap().p1;
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_ry_pi_flips() {
        let c = ParamCircuit::new(1, 1, 0, vec![Slot::Weight { kind: GateKind::Ry, wires: Wires::One(0), index: 0 }])
            .unwrap();
        assert!((evaluate(&c, &[PI], &[], 0).unwrap().p1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_structural() {
        let c = build_qaum(8, 1).unwrap();
        assert!(matches!(evaluate(&c, &[0.0; 26], &[0.0; 8], 0), Err(Error::Structure(_))));
        assert!(matches!(evaluate(&c, &[0.0; 27], &[0.0; 7], 0), Err(Error::Structure(_))));
        assert!(matches!(evaluate(&c, &[0.0; 27], &[0.0; 8], 1), Err(Error::Structure(_))));
    }

    #[test]
    fn qaum_matches_matrix_chain_oracle() {
        let c = build_qaum(8, 2).unwrap();
        let mut rng = Pcg64::seed_from_u64(17);
        for _ in 0..50 {
            let w = random_vec(&mut rng, 51, 2.0 * PI);
            let x = random_vec(&mut rng, 8, PI);
            let p = evaluate(&c, &w, &x, 0).unwrap().p1;
            assert!((p - oracle_p1(&c, &w, &x)).abs() < 1e-10);
        }
    }

    #[test]
    fn permutation_identity_and_involution() {
        let c = build_qaum(4, 2).unwrap();
        assert_eq!(permute_features(&c, &[0, 1, 2, 3]).unwrap(), c);
        let swap = [1, 0, 2, 3];
        let twice = permute_features(&permute_features(&c, &swap).unwrap(), &swap).unwrap();
        assert_eq!(twice, c);
        assert_ne!(permute_features(&c, &swap).unwrap(), c);
        assert!(permute_features(&c, &[0, 0, 1, 2]).is_err());
        assert!(permute_features(&c, &[0, 1, 2]).is_err());
        assert!(permute_features(&c, &[0, 1, 2, 4]).is_err());
    }

    #[test]
    fn reversal_permutation_matches_reversed_features() {
        let c = build_qaum(3, 1).unwrap();
        let p = permute_features(&c, &[2, 1, 0]).unwrap();
        let mut rng = Pcg64::seed_from_u64(99);
        for _ in 0..100 {
            let w = random_vec(&mut rng, c.n_weights(), 2.0 * PI);
            let x = random_vec(&mut rng, 3, PI);
            let rev: Vec<f64> = x.iter().rev().copied().collect();
            let a = evaluate(&c, &w, &x, 0).unwrap().p1;
            let b = evaluate(&p, &w, &rev, 0).unwrap().p1;
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn circuit_json_round_trip() {
        let c = build_qaoa_embedding(3, 2, 1).unwrap();
        let text = c.to_json();
        assert!(text.contains("\"slot\": \"weight\""));
        assert!(text.contains("\"ZZ\""));
        assert_eq!(ParamCircuit::from_json(&text).unwrap(), c);
    }

    proptest! {
        #[test]
        fn weight_count_formulas(n in 1usize..=10, l in 1usize..=4) {
            prop_assert_eq!(build_qaum(n, l).unwrap().n_weights(), 3 * (n * l + 1));
            let wires = n.max(2);
            prop_assert_eq!(build_qaoa_embedding(wires, n, l).unwrap().n_weights(), 2 * wires * l);
        }

        #[test]
        fn rebinding_is_bit_identical(seed in 0u64..500) {
            let c = build_qaum(8, 2).unwrap();
            let mut rng = Pcg64::seed_from_u64(seed);
            let w = random_vec(&mut rng, 51, 2.0 * PI);
            let x = random_vec(&mut rng, 8, PI);
            let a = evaluate(&c, &w, &x, 0).unwrap().p1;
            let b = evaluate(&c, &w, &x, 0).unwrap().p1;
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn rz_weight_has_period_four_pi(seed in 0u64..500, layer in 0usize..17) {
            let c = build_qaum(8, 2).unwrap();
            let mut rng = Pcg64::seed_from_u64(seed);
            let mut w = random_vec(&mut rng, 51, 2.0 * PI);
            let x = random_vec(&mut rng, 8, PI);
            let k = 3 * layer;
            prop_assert_eq!(c.weight_kind(k), Some(GateKind::Rz));
            let a = evaluate(&c, &w, &x, 0).unwrap().p1;
            w[k] += 4.0 * PI;
            let b = evaluate(&c, &w, &x, 0).unwrap().p1;
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
