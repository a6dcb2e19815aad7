//! Dense statevector simulation.
//!
//! Wire `w` is bit `w` of the basis-state index (little-endian), so on two
//! qubits the amplitude at index `0b10` belongs to `|wire1 = 1, wire0 = 0⟩`.
//!
//! Rotations follow the half-angle convention `R_P(θ) = exp(-iθP/2)` and
//! `ZZ(θ) = exp(-iθ Z⊗Z / 2)`. Global phase is never observed; callers read
//! states through [`StateVector::prob_one`] and [`StateVector::bloch`].

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    #[serde(rename = "RX")]
    Rx,
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "RZ")]
    Rz,
    #[serde(rename = "ZZ")]
    Zz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Zz => 2,
            _ => 1,
        }
    }

    /// Whether the gate is `exp(-iθG/2)` for a generator `G` with eigenvalues ±1.
    pub fn is_pauli_rotation(self) -> bool {
        !matches!(self, GateKind::H)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::H => "H",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Zz => "ZZ",
        };
        f.write_str(s)
    }
}

/// Wires a gate acts on. Serialized as a plain array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub enum Wires {
    One(usize),
    Two(usize, usize),
}

impl Wires {
    pub fn len(&self) -> usize {
        match self {
            Wires::One(_) => 1,
            Wires::Two(..) => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max(&self) -> usize {
        match *self {
            Wires::One(w) => w,
            Wires::Two(a, b) => a.max(b),
        }
    }
}

impl From<Wires> for Vec<usize> {
    fn from(w: Wires) -> Self {
        match w {
            Wires::One(a) => vec![a],
            Wires::Two(a, b) => vec![a, b],
        }
    }
}

impl TryFrom<Vec<usize>> for Wires {
    type Error = String;

    fn try_from(v: Vec<usize>) -> std::result::Result<Self, String> {
        match v.as_slice() {
            [a] => Ok(Wires::One(*a)),
            [a, b] => Ok(Wires::Two(*a, *b)),
            _ => Err(format!("expected 1 or 2 wires, got {}", v.len())),
        }
    }
}

/// A concrete gate with its angle bound. `angle` is ignored for `H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub wires: Wires,
    #[serde(default)]
    pub angle: f64,
}

impl Gate {
    pub fn new(kind: GateKind, wires: Wires, angle: f64) -> Result<Self> {
        if kind.arity() != wires.len() {
            return Err(Error::Structure(format!(
                "{kind} acts on {} wire(s), got {}",
                kind.arity(),
                wires.len()
            )));
        }
        if let Wires::Two(a, b) = wires {
            if a == b {
                return Err(Error::Structure(format!("{kind} needs two distinct wires, got ({a}, {b})")));
            }
        }
        Ok(Gate { kind, wires, angle })
    }

    pub fn h(wire: usize) -> Self {
        Gate { kind: GateKind::H, wires: Wires::One(wire), angle: 0.0 }
    }

    pub fn rx(wire: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Rx, wires: Wires::One(wire), angle }
    }

    pub fn ry(wire: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Ry, wires: Wires::One(wire), angle }
    }

    pub fn rz(wire: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Rz, wires: Wires::One(wire), angle }
    }

    pub fn zz(a: usize, b: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Zz, wires: Wires::Two(a, b), angle }
    }

    /// Dense row-major unitary, 2×2 for one-wire gates and 4×4 for `ZZ`
    /// (first wire is the high bit of the local index).
    pub fn matrix(&self) -> Vec<Complex64> {
        match self.kind {
            GateKind::Zz => {
                let (even, odd) = zz_phases(self.angle);
                let mut m = vec![ZERO; 16];
                m[0] = even;
                m[5] = odd;
                m[10] = odd;
                m[15] = even;
                m
            }
            _ => single_qubit_matrix(self.kind, self.angle).iter().flatten().copied().collect(),
        }
    }
}

fn single_qubit_matrix(kind: GateKind, angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    match kind {
        GateKind::H => {
            let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[r, r], [r, -r]]
        }
        GateKind::Rx => {
            let c = Complex64::new(c, 0.0);
            let ms = Complex64::new(0.0, -s);
            [[c, ms], [ms, c]]
        }
        GateKind::Ry => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        GateKind::Rz => [
            [Complex64::new(c, -s), ZERO],
            [ZERO, Complex64::new(c, s)],
        ],
        GateKind::Zz => unreachable!("ZZ is a two-wire gate"),
    }
}

/// Phases applied to even- and odd-parity basis states by `ZZ(θ)`.
fn zz_phases(angle: f64) -> (Complex64, Complex64) {
    let (s, c) = (angle / 2.0).sin_cos();
    (Complex64::new(c, -s), Complex64::new(c, s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` wires.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes. The length must be a power of two within range
    /// and the vector must be normalized to 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Structure(format!("amplitude count {len} is not 2^n with n ≥ 1")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Structure(format!("state is not normalized (Σ|a|² = {norm})")));
        }
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        if gate.kind.arity() != gate.wires.len() {
            return Err(Error::Structure(format!("{} gate with {} wire(s)", gate.kind, gate.wires.len())));
        }
        if gate.wires.max() >= self.n_qubits {
            return Err(Error::Structure(format!(
                "wire {} out of range for {} qubit(s)",
                gate.wires.max(),
                self.n_qubits
            )));
        }
        match (gate.kind, gate.wires) {
            (GateKind::Zz, Wires::Two(a, b)) => {
                if a == b {
                    return Err(Error::Structure(format!("ZZ on repeated wire {a}")));
                }
                let (even, odd) = zz_phases(gate.angle);
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    *amp *= if (i & mask).count_ones().is_multiple_of(2) { even } else { odd };
                }
            }
            (GateKind::Rz, Wires::One(w)) => {
                let (s, c) = (gate.angle / 2.0).sin_cos();
                let (p0, p1) = (Complex64::new(c, -s), Complex64::new(c, s));
                let bit = 1usize << w;
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    *amp *= if i & bit == 0 { p0 } else { p1 };
                }
            }
            (kind, Wires::One(w)) => {
                let m = single_qubit_matrix(kind, gate.angle);
                let bit = 1usize << w;
                for block in self.amplitudes.chunks_exact_mut(2 * bit) {
                    let (lo, hi) = block.split_at_mut(bit);
                    for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (x, y) = (*a0, *a1);
                        *a0 = m[0][0] * x + m[0][1] * y;
                        *a1 = m[1][0] * x + m[1][1] * y;
                    }
                }
            }
            _ => unreachable!("arity checked above"),
        }
        Ok(())
    }

    /// Probability of reading `1` on `wire`.
    pub fn prob_one(&self, wire: usize) -> Result<f64> {
        self.check_wire(wire)?;
        let bit = 1usize << wire;
        let p: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(p.clamp(0.0, 1.0))
    }

    pub fn prob_zero(&self, wire: usize) -> Result<f64> {
        Ok(1.0 - self.prob_one(wire)?)
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a single-qubit state.
    pub fn bloch(&self) -> Result<BlochVector> {
        if self.n_qubits != 1 {
            return Err(Error::Structure(format!(
                "Bloch coordinates need a single qubit, state has {}",
                self.n_qubits
            )));
        }
        let (a, b) = (self.amplitudes[0], self.amplitudes[1]);
        let cross = a.conj() * b;
        Ok(BlochVector {
            x: 2.0 * cross.re,
            y: 2.0 * cross.im,
            z: a.norm_sqr() - b.norm_sqr(),
        })
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.n_qubits {
            return Err(Error::Structure(format!("wire {wire} out of range for {} qubit(s)", self.n_qubits)));
        }
        Ok(())
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::Config(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// Returns `gate · state` as a new state.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut next = state.clone();
    next.apply(gate)?;
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_pcg::Pcg64;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_state() -> StateVector {
        StateVector::from_amplitudes(vec![ZERO, ONE]).unwrap()
    }

    fn random_state(rng: &mut Pcg64, n: usize) -> StateVector {
        let mut amps: Vec<Complex64> = (0..1 << n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn random_gate(rng: &mut Pcg64, n: usize) -> Gate {
        let w = rng.random_range(0..n);
        let angle = rng.random_range(-4.0 * PI..4.0 * PI);
        match rng.random_range(0..5) {
            0 => Gate::h(w),
            1 => Gate::rx(w, angle),
            2 => Gate::ry(w, angle),
            3 => Gate::rz(w, angle),
            _ => {
                let v = (w + rng.random_range(1..n)) % n;
                Gate::zz(w, v, angle)
            }
        }
    }

    #[test]
    fn init_zero_basis() {
        assert_eq!(StateVector::zero(1).unwrap().amplitudes(), &[ONE, ZERO]);
        assert_eq!(StateVector::zero(2).unwrap().amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        assert!(matches!(StateVector::zero(13), Err(Error::Config(_))));
        assert!(matches!(StateVector::zero(0), Err(Error::Config(_))));
        assert_eq!(StateVector::zero(12).unwrap().amplitudes().len(), 4096);
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(&StateVector::zero(1).unwrap(), &Gate::h(0)).unwrap();
        assert!((s.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rz_zero_is_identity() {
        let mut rng = Pcg64::seed_from_u64(3);
        let s = random_state(&mut rng, 3);
        for w in 0..3 {
            assert_eq!(apply_gate(&s, &Gate::rz(w, 0.0)).unwrap(), s);
        }
    }

    #[test]
    fn ry_quarter_turn() {
        let s = apply_gate(&StateVector::zero(1).unwrap(), &Gate::ry(0, FRAC_PI_2)).unwrap();
        assert!((s.amplitudes()[0].re - FRAC_PI_4.cos()).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - FRAC_PI_4.sin()).abs() < 1e-15);
    }

    #[test]
    fn rz_phase_convention() {
        let theta = 0.7;
        let plus = apply_gate(&StateVector::zero(1).unwrap(), &Gate::h(0)).unwrap();
        let s = apply_gate(&plus, &Gate::rz(0, theta)).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(r, 0.0) * Complex64::from_polar(1.0, -theta / 2.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(r, 0.0) * Complex64::from_polar(1.0, theta / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn wire_out_of_range() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply(&Gate::rx(2, 0.1)), Err(Error::Structure(_))));
        assert!(matches!(s.apply(&Gate::zz(0, 0, 0.1)), Err(Error::Structure(_))));
        assert!(matches!(s.apply(&Gate::zz(0, 5, 0.1)), Err(Error::Structure(_))));
        assert!(s.prob_one(2).is_err());
        assert!(Gate::new(GateKind::Rx, Wires::Two(0, 1), 0.0).is_err());
        assert!(Gate::new(GateKind::Zz, Wires::One(0), 0.0).is_err());
    }

    #[test]
    fn prob_one_cases() {
        assert_eq!(one_state().prob_one(0).unwrap(), 1.0);
        let plus = apply_gate(&StateVector::zero(1).unwrap(), &Gate::h(0)).unwrap();
        assert!((plus.prob_one(0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(StateVector::zero(2).unwrap().prob_one(1).unwrap(), 0.0);
    }

    #[test]
    fn prob_one_reads_the_requested_wire() {
        // X on wire 1 via RX(π): |00⟩ → -i|10⟩, index 0b10.
        let s = apply_gate(&StateVector::zero(2).unwrap(), &Gate::rx(1, PI)).unwrap();
        assert!((s.prob_one(1).unwrap() - 1.0).abs() < 1e-15);
        assert!(s.prob_one(0).unwrap() < 1e-15);
        assert!((s.amplitudes()[2].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bloch_cardinal_points() {
        let b = StateVector::zero(1).unwrap().bloch().unwrap();
        assert_eq!((b.x, b.y, b.z), (0.0, 0.0, 1.0));
        let b = apply_gate(&StateVector::zero(1).unwrap(), &Gate::h(0)).unwrap().bloch().unwrap();
        assert!((b.x - 1.0).abs() < 1e-15 && b.y.abs() < 1e-15 && b.z.abs() < 1e-15);
        let b = one_state().bloch().unwrap();
        assert_eq!((b.x, b.y, b.z), (0.0, 0.0, -1.0));
        assert!(matches!(StateVector::zero(2).unwrap().bloch(), Err(Error::Structure(_))));
    }

    #[test]
    fn gate_matrices_are_unitary() {
        let mut rng = Pcg64::seed_from_u64(11);
        for _ in 0..200 {
            let g = random_gate(&mut rng, 2);
            let m = g.matrix();
            let d = if g.kind == GateKind::Zz { 4 } else { 2 };
            for r in 0..d {
                for col in 0..d {
                    let dot: Complex64 = (0..d).map(|k| m[k * d + r].conj() * m[k * d + col]).sum();
                    let expect = if r == col { 1.0 } else { 0.0 };
                    assert!((dot - c(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unitarity_over_random_gates() {
        let mut rng = Pcg64::seed_from_u64(2024);
        let mut worst = 0.0f64;
        for trial in 0..10_000 {
            let n = 1 + trial % 4;
            let mut s = random_state(&mut rng, n);
            let g = if n == 1 {
                loop {
                    let g = random_gate(&mut rng, 2);
                    if g.kind != GateKind::Zz {
                        break Gate { wires: Wires::One(0), ..g };
                    }
                }
            } else {
                random_gate(&mut rng, n)
            };
            s.apply(&g).unwrap();
            worst = worst.max((s.norm_sqr() - 1.0).abs());
        }
        assert!(worst < 1e-10, "norm drift {worst}");
    }

    #[test]
    fn zz_is_phase_only() {
        let mut rng = Pcg64::seed_from_u64(5);
        for _ in 0..50 {
            let s = random_state(&mut rng, 3);
            let t = apply_gate(&s, &Gate::zz(0, 2, rng.random_range(-PI..PI))).unwrap();
            for (a, b) in s.amplitudes().iter().zip(t.amplitudes()) {
                assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn rz_composition(a in -10.0f64..10.0, b in -10.0f64..10.0, seed in 0u64..1000) {
            let mut rng = Pcg64::seed_from_u64(seed);
            let s = random_state(&mut rng, 1);
            let two = apply_gate(&apply_gate(&s, &Gate::rz(0, a)).unwrap(), &Gate::rz(0, b)).unwrap();
            let one = apply_gate(&s, &Gate::rz(0, a + b)).unwrap();
            prop_assert!((two.prob_one(0).unwrap() - one.prob_one(0).unwrap()).abs() < 1e-12);
            let (p, q) = (two.bloch().unwrap(), one.bloch().unwrap());
            prop_assert!((p.x - q.x).abs() < 1e-12 && (p.y - q.y).abs() < 1e-12 && (p.z - q.z).abs() < 1e-12);
        }

        #[test]
        fn complementary_probabilities(seed in 0u64..10_000, n in 1usize..5) {
            let mut rng = Pcg64::seed_from_u64(seed);
            let s = random_state(&mut rng, n);
            for w in 0..n {
                prop_assert_eq!(s.prob_one(w).unwrap() + s.prob_zero(w).unwrap(), 1.0);
            }
        }

        #[test]
        fn pure_state_on_unit_sphere(seed in 0u64..10_000) {
            let mut rng = Pcg64::seed_from_u64(seed);
            let b = random_state(&mut rng, 1).bloch().unwrap();
            prop_assert!((b.norm() - 1.0).abs() < 1e-10);
        }
    }
}
