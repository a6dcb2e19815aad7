//! Empirical Fourier spectra of circuit outputs.
//!
//! With half-angle `RZ(x)` encodings, each encoding gate contributes a
//! frequency difference in `{-1, 0, 1}` to `p1`, so a feature encoded `L`
//! times yields integer frequencies `|γ| ≤ L` with period `2π`. Sampling
//! `2P + 1` equispaced points per feature recovers every coefficient of a
//! trigonometric polynomial of degree `≤ P` exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{evaluate, ParamCircuit};
use crate::error::{Error, Result};

/// Largest number of grid evaluations `extract_spectrum` will attempt.
pub const GRID_LIMIT: usize = 1 << 20;
pub const LEAKAGE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    pub n_features: usize,
    /// Largest per-feature encoding count of the source circuit.
    pub max_degree: usize,
    /// Frequencies are stored for `γ ∈ {−probe..probe}^N`.
    pub probe: usize,
    pub coefficients: BTreeMap<Vec<i32>, Complex64>,
}

impl FourierSpectrum {
    pub fn get(&self, gamma: &[i32]) -> Complex64 {
        self.coefficients.get(gamma).copied().unwrap_or_default()
    }

    /// Max `|c(−γ) − conj c(γ)|`; zero for a real-valued output.
    pub fn hermitian_defect(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|(g, c)| {
                let neg: Vec<i32> = g.iter().map(|v| -v).collect();
                (self.get(&neg) - c.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_γ c(γ) e^{iγ·x}` (real part).
    pub fn synthesize(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|(g, c)| {
                let phase: f64 = g.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                (c * Complex64::from_polar(1.0, phase)).re
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        let doc = SpectrumJson {
            n_features: self.n_features,
            max_degree: self.max_degree,
            probe: self.probe,
            coefficients: self
                .coefficients
                .iter()
                .map(|(g, c)| CoefficientJson { gamma: g.clone(), re: c.re, im: c.im })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("spectrum serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpectrumJson =
            serde_json::from_str(text).map_err(|e| Error::Structure(format!("spectrum JSON: {e}")))?;
        Ok(FourierSpectrum {
            n_features: doc.n_features,
            max_degree: doc.max_degree,
            probe: doc.probe,
            coefficients: doc
                .coefficients
                .into_iter()
                .map(|c| (c.gamma, Complex64::new(c.re, c.im)))
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    n_features: usize,
    max_degree: usize,
    probe: usize,
    coefficients: Vec<CoefficientJson>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientJson {
    gamma: Vec<i32>,
    re: f64,
    im: f64,
}

fn grid_points(probe: usize) -> Vec<f64> {
    let k = 2 * probe + 1;
    (0..k).map(|j| 2.0 * PI * j as f64 / k as f64).collect()
}

/// Signed frequency of DFT bin `j` for a length `2P + 1` transform.
fn bin_frequency(j: usize, probe: usize) -> i32 {
    if j <= probe {
        j as i32
    } else {
        j as i32 - (2 * probe + 1) as i32
    }
}

/// Multi-dimensional DFT of samples laid out row-major with the last feature
/// varying fastest, normalized so coefficients are those of `Σ c(γ) e^{iγ·x}`.
fn dft(samples: Vec<f64>, n_dims: usize, probe: usize) -> BTreeMap<Vec<i32>, Complex64> {
    let k = 2 * probe + 1;
    let mut data: Vec<Complex64> = samples.into_iter().map(Complex64::from).collect();
    let twiddle: Vec<Complex64> = (0..k).map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / k as f64)).collect();
    let mut line = vec![Complex64::default(); k];
    for axis in 0..n_dims {
        let stride = k.pow((n_dims - 1 - axis) as u32);
        for base in 0..data.len() {
            if !(base / stride).is_multiple_of(k) {
                continue;
            }
            for (f, out) in line.iter_mut().enumerate() {
                *out = (0..k).map(|j| data[base + j * stride] * twiddle[(f * j) % k]).sum::<Complex64>() / k as f64;
            }
            for (f, v) in line.iter().enumerate() {
                data[base + f * stride] = *v;
            }
        }
    }
    data.into_iter()
        .enumerate()
        .map(|(flat, c)| {
            let mut gamma = vec![0i32; n_dims];
            let mut rest = flat;
            for d in (0..n_dims).rev() {
                gamma[d] = bin_frequency(rest % k, probe);
                rest /= k;
            }
            (gamma, c)
        })
        .collect()
}

fn check_probe(circuit: &ParamCircuit, probe: usize, n_dims: usize) -> Result<usize> {
    let degree = circuit.encodings_per_feature().into_iter().max().unwrap_or(0);
    if probe < degree {
        return Err(Error::Config(format!("probe degree {probe} is below the circuit's encoding degree {degree}")));
    }
    let k = 2 * probe + 1;
    let size = (0..n_dims).try_fold(1usize, |acc, _| acc.checked_mul(k));
    match size {
        Some(n) if n <= GRID_LIMIT => Ok(degree),
        _ => Err(Error::Config(format!(
            "grid of {k}^{n_dims} evaluations exceeds the limit of {GRID_LIMIT}"
        ))),
    }
}

/// Spectrum of `p1` (readout wire 0) as a function of all features, with
/// raw angles fed straight to the encoding gates.
pub fn extract_spectrum(circuit: &ParamCircuit, weights: &[f64], probe: usize) -> Result<FourierSpectrum> {
    let n = circuit.n_features();
    let max_degree = check_probe(circuit, probe, n)?;
    let axis = grid_points(probe);
    let k = axis.len();
    let total = k.pow(n as u32);
    let samples: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut x = vec![0.0; n];
            let mut rest = flat;
            for d in (0..n).rev() {
                x[d] = axis[rest % k];
                rest /= k;
            }
            Ok(evaluate(circuit, weights, &x, 0)?.p1)
        })
        .collect::<Result<_>>()?;
    Ok(FourierSpectrum { n_features: n, max_degree, probe, coefficients: dft(samples, n, probe) })
}

/// One-dimensional spectrum along `feature`, all other features frozen at
/// `base`. Bounds the per-feature degree of wide models without the full grid.
pub fn extract_slice_spectrum(
    circuit: &ParamCircuit,
    weights: &[f64],
    base: &[f64],
    feature: usize,
    probe: usize,
) -> Result<FourierSpectrum> {
    if feature >= circuit.n_features() || base.len() != circuit.n_features() {
        return Err(Error::Structure(format!(
            "slice along feature {feature} with {} base values for {} features",
            base.len(),
            circuit.n_features()
        )));
    }
    check_probe(circuit, probe, 1)?;
    let degree = circuit.encodings_per_feature()[feature];
    let samples: Vec<f64> = grid_points(probe)
        .into_iter()
        .map(|v| {
            let mut x = base.to_vec();
            x[feature] = v;
            Ok(evaluate(circuit, weights, &x, 0)?.p1)
        })
        .collect::<Result<_>>()?;
    Ok(FourierSpectrum { n_features: 1, max_degree: degree, probe, coefficients: dft(samples, 1, probe) })
}

/// Number of `(bra, ket)` eigenvalue assignments that land on each degree
/// `d ∈ {−L..L}`: `C(2L, L − d)`. Sums to `4^L`.
pub fn frequency_multiplicities(repetitions: usize) -> Result<BTreeMap<i32, u64>> {
    if repetitions == 0 {
        return Err(Error::Config("multiplicities need L ≥ 1".into()));
    }
    let l = repetitions as i32;
    Ok((-l..=l).map(|d| (d, binomial(2 * repetitions as u64, (l - d) as u64))).collect())
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub degree: usize,
    pub max_leakage: f64,
    pub hermitian_defect: f64,
    pub pass: bool,
}

/// Largest coefficient magnitude outside `{−L..L}^N`. Needs a spectrum probed
/// at least two degrees beyond `L` so leakage has room to show.
pub fn verify_truncation(spectrum: &FourierSpectrum, degree: usize) -> Result<TruncationReport> {
    if spectrum.probe < degree + 2 {
        return Err(Error::Config(format!(
            "truncation check at degree {degree} needs a probe of at least {}, spectrum has {}",
            degree + 2,
            spectrum.probe
        )));
    }
    let l = degree as i32;
    let max_leakage = spectrum
        .coefficients
        .iter()
        .filter(|(g, _)| g.iter().any(|v| v.abs() > l))
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    Ok(TruncationReport {
        degree,
        max_leakage,
        hermitian_defect: spectrum.hermitian_defect(),
        pass: max_leakage < LEAKAGE_TOLERANCE,
    })
}
