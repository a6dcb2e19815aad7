//! Statevector simulation and training for single-qubit data re-uploading
//! classifiers (QAUM) and a multi-qubit QAOA-embedding baseline, with
//! parameter-shift gradients, HTRU2 data handling, and Fourier-spectrum
//! analysis of the trained models.

pub mod circuits;
pub mod data;
pub mod error;
pub mod fourier;
pub mod gradient;
pub mod rng;
pub mod statevector;
pub mod training;

pub use circuits::{build_qaoa_embedding, build_qaum, evaluate, permute_features, ModelOutput, ParamCircuit, Slot};
pub use data::{balanced_sample, load_csv, LabeledDataset, SampleSpec, Scaling};
pub use error::{Error, Result};
pub use fourier::{extract_spectrum, frequency_multiplicities, verify_truncation, FourierSpectrum};
pub use gradient::{grad_loss, grad_p1, GradientVector};
pub use statevector::{apply_gate, BlochVector, Gate, GateKind, StateVector, Wires};
pub use training::{
    cross_entropy, train, uncertainty_protocol, Ansatz, TrainConfig, TrainReport, UncertaintyReport,
};
