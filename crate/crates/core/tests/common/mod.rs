#![allow(dead_code)]

use std::path::PathBuf;

use qaum::data::{LabeledDataset, Row, N_FEATURES};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

/// Two overlapping Gaussian-ish clouds with HTRU2-like class imbalance.
/// Positives sit lower on the first four features and higher on the rest.
pub fn synthetic_htru(n_neg: usize, n_pos: usize, seed: u64) -> LabeledDataset {
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut noise = move || (0..6).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() / 2.0;
    let mut features: Vec<Row> = Vec::new();
    let mut labels = Vec::new();
    for (label, n) in [(0u8, n_neg), (1u8, n_pos)] {
        for _ in 0..n {
            let mut row = [0.0; N_FEATURES];
            for (j, v) in row.iter_mut().enumerate() {
                let shift = if label == 1 { if j < 4 { -1.2 } else { 1.2 } } else { 0.0 };
                *v = 10.0 * (j as f64 + 1.0) + 3.0 * (shift + noise());
            }
            features.push(row);
            labels.push(label);
        }
    }
    LabeledDataset::new(features, labels).unwrap()
}

/// Path of the real HTRU2 CSV: `$HTRU2_CSV`, else `data/HTRU_2.csv` at the
/// workspace root.
pub fn htru2_path() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os("HTRU2_CSV") {
        let p = PathBuf::from(p);
        return p.is_file().then_some(p);
    }
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/HTRU_2.csv");
    p.is_file().then_some(p)
}
