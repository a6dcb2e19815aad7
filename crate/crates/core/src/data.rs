//! HTRU2 ingestion, min-max scaling onto `[0, π]`, and balanced sampling.
//!
//! The CSV has eight float columns (integrated-profile and DM-SNR curve
//! statistics) followed by a 0/1 label, no header.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

pub const N_FEATURES: usize = 8;

pub type Row = [f64; N_FEATURES];

/// Per-feature `(min, max)` bounds fitted on a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub bounds: Vec<(f64, f64)>,
}

impl Scaling {
    /// Bounds that map `[0, π]` onto itself.
    pub fn identity() -> Self {
        Scaling { bounds: vec![(0.0, PI); N_FEATURES] }
    }

    /// `π·(x − min)/(max − min)`, clamped to `[0, π]` for values outside the
    /// fitted range.
    pub fn apply(&self, row: &Row) -> Row {
        let mut out = [0.0; N_FEATURES];
        for (i, (&x, &(lo, hi))) in row.iter().zip(&self.bounds).enumerate() {
            out[i] = (PI * (x - lo) / (hi - lo)).clamp(0.0, PI);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Row>,
    labels: Vec<u8>,
    scaling: Option<Scaling>,
}

impl LabeledDataset {
    pub fn new(features: Vec<Row>, labels: Vec<u8>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Structure(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::Structure(format!("row {i}: label {} is not 0 or 1", labels[i])));
        }
        Ok(LabeledDataset { features, labels, scaling: None })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[Row] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn scaling(&self) -> Option<&Scaling> {
        self.scaling.as_ref()
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.len() - pos, pos)
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: indices.iter().map(|&i| self.features[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            scaling: self.scaling.clone(),
        }
    }

    /// Fits per-feature bounds on this dataset and rescales it onto `[0, π]`.
    pub fn fit_scale(&self) -> Result<LabeledDataset> {
        if self.is_empty() {
            return Err(Error::Usage("cannot fit scaling on an empty dataset".into()));
        }
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); N_FEATURES];
        for row in &self.features {
            for (b, &x) in bounds.iter_mut().zip(row) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        if let Some((feature, &(lo, _))) = bounds.iter().enumerate().find(|(_, (lo, hi))| hi <= lo) {
            return Err(Error::DegenerateScale { feature, value: lo });
        }
        self.apply_scaling(&Scaling { bounds })
    }

    /// Rescales with previously fitted bounds (e.g. from the full dataset).
    pub fn apply_scaling(&self, scaling: &Scaling) -> Result<LabeledDataset> {
        if scaling.bounds.len() != N_FEATURES {
            return Err(Error::Structure(format!("scaling has {} bounds", scaling.bounds.len())));
        }
        if let Some((feature, &(lo, _))) = scaling.bounds.iter().enumerate().find(|(_, (lo, hi))| hi <= lo) {
            return Err(Error::DegenerateScale { feature, value: lo });
        }
        Ok(LabeledDataset {
            features: self.features.iter().map(|r| scaling.apply(r)).collect(),
            labels: self.labels.clone(),
            scaling: Some(scaling.clone()),
        })
    }

    /// Writes the rows as CSV with a header plus a JSON sidecar holding the
    /// scaling bounds and provenance.
    pub fn write_snapshot(&self, csv_path: &Path, sidecar_path: &Path, provenance: &SnapshotProvenance) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path).map_err(|e| csv_error(csv_path, e))?;
        let mut header: Vec<String> = (0..N_FEATURES).map(|i| format!("f{i}")).collect();
        header.push("label".into());
        w.write_record(&header).map_err(|e| csv_error(csv_path, e))?;
        for (row, label) in self.features.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(label.to_string());
            w.write_record(&rec).map_err(|e| csv_error(csv_path, e))?;
        }
        w.flush().map_err(|e| Error::io(csv_path, e))?;

        let sidecar = SnapshotSidecar {
            bounds: self.scaling.as_ref().map(|s| s.bounds.clone()),
            provenance: provenance.clone(),
            rows: self.len(),
        };
        let mut f = File::create(sidecar_path).map_err(|e| Error::io(sidecar_path, e))?;
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        f.write_all(text.as_bytes()).map_err(|e| Error::io(sidecar_path, e))?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotProvenance {
    pub source: String,
    pub source_sha256: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub bounds: Option<Vec<(f64, f64)>>,
    pub provenance: SnapshotProvenance,
    pub rows: usize,
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format { row: 0, message: format!("{other:?}") },
    }
}

/// Reads an HTRU2-style CSV. Row numbers in errors are 1-based.
pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path)
}

fn read_csv<R: std::io::Read>(reader: R, path: &Path) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Parse { row, message: format!("{other:?}") },
        })?;
        if record.len() != N_FEATURES + 1 {
            return Err(Error::Format {
                row,
                message: format!("expected {} columns, found {}", N_FEATURES + 1, record.len()),
            });
        }
        let mut values = [0.0; N_FEATURES];
        for (col, field) in record.iter().take(N_FEATURES).enumerate() {
            values[col] = field.parse::<f64>().map_err(|e| Error::Parse {
                row,
                message: format!("column {}: {field:?}: {e}", col + 1),
            })?;
            if !values[col].is_finite() {
                return Err(Error::Parse { row, message: format!("column {}: non-finite value", col + 1) });
            }
        }
        let raw = &record[N_FEATURES];
        let label = match raw.parse::<i64>() {
            Ok(0) => 0,
            Ok(1) => 1,
            _ => {
                return Err(Error::Parse {
                    row,
                    message: format!("label {raw:?} is not 0 or 1"),
                })
            }
        };
        features.push(values);
        labels.push(label);
    }
    LabeledDataset::new(features, labels)
}

/// Balanced draw: `size / 2` of each class, seeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub size: usize,
    pub seed: u64,
}

/// Index sets of a balanced train sample and an equally sized, disjoint,
/// balanced holdout. Indices are returned sorted.
pub fn balanced_sample_indices(dataset: &LabeledDataset, spec: SampleSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.size == 0 || !spec.size.is_multiple_of(2) {
        return Err(Error::Config(format!("sample size must be even and positive, got {}", spec.size)));
    }
    let half = spec.size / 2;
    let (neg, pos) = dataset.class_counts();
    // train and holdout each take `half` per class
    if 2 * half > neg.min(pos) {
        return Err(Error::Config(format!(
            "balanced train+holdout of {} points each needs {} per class; dataset has {neg} negatives and {pos} positives",
            spec.size,
            2 * half
        )));
    }
    let mut rng = rng::stream(spec.seed, Purpose::Sampling);
    let mut train = Vec::with_capacity(spec.size);
    let mut holdout = Vec::with_capacity(spec.size);
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == class).collect();
        let (picked, _) = idx.partial_shuffle(&mut rng, 2 * half);
        train.extend_from_slice(&picked[..half]);
        holdout.extend_from_slice(&picked[half..]);
    }
    train.sort_unstable();
    holdout.sort_unstable();
    Ok((train, holdout))
}

pub fn balanced_sample(dataset: &LabeledDataset, spec: SampleSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, holdout) = balanced_sample_indices(dataset, spec)?;
    Ok((dataset.subset(&train), dataset.subset(&holdout)))
}

/// Up to `max_points` rows, half from each class where available, for
/// visualization. Sorted indices.
pub fn display_indices(dataset: &LabeledDataset, max_points: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, Purpose::Display);
    let mut out = Vec::new();
    let mut by_class: Vec<Vec<usize>> = [0u8, 1]
        .iter()
        .map(|&c| (0..dataset.len()).filter(|&i| dataset.labels[i] == c).collect())
        .collect();
    let per_class = max_points / 2;
    let (small, large) = if by_class[0].len() <= by_class[1].len() { (0, 1) } else { (1, 0) };
    let take_small = by_class[small].len().min(per_class + max_points % 2);
    let take_large = by_class[large].len().min(max_points - take_small);
    for (c, take) in [(small, take_small), (large, take_large)] {
        let (picked, _) = by_class[c].partial_shuffle(&mut rng, take);
        out.extend_from_slice(picked);
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use proptest::prelude::*;
    use rand::Rng;

    use super::*;

    fn parse(text: &str) -> Result<LabeledDataset> {
        read_csv(Cursor::new(text.to_string()), Path::new("inline.csv"))
    }

    fn toy(n_neg: usize, n_pos: usize, seed: u64) -> LabeledDataset {
        let mut rng = rng::stream(seed, Purpose::Probe);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (class, n) in [(0u8, n_neg), (1, n_pos)] {
            for _ in 0..n {
                let mut r = [0.0; N_FEATURES];
                r.iter_mut().for_each(|v| *v = rng.random_range(-50.0..150.0));
                features.push(r);
                labels.push(class);
            }
        }
        LabeledDataset::new(features, labels).unwrap()
    }

    #[test]
    fn loads_rows_and_counts_classes() {
        let ds = parse("1,2,3,4,5,6,7,8,0\n 2.5, 3, 4, 5, 6, 7, 8, 9, 1\n0,0,0,0,0,0,0,0,0\n").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.class_counts(), (2, 1));
        assert_eq!(ds.features()[1][0], 2.5);
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let ds = parse("").unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.class_counts(), (0, 0));
    }

    #[test]
    fn short_row_names_the_row() {
        let err = parse("1,2,3,4,5,6,7,8,0\n1,2,3,4,5,6,0\n").unwrap_err();
        assert!(matches!(err, Error::Format { row: 2, .. }), "{err}");
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn malformed_values() {
        assert!(matches!(parse("1,2,x,4,5,6,7,8,0\n"), Err(Error::Parse { row: 1, .. })));
        assert!(matches!(parse("1,2,3,4,5,6,7,8,0\n1,2,3,4,5,6,7,8,2\n"), Err(Error::Parse { row: 2, .. })));
        assert!(matches!(parse("1,2,3,4,5,6,7,8,0.5\n"), Err(Error::Parse { row: 1, .. })));
        assert!(matches!(parse("1,2,3,4,5,6,7,nan,1\n"), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_csv("/nonexistent/htru2.csv"), Err(Error::Io { .. })));
    }

    #[test]
    fn scaling_endpoints_and_midpoint() {
        let ds = parse("0,10,0,0,0,0,0,0,0\n4,30,1,1,1,1,1,1,1\n2,20,1,1,1,1,1,1,0\n").unwrap();
        let s = ds.fit_scale().unwrap();
        assert_eq!(s.features()[0][0], 0.0);
        assert_eq!(s.features()[1][0], PI);
        assert!((s.features()[2][0] - PI / 2.0).abs() < 1e-15);
        assert!((s.features()[2][1] - PI / 2.0).abs() < 1e-15);
        assert_eq!(s.scaling().unwrap().bounds[1], (10.0, 30.0));
    }

    #[test]
    fn constant_column_is_degenerate() {
        let ds = parse("0,5,0,0,0,0,0,0,0\n1,5,1,1,1,1,1,1,1\n").unwrap();
        assert!(matches!(ds.fit_scale(), Err(Error::DegenerateScale { feature: 1, .. })));
        assert!(matches!(parse("").unwrap().fit_scale(), Err(Error::Usage(_))));
    }

    #[test]
    fn stored_bounds_rescale_new_rows() {
        let ds = toy(20, 20, 1).fit_scale().unwrap();
        let held = toy(5, 5, 2).apply_scaling(ds.scaling().unwrap()).unwrap();
        assert!(held.features().iter().flatten().all(|v| (0.0..=PI).contains(v)));
    }

    #[test]
    fn balanced_sample_is_balanced_and_disjoint() {
        let ds = toy(300, 120, 3);
        let (train, hold) = balanced_sample(&ds, SampleSpec { size: 100, seed: 9 }).unwrap();
        assert_eq!(train.class_counts(), (50, 50));
        assert_eq!(hold.class_counts(), (50, 50));
        let a = balanced_sample_indices(&ds, SampleSpec { size: 100, seed: 9 }).unwrap();
        let b = balanced_sample_indices(&ds, SampleSpec { size: 100, seed: 9 }).unwrap();
        assert_eq!(a, b);
        let c = balanced_sample_indices(&ds, SampleSpec { size: 100, seed: 10 }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn unsatisfiable_sample_is_config_error() {
        let ds = toy(300, 120, 3);
        assert!(matches!(balanced_sample(&ds, SampleSpec { size: 4000, seed: 0 }), Err(Error::Config(_))));
        assert!(matches!(balanced_sample(&ds, SampleSpec { size: 242, seed: 0 }), Err(Error::Config(_))));
        assert!(balanced_sample(&ds, SampleSpec { size: 120, seed: 0 }).is_ok());
        assert!(matches!(balanced_sample(&ds, SampleSpec { size: 7, seed: 0 }), Err(Error::Config(_))));
    }

    #[test]
    fn train_and_holdout_disjoint_for_many_seeds() {
        let ds = toy(200, 110, 4);
        for seed in 0..100 {
            let (t, h) = balanced_sample_indices(&ds, SampleSpec { size: 100, seed }).unwrap();
            let mut all: Vec<usize> = t.iter().chain(&h).copied().collect();
            all.sort_unstable();
            all.dedup();
            assert_eq!(all.len(), 200, "seed {seed}");
        }
    }

    #[test]
    fn display_subset_is_balanced_and_capped() {
        let ds = toy(900, 300, 5);
        let idx = display_indices(&ds, 1000, 1);
        assert_eq!(idx.len(), 1000);
        let pos = idx.iter().filter(|&&i| ds.labels()[i] == 1).count();
        assert_eq!(pos, 300);
        let idx = display_indices(&ds, 100, 1);
        assert_eq!(idx.len(), 100);
        assert_eq!(idx.iter().filter(|&&i| ds.labels()[i] == 1).count(), 50);
    }

    #[test]
    fn snapshot_files() {
        let dir = tempfile::tempdir().unwrap();
        let ds = toy(3, 3, 6).fit_scale().unwrap();
        let prov = SnapshotProvenance { source: "toy".into(), source_sha256: "00".into(), seed: Some(4) };
        let (csv_p, json_p) = (dir.path().join("s.csv"), dir.path().join("s.json"));
        ds.write_snapshot(&csv_p, &json_p, &prov).unwrap();
        let text = std::fs::read_to_string(&csv_p).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("f0,f1"));
        let side: SnapshotSidecar = serde_json::from_str(&std::fs::read_to_string(&json_p).unwrap()).unwrap();
        assert_eq!(side.bounds.unwrap().len(), 8);
        assert_eq!(side.provenance.seed, Some(4));
    }

    proptest! {
        #[test]
        fn identity_bounds_are_idempotent(seed in 0u64..1000) {
            let ds = toy(10, 10, seed).fit_scale().unwrap();
            let again = ds.apply_scaling(&Scaling::identity()).unwrap();
            for (a, b) in ds.features().iter().flatten().zip(again.features().iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn scaling_is_monotone_per_column(seed in 0u64..1000) {
            let raw = toy(15, 15, seed);
            let scaled = raw.fit_scale().unwrap();
            for col in 0..N_FEATURES {
                for i in 0..raw.len() {
                    for j in 0..raw.len() {
                        if raw.features()[i][col] < raw.features()[j][col] {
                            prop_assert!(scaled.features()[i][col] <= scaled.features()[j][col]);
                        }
                    }
                }
            }
            prop_assert!(scaled.features().iter().flatten().all(|v| (0.0..=PI).contains(v)));
        }
    }
}
