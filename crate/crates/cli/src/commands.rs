use std::fs;
use std::path::{Path, PathBuf};

use qaum::fourier::{extract_spectrum, verify_truncation};
use qaum::training::{initial_weights, BlochCheckpoint, TrainReport};
use qaum::{build_qaoa_embedding, build_qaum, train as train_model, uncertainty_protocol, Ansatz, TrainConfig};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::io::{self, RunManifest, Seeds};
use crate::{svg, BlochArgs, FourierArgs, Hyper, TableArgs, TrainArgs};

pub struct Global {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub config: Option<PathBuf>,
}

impl Global {
    fn out_or(&self, default: &str) -> CliResult<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from(default));
        io::ensure_dir(&dir)?;
        Ok(dir)
    }

    fn data(&self) -> CliResult<&Path> {
        self.data.as_deref().ok_or_else(|| CliError::Config("--data is required".into()))
    }

    fn reject(&self, command: &str, data: bool, config: bool) -> CliResult<()> {
        if data && self.data.is_some() {
            return Err(CliError::Config(format!("--data is not used by `{command}`")));
        }
        if config && self.config.is_some() {
            return Err(CliError::Config(format!("--config is not used by `{command}`")));
        }
        Ok(())
    }
}

/// Defaults, then the config file, then flags.
fn base_config(global: &Global, hyper: &Hyper) -> CliResult<TrainConfig> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("--config {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("--config {}: {e}", path.display())))?
        }
        None => TrainConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.weight_seed = seed;
        cfg.sample_seed = seed;
    }
    if let Some(v) = hyper.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = hyper.learning_rate {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("--learning-rate must be positive, got {v}")));
        }
        cfg.learning_rate = v;
    }
    if let Some(v) = hyper.sample_size {
        if v == 0 || !v.is_multiple_of(2) {
            return Err(CliError::Config(format!("--sample-size must be even and positive, got {v}")));
        }
        cfg.sample_size = v;
    }
    if let Some(v) = hyper.clamp_epsilon {
        cfg.clamp_epsilon = v;
    }
    if let Some(v) = hyper.qaoa_wires {
        cfg.qaoa_wires = v;
    }
    if let Some(v) = &hyper.feature_order {
        cfg.feature_order = Some(v.clone());
    }
    Ok(cfg)
}

fn config_json(cfg: &TrainConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn train(global: &Global, args: TrainArgs) -> CliResult<()> {
    let mut cfg = base_config(global, &args.hyper)?;
    if let Some(a) = args.ansatz {
        cfg.ansatz = a;
    }
    if let Some(r) = args.reps {
        cfg.repetitions = r;
    }
    if let Some(b) = args.bloch_points {
        cfg.bloch_points = b;
    }
    if let Some(c) = args.checkpoints {
        cfg.checkpoints = c;
    }
    cfg.validate()?;
    let (dataset, digest) = io::load_dataset(global.data()?)?;
    let out = global.out_or("run")?;

    let report = train_model(&cfg, &dataset)?;
    let report_path = out.join("report.json");
    let loss_path = out.join("loss.csv");
    io::write_json(&report_path, &report)?;
    io::write_csv(
        &loss_path,
        &["epoch", "loss"],
        report.loss_curve.iter().enumerate().map(|(i, &l)| vec![(i + 1).to_string(), fmt(l)]),
    )?;

    let mut manifest = RunManifest::new("train", config_json(&cfg));
    manifest.seeds = Some(Seeds { weight_seed: cfg.weight_seed, sample_seed: Some(cfg.sample_seed) });
    manifest.input = Some(digest);
    manifest.outputs = vec![report_path.display().to_string(), loss_path.display().to_string()];
    manifest.write(&out)?;

    println!(
        "{} L={} ({} weights): min loss {:.4}, train accuracy {:.3}, holdout accuracy {:.3}",
        cfg.ansatz, cfg.repetitions, report.n_weights, report.min_loss, report.train_accuracy, report.holdout_accuracy
    );
    Ok(())
}

const TABLE_HEADER: [&str; 7] = ["Model", "Qubits", "Repetitions", "Params", "MinLoss", "InitErr", "SamplingErr"];

pub fn table(global: &Global, args: TableArgs) -> CliResult<()> {
    let base = base_config(global, &args.hyper)?;
    let (dataset, digest) = io::load_dataset(global.data()?)?;
    let out = global.out_or("table")?;

    let mut reports = Vec::new();
    let mut rows: Vec<[String; 7]> = Vec::new();
    for ansatz in [Ansatz::Qaoa, Ansatz::Qaum] {
        for &l in &args.reps {
            let cfg = TrainConfig { ansatz, repetitions: l, bloch_points: 0, ..base.clone() };
            cfg.validate()?;
            eprintln!("running {ansatz} L={l}");
            let qubits = cfg.build_circuit()?.n_qubits();
            let u = uncertainty_protocol(&cfg, &dataset)?;
            rows.push([
                ansatz.to_string(),
                qubits.to_string(),
                l.to_string(),
                u.n_weights.to_string(),
                format!("{:.4}", u.mean_min_loss),
                format!("{:.4}", u.init_err),
                format!("{:.4}", u.sampling_err),
            ]);
            reports.push(u);
        }
    }

    let widths: Vec<usize> =
        (0..7).map(|c| rows.iter().map(|r| r[c].len()).chain([TABLE_HEADER[c].len()]).max().unwrap()).collect();
    let line = |cells: Vec<&str>| {
        cells.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect::<Vec<_>>().join("  ")
    };
    println!("{}", line(TABLE_HEADER.to_vec()));
    for r in &rows {
        println!("{}", line(r.iter().map(String::as_str).collect()));
    }

    let csv_path = out.join("table.csv");
    let json_path = out.join("table.json");
    io::write_csv(&csv_path, &TABLE_HEADER, rows.iter().map(|r| r.to_vec()))?;
    io::write_json(&json_path, &reports)?;

    let mut manifest = RunManifest::new("table", json!({ "base": config_json(&base), "repetitions": args.reps }));
    manifest.seeds = Some(Seeds { weight_seed: base.weight_seed, sample_seed: Some(base.sample_seed) });
    manifest.input = Some(digest);
    manifest.outputs = vec![csv_path.display().to_string(), json_path.display().to_string()];
    manifest.write(&out)
}

/// Evenly strided subset of at most `max` points, keeping their order.
fn thin(checkpoint: &BlochCheckpoint, max: Option<usize>) -> BlochCheckpoint {
    let n = checkpoint.points.len();
    let points = match max {
        Some(m) if m < n => (0..m).map(|i| checkpoint.points[i * n / m]).collect(),
        _ => checkpoint.points.clone(),
    };
    BlochCheckpoint { epoch: checkpoint.epoch, points }
}

pub fn bloch(global: &Global, args: BlochArgs) -> CliResult<()> {
    global.reject("bloch", true, true)?;
    let report_path = args.run.join("report.json");
    let digest = io::digest(&report_path)?;
    let report: TrainReport = serde_json::from_value(io::read_json(&report_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", report_path.display())))?;
    let trajectory = match report.bloch_trajectory {
        Some(t) if !t.is_empty() => t,
        _ => {
            return Err(CliError::Data(format!(
                "{} has no Bloch trajectory; train a QAUM model with --bloch-points",
                report_path.display()
            )))
        }
    };
    let out = global.out.clone().unwrap_or_else(|| args.run.join("bloch"));
    io::ensure_dir(&out)?;

    let mut outputs = Vec::new();
    for cp in &trajectory {
        let cp = thin(cp, args.max_points);
        let csv_path = out.join(format!("bloch_epoch{}.csv", cp.epoch));
        let svg_path = out.join(format!("bloch_epoch{}.svg", cp.epoch));
        io::write_csv(
            &csv_path,
            &["label", "x", "y", "z"],
            cp.points.iter().map(|p| vec![p.label.to_string(), fmt(p.x), fmt(p.y), fmt(p.z)]),
        )?;
        io::write_text(&svg_path, &svg::render(&cp))?;
        let summary = |label| cp.mean_z(label).map_or("n/a".to_string(), |z| format!("{z:+.3}"));
        println!("epoch {:>4}: {} points, mean z pulsar {}, non-pulsar {}", cp.epoch, cp.points.len(), summary(1), summary(0));
        outputs.push(csv_path.display().to_string());
        outputs.push(svg_path.display().to_string());
    }

    let mut manifest = RunManifest::new("bloch", json!({ "run": args.run, "max_points": args.max_points }));
    manifest.input = Some(digest);
    manifest.outputs = outputs;
    manifest.write(&out)
}

fn load_weights(path: &Path) -> CliResult<Vec<f64>> {
    let value = io::read_json(path)?;
    let array = value.get("final_weights").unwrap_or(&value);
    serde_json::from_value(array.clone())
        .map_err(|e| CliError::Data(format!("{}: expected a weight array or a report with final_weights: {e}", path.display())))
}

pub fn fourier(global: &Global, args: FourierArgs) -> CliResult<()> {
    global.reject("fourier", true, true)?;
    let (features, reps) = (args.features, args.reps);
    let circuit = match args.ansatz {
        Ansatz::Qaum => build_qaum(features, reps)?,
        Ansatz::Qaoa => build_qaoa_embedding(args.qaoa_wires.unwrap_or(features + 1), features, reps)?,
    };
    let seed = global.seed.unwrap_or(0);
    let weights = match &args.weights {
        Some(path) => load_weights(path)?,
        None => initial_weights(circuit.n_weights(), seed),
    };
    let degree = circuit.encodings_per_feature().into_iter().max().unwrap_or(0);
    let probe = args.probe.unwrap_or(degree + 2);
    if probe < degree + 2 {
        return Err(CliError::Config(format!(
            "--probe {probe} is too small: degree-{degree} truncation needs a probe of at least {}",
            degree + 2
        )));
    }
    let out = global.out_or("fourier")?;

    let spectrum = extract_spectrum(&circuit, &weights, probe)?;
    let verdict = verify_truncation(&spectrum, degree)?;
    let spectrum_path = out.join("spectrum.json");
    let verdict_path = out.join("verdict.json");
    io::write_text(&spectrum_path, &spectrum.to_json())?;
    io::write_json(&verdict_path, &verdict)?;

    let mut manifest = RunManifest::new(
        "fourier",
        json!({
            "ansatz": args.ansatz,
            "repetitions": reps,
            "features": features,
            "qaoa_wires": args.qaoa_wires,
            "probe": probe,
            "weights": args.weights.as_ref().map_or("random".to_string(), |p| p.display().to_string()),
        }),
    );
    if args.weights.is_none() {
        manifest.seeds = Some(Seeds { weight_seed: seed, sample_seed: None });
    } else {
        manifest.input = args.weights.as_deref().map(io::digest).transpose()?;
    }
    manifest.outputs = vec![spectrum_path.display().to_string(), verdict_path.display().to_string()];
    manifest.write(&out)?;

    println!(
        "truncation at degree {degree}: {} (max leakage {:.3e}, Hermitian defect {:.3e}, {} coefficients)",
        if verdict.pass { "PASS" } else { "FAIL" },
        verdict.max_leakage,
        verdict.hermitian_defect,
        spectrum.coefficients.len()
    );
    if verdict.pass {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("spectrum leaks beyond degree {degree}")))
    }
}
