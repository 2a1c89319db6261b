use std::fmt;
use std::io::Write;

use anyhow::Context;
use rayon::prelude::*;

use planeguard_core::classifier::{
    cross_validate_lambda, load_model, save_model, train_with, DenseMatrix, Label,
    LabeledFeatureSet, TrainOptions, LAMBDA_GRID,
};
use planeguard_core::experiments::{
    derive_key, ingest_manifest, run_sweep, tradeoff_report, tradeoff_to_string, write_report,
    write_synthetic_dataset, write_tradeoff, ExperimentConfig, LoadedDataset, Preprocess,
};
use planeguard_core::features::{
    extract_features, label_sidecar_path, read_feature_file, read_labels, write_feature_csv,
    write_feature_file, write_labels, FeatureMatrix,
};
use planeguard_core::io::{read_image, write_image};
use planeguard_core::residuals::{Axis, Direction, Directional, KernelKind, ResidualKernel};
use planeguard_core::{encrypt_planes, shift_planes, zero_planes, EncryptionParams, Key, Nonce};

use crate::planes::parse_plane_range;
use crate::{
    EncryptArgs, EvaluateArgs, ExperimentArgs, ExtractArgs, PlaneArgs, PreprocessArg,
    PreprocessChoice, ResidualArgs, SynthArgs, TradeoffArgs, TrainArgs,
};

/// Bad or missing command-line input not caught by the parser.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn encrypt(a: EncryptArgs) -> anyhow::Result<()> {
    let key = a
        .key
        .as_deref()
        .ok_or_else(|| UsageError("encryption needs --key or PLANEGUARD_KEY".into()))?;
    let key = Key::from_hex(key)?;
    let nonce = match a.nonce.as_deref() {
        Some(n) => Nonce::from_hex(n)?,
        None => {
            log::warn!("no --nonce given; using the nonce for index 0");
            Nonce::from_index(0)
        }
    };
    let img = read_image(&a.input)?;
    let out = encrypt_planes(&img, &EncryptionParams::new(key, nonce, a.s)?);
    write_image(&a.out, &out)?;
    Ok(())
}

pub fn zero(a: PlaneArgs) -> anyhow::Result<()> {
    let img = read_image(&a.input)?;
    write_image(&a.out, &zero_planes(&img, a.s)?)?;
    Ok(())
}

pub fn shift(a: PlaneArgs) -> anyhow::Result<()> {
    let img = read_image(&a.input)?;
    write_image(&a.out, &shift_planes(&img, a.s)?)?;
    Ok(())
}

pub fn extract(a: ExtractArgs) -> anyhow::Result<()> {
    let manifest = ingest_manifest(&a.manifest)?;
    let zeroed = match a.preprocess {
        PreprocessArg::None => 0,
        PreprocessArg::Zero => a.s,
    };
    let rows = manifest
        .entries()
        .par_iter()
        .map(|e| {
            let img = read_image(&e.path)?;
            let f = extract_features::<f32>(&img, zeroed)
                .map_err(|err| err.context(e.path.display().to_string()))?;
            Ok(f.into_values())
        })
        .collect::<planeguard_core::Result<Vec<_>>>()?;
    let dim = rows
        .first()
        .map_or(planeguard_core::features::FEATURE_DIM, Vec::len);
    let matrix = FeatureMatrix::from_rows(dim, &rows)?;
    let labels: Vec<Label> = manifest.entries().iter().map(|e| e.label).collect();
    write_feature_file(&a.out_features, &matrix)?;
    write_labels(&label_sidecar_path(&a.out_features), &labels)?;
    if let Some(csv) = &a.csv {
        let names: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        write_feature_csv(csv, &names, &matrix)?;
    }
    log::info!(
        "{} rows of {dim} features -> {}",
        matrix.rows(),
        a.out_features.display()
    );
    Ok(())
}

fn load_labeled(path: &std::path::Path) -> anyhow::Result<LabeledFeatureSet<f64>> {
    let m = read_feature_file(path)?;
    let sidecar = label_sidecar_path(path);
    let labels = read_labels(&sidecar).with_context(|| format!("labels for {}", path.display()))?;
    let rows: Vec<Vec<f64>> = m
        .iter_rows()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    let matrix = if rows.is_empty() {
        DenseMatrix::zeros(0, m.dim())
    } else {
        DenseMatrix::from_rows(&rows)?
    };
    Ok(LabeledFeatureSet::new(matrix, labels)?)
}

pub fn train(a: TrainArgs) -> anyhow::Result<()> {
    let data = load_labeled(&a.features)?;
    let mut opts = TrainOptions {
        lambda: a.lambda,
        ..TrainOptions::default()
    };
    if let Some(folds) = a.cv {
        let (best, scores) = cross_validate_lambda(&data, &LAMBDA_GRID, folds, 0)?;
        for (l, s) in LAMBDA_GRID.iter().zip(&scores) {
            log::info!("cv lambda {l}: {s:.4}");
        }
        opts.lambda = best;
    }
    let (model, report) = train_with(&data, &opts)?;
    save_model(&a.out_model, &model)?;
    println!(
        "lambda {} iterations {} stop {:?} train_accuracy {}",
        opts.lambda,
        report.iterations,
        report.stop,
        model.evaluate(&data)?
    );
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    let model = load_model::<f64>(&a.model)?;
    let data = load_labeled(&a.features)?;
    println!("accuracy {} n {}", model.evaluate(&data)?, data.len());
    Ok(())
}

pub fn experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    let planes = parse_plane_range(&a.s_range)?;
    if a.report.exists() && !a.force {
        return Err(UsageError(format!(
            "{} already exists; pass --force to overwrite",
            a.report.display()
        ))
        .into());
    }
    let key = match a.key.as_deref() {
        Some(k) => Key::from_hex(k)?,
        None => {
            log::info!("no key given; deriving one from the seed");
            derive_key(a.seed)
        }
    };
    let modes: &[Preprocess] = match a.preprocess {
        PreprocessChoice::None => &[Preprocess::None],
        PreprocessChoice::Zero => &[Preprocess::Zero],
        PreprocessChoice::Both => &[Preprocess::None, Preprocess::Zero],
    };
    let manifest = ingest_manifest(&a.manifest)?;
    let dataset = LoadedDataset::load(manifest)?;
    let mut config = ExperimentConfig::new(key, a.seed);
    config.train.lambda = a.lambda;
    config.cv_folds = a.cv;
    let rows = run_sweep(&dataset, &planes, modes, &config, |r| {
        println!("s={} {} accuracy={}", r.s, r.task, r.accuracy);
    })?;
    write_report(&a.report, &rows, a.force)?;
    Ok(())
}

pub fn synth(a: SynthArgs) -> anyhow::Result<()> {
    let manifest = write_synthetic_dataset(&a.out_dir, a.seed, a.n, a.size)?;
    println!("{}", manifest.display());
    Ok(())
}

pub fn tradeoff(a: TradeoffArgs) -> anyhow::Result<()> {
    let rows = tradeoff_report(&a.forensics, a.recognizability.as_deref())?;
    match &a.out {
        Some(p) => write_tradeoff(p, &rows)?,
        None => print!("{}", tradeoff_to_string(&rows)),
    }
    Ok(())
}

fn parse_kernel(name: &str) -> Result<ResidualKernel, UsageError> {
    let bad = || UsageError(format!("unknown kernel `{name}`"));
    let dir = |t: &str| {
        Direction::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(t))
    };
    let kind = match name.to_ascii_lowercase().as_str() {
        "square3" => Some(KernelKind::Square3),
        "square5" => Some(KernelKind::Square5),
        "edge3:n" => Some(KernelKind::Edge3N),
        "edge3:s" => Some(KernelKind::Edge3S),
        "edge3:e" => Some(KernelKind::Edge3E),
        "edge3:w" => Some(KernelKind::Edge3W),
        _ => None,
    };
    if let Some(k) = kind {
        return Ok(ResidualKernel::fixed(k));
    }
    let (order, arg) = name.split_once(':').ok_or_else(bad)?;
    let which = match order {
        "1" => Directional::First(dir(arg).ok_or_else(bad)?),
        "2" => Directional::Second(
            Axis::ALL
                .into_iter()
                .find(|a| a.name().eq_ignore_ascii_case(arg))
                .ok_or_else(bad)?,
        ),
        "3" => Directional::Third(dir(arg).ok_or_else(bad)?),
        _ => return Err(bad()),
    };
    Ok(ResidualKernel::directional(which))
}

pub fn residual(a: ResidualArgs) -> anyhow::Result<()> {
    let kernel = parse_kernel(&a.kernel)?;
    let img = read_image(&a.input)?;
    let map = kernel.apply(&img)?;
    let mut buf = Vec::new();
    map.write_text(&mut buf)?;
    match &a.out {
        Some(p) => planeguard_core::io::write_atomic(p, |w| w.write_all(&buf))?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}
