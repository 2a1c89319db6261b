use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bitplane::{encrypt_planes, EncryptionParams};
use crate::classifier::{
    cross_validate_lambda, train_with, DenseMatrix, Label, LabeledFeatureSet, TrainOptions,
    LAMBDA_GRID,
};
use crate::error::{Error, Result};
use crate::features::extract_features;
use crate::image::GrayImage;
use crate::io::read_image;
use crate::keystream::{Key, Nonce};

use super::manifest::DatasetManifest;
use super::report::{ReportRow, Task};
use super::split::split_indices;

/// What happens to the encrypted planes before feature extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preprocess {
    /// Features see the ciphertext as is.
    None,
    /// Encrypted planes are cleared first.
    Zero,
}

impl Preprocess {
    pub fn task(self) -> Task {
        match self {
            Preprocess::None => Task::ForensicsRaw,
            Preprocess::Zero => Task::ForensicsZeroed,
        }
    }
}

impl fmt::Display for Preprocess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preprocess::None => "none",
            Preprocess::Zero => "zero",
        })
    }
}

impl FromStr for Preprocess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Preprocess::None),
            "zero" => Ok(Preprocess::Zero),
            other => Err(Error::InvalidArgument(format!(
                "unknown preprocessing `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub key: Key,
    pub seed: u64,
    pub train_ratio: f64,
    pub train: TrainOptions,
    /// Choose lambda by k-fold cross-validation on the training side.
    pub cv_folds: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(key: Key, seed: u64) -> Self {
        Self {
            key,
            seed,
            train_ratio: 0.8,
            train: TrainOptions::default(),
            cv_folds: None,
        }
    }
}

/// Experiment key used when none is supplied.
pub fn derive_key(seed: u64) -> Key {
    let mut h = Sha256::new();
    h.update(b"planeguard experiment key");
    h.update(seed.to_le_bytes());
    Key(h.finalize().into())
}

/// Manifest plus decoded images, in manifest order.
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub manifest: DatasetManifest,
    pub images: Vec<GrayImage>,
}

impl LoadedDataset {
    pub fn new(manifest: DatasetManifest, images: Vec<GrayImage>) -> Result<Self> {
        if manifest.len() != images.len() {
            return Err(Error::InvalidInput(format!(
                "{} manifest entries but {} images",
                manifest.len(),
                images.len()
            )));
        }
        Ok(Self { manifest, images })
    }

    pub fn load(manifest: DatasetManifest) -> Result<Self> {
        let images = manifest
            .entries()
            .par_iter()
            .map(|e| read_image(&e.path))
            .collect::<Result<Vec<_>>>()?;
        Self::new(manifest, images)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.manifest.entries().iter().map(|e| e.label).collect()
    }
}

/// Encrypts image `index` with the nonce derived from its position.
pub fn encrypt_indexed(img: &GrayImage, index: usize, s: u8, key: Key) -> Result<GrayImage> {
    let params = EncryptionParams::new(key, Nonce::from_index(index as u128), s)?;
    Ok(encrypt_planes(img, &params))
}

/// Feature rows for every image after encryption and preprocessing.
pub fn encrypted_features(
    dataset: &LoadedDataset,
    s: u8,
    preprocess: Preprocess,
    key: Key,
) -> Result<DenseMatrix<f64>> {
    let rows = dataset
        .images
        .par_iter()
        .enumerate()
        .map(|(k, img)| {
            let enc = encrypt_indexed(img, k, s, key)?;
            let zeroed = match preprocess {
                Preprocess::None => 0,
                Preprocess::Zero => s,
            };
            extract_features::<f64>(&enc, zeroed)
                .map(|f| f.into_values())
                .map_err(|e| e.context(format!("{}", dataset.manifest.entries()[k].path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::from_rows(&rows)
}

/// Trains on a seeded stratified split of `features` and scores the held-out
/// side.
pub fn evaluate_split(
    features: DenseMatrix<f64>,
    labels: Vec<Label>,
    entries: &DatasetManifest,
    config: &ExperimentConfig,
) -> Result<(f64, usize, usize)> {
    let split = split_indices(entries.entries(), config.train_ratio, config.seed)?;
    let all = LabeledFeatureSet::new(features, labels)?;
    let train = all.subset(&split.train);
    let test = all.subset(&split.test);
    let mut opts = config.train;
    if let Some(folds) = config.cv_folds {
        let (best, _) = cross_validate_lambda(&train, &LAMBDA_GRID, folds, config.seed)?;
        opts.lambda = best;
    }
    let (model, report) = train_with(&train, &opts)?;
    if !report.stop.converged() {
        log::warn!(
            "solver stopped early: {:?} after {} iterations",
            report.stop,
            report.iterations
        );
    }
    Ok((model.evaluate(&test)?, train.len(), test.len()))
}

/// Encrypt, preprocess, extract, split, train and evaluate at one plane count.
pub fn run_forensics_experiment(
    dataset: &LoadedDataset,
    s: u8,
    preprocess: Preprocess,
    config: &ExperimentConfig,
) -> Result<ReportRow> {
    let features = encrypted_features(dataset, s, preprocess, config.key)?;
    let (accuracy, n_train, n_test) =
        evaluate_split(features, dataset.labels(), &dataset.manifest, config)?;
    log::info!(
        "s={s} preprocess={preprocess}: accuracy {accuracy:.4} ({n_train} train, {n_test} test)"
    );
    Ok(ReportRow {
        s,
        task: preprocess.task(),
        accuracy,
        n_train,
        n_test,
        seed: config.seed,
    })
}

/// All combinations, `s` outermost. `on_row` sees each row as it finishes.
pub fn run_sweep(
    dataset: &LoadedDataset,
    planes: &[u8],
    modes: &[Preprocess],
    config: &ExperimentConfig,
    mut on_row: impl FnMut(&ReportRow),
) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for &s in planes {
        for &mode in modes {
            let row = run_forensics_experiment(dataset, s, mode, config)
                .map_err(|e| e.context(format!("s={s}, preprocess={mode}")))?;
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}
