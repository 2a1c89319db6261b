use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::lsmr::{lsmr_solve, LsmrParams, StopReason};
use super::matrix::DenseMatrix;

/// Standard deviations below this are floored.
pub const STD_EPSILON: f64 = 1e-8;

/// Default regularization grid for cross-validation.
pub const LAMBDA_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Authentic,
    Tampered,
}

impl Label {
    /// Regression target: authentic -1, tampered +1.
    pub fn target<T: Real>(self) -> T {
        match self {
            Label::Authentic => -T::one(),
            Label::Tampered => T::one(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Authentic => "authentic",
            Label::Tampered => "tampered",
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Authentic => Label::Tampered,
            Label::Tampered => Label::Authentic,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "authentic" => Ok(Label::Authentic),
            "tampered" => Ok(Label::Tampered),
            other => Err(Error::InvalidInput(format!(
                "unknown label {other:?} (expected authentic or tampered)"
            ))),
        }
    }
}

/// Feature rows with one label each.
#[derive(Clone, Debug)]
pub struct LabeledFeatureSet<T> {
    features: DenseMatrix<T>,
    labels: Vec<Label>,
}

impl<T: Real> LabeledFeatureSet<T> {
    pub fn new(features: DenseMatrix<T>, labels: Vec<Label>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &DenseMatrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Solver settings for [`train_with`].
#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub lambda: f64,
    pub atol: f64,
    pub btol: f64,
    /// `None`: four times the feature dimension.
    pub max_iter: Option<usize>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            atol: 1e-8,
            btol: 1e-8,
            max_iter: None,
        }
    }
}

/// Standardization statistics plus ridge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeModel<T> {
    pub(crate) weights: Vec<T>,
    pub(crate) means: Vec<T>,
    pub(crate) stds: Vec<T>,
    pub(crate) label_offset: T,
    pub(crate) lambda: T,
}

/// What the solver did while fitting.
#[derive(Clone, Copy, Debug)]
pub struct TrainReport {
    pub iterations: usize,
    pub stop: StopReason,
}

impl<T: Real> RidgeModel<T> {
    pub fn from_parts(
        weights: Vec<T>,
        means: Vec<T>,
        stds: Vec<T>,
        label_offset: T,
        lambda: T,
    ) -> Result<Self> {
        let dim = weights.len();
        if means.len() != dim || stds.len() != dim {
            return Err(Error::InvalidInput(format!(
                "model vectors disagree: weights {dim}, means {}, stds {}",
                means.len(),
                stds.len()
            )));
        }
        let eps = T::from_f64_lossy(STD_EPSILON);
        if stds.iter().any(|&s| s.is_nan() || s < eps) {
            return Err(Error::InvalidInput(format!(
                "standard deviations must be >= {STD_EPSILON}"
            )));
        }
        if lambda.is_nan() || lambda < T::zero() {
            return Err(Error::InvalidInput("lambda must be non-negative".into()));
        }
        Ok(Self {
            weights,
            means,
            stds,
            label_offset,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn stds(&self) -> &[T] {
        &self.stds
    }

    pub fn label_offset(&self) -> T {
        self.label_offset
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Regression score; positive leans tampered.
    pub fn score(&self, features: &[T]) -> Result<T> {
        if features.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "feature dimension {} does not match model dimension {}",
                features.len(),
                self.dim()
            )));
        }
        let acc = features
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .zip(&self.weights)
            .fold(T::zero(), |acc, (((&x, &m), &s), &w)| acc + (x - m) / s * w);
        Ok(acc + self.label_offset)
    }

    /// Score and decision; a score of exactly 0 counts as tampered.
    pub fn predict(&self, features: &[T]) -> Result<(T, Label)> {
        let score = self.score(features)?;
        let label = if score >= T::zero() {
            Label::Tampered
        } else {
            Label::Authentic
        };
        Ok((score, label))
    }

    /// Fraction of correctly classified rows.
    pub fn evaluate(&self, test: &LabeledFeatureSet<T>) -> Result<f64> {
        if test.is_empty() {
            return Err(Error::InvalidInput("empty test set".into()));
        }
        let preds: Vec<Label> = test
            .features
            .iter_rows()
            .map(|row| self.predict(row).map(|p| p.1))
            .collect::<Result<_>>()?;
        let correct = preds
            .iter()
            .zip(&test.labels)
            .filter(|(p, l)| p == l)
            .count();
        Ok(correct as f64 / test.len() as f64)
    }
}

pub fn predict<T: Real>(model: &RidgeModel<T>, features: &[T]) -> Result<(T, Label)> {
    model.predict(features)
}

pub fn evaluate<T: Real>(model: &RidgeModel<T>, test: &LabeledFeatureSet<T>) -> Result<f64> {
    model.evaluate(test)
}

/// Ridge regression with the given `lambda` and default solver settings.
pub fn train<T: Real>(data: &LabeledFeatureSet<T>, lambda: f64) -> Result<RidgeModel<T>> {
    train_with(
        data,
        &TrainOptions {
            lambda,
            ..TrainOptions::default()
        },
    )
    .map(|(m, _)| m)
}

/// Z-scores the columns, centers the labels and solves the damped problem
/// with `damp = sqrt(lambda)`.
pub fn train_with<T: Real>(
    data: &LabeledFeatureSet<T>,
    opts: &TrainOptions,
) -> Result<(RidgeModel<T>, TrainReport)> {
    if !(opts.lambda >= 0.0 && opts.lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {}",
            opts.lambda
        )));
    }
    for label in [Label::Authentic, Label::Tampered] {
        if data.count(label) < 2 {
            return Err(Error::InvalidTrainingSet(format!(
                "need at least 2 {label} samples, have {}",
                data.count(label)
            )));
        }
    }
    if data.dim() == 0 {
        return Err(Error::InvalidTrainingSet(
            "features have zero dimension".into(),
        ));
    }
    let x = &data.features;
    let (n, d) = (x.rows(), x.cols());
    let n_t = T::from_count(n);

    let mut means = vec![T::zero(); d];
    for row in x.iter_rows() {
        for (m, &v) in means.iter_mut().zip(row) {
            *m = *m + v;
        }
    }
    means.iter_mut().for_each(|m| *m = *m / n_t);
    let mut vars = vec![T::zero(); d];
    for row in x.iter_rows() {
        for ((s, &v), &m) in vars.iter_mut().zip(row).zip(&means) {
            *s = *s + (v - m) * (v - m);
        }
    }
    let eps = T::from_f64_lossy(STD_EPSILON);
    let stds: Vec<T> = vars.iter().map(|&s| (s / n_t).sqrt().max(eps)).collect();

    let mut z = DenseMatrix::zeros(n, d);
    for i in 0..n {
        let src = x.row(i);
        for (k, out) in z.row_mut(i).iter_mut().enumerate() {
            *out = (src[k] - means[k]) / stds[k];
        }
    }

    let targets: Vec<T> = data.labels.iter().map(|l| l.target()).collect();
    let label_offset = targets.iter().copied().sum::<T>() / n_t;
    let centered: Vec<T> = targets.iter().map(|&t| t - label_offset).collect();

    let params = LsmrParams {
        damp: T::from_f64_lossy(opts.lambda.sqrt()),
        atol: T::from_f64_lossy(opts.atol),
        btol: T::from_f64_lossy(opts.btol),
        conlim: T::from_f64_lossy(1e8),
        max_iter: Some(opts.max_iter.unwrap_or(4 * d)),
    };
    let sol = lsmr_solve(&z, &centered, &params)?;
    if sol.stop == StopReason::MaxIterations {
        log::warn!(
            "LSMR stopped at the iteration limit ({} iterations)",
            sol.iterations
        );
    }
    let model = RidgeModel {
        weights: sol.x,
        means,
        stds,
        label_offset,
        lambda: T::from_f64_lossy(opts.lambda),
    };
    Ok((
        model,
        TrainReport {
            iterations: sol.iterations,
            stop: sol.stop,
        },
    ))
}

/// Stratified k-fold cross-validation over `grid`; returns the best lambda
/// (first in grid order on ties) and the mean accuracy of each candidate.
pub fn cross_validate_lambda<T: Real>(
    data: &LabeledFeatureSet<T>,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    if grid.is_empty() || folds < 2 {
        return Err(Error::InvalidArgument(
            "cross-validation needs a non-empty grid and at least 2 folds".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; data.len()];
    for label in [Label::Authentic, Label::Tampered] {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels[i] == label)
            .collect();
        if idx.len() < 2 * folds {
            return Err(Error::InvalidTrainingSet(format!(
                "{} {label} samples are too few for {folds}-fold cross-validation",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            fold_of[i] = k % folds;
        }
    }
    let scores: Vec<f64> = grid
        .par_iter()
        .map(|&lambda| -> Result<f64> {
            let mut total = 0.0;
            for f in 0..folds {
                let train_idx: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] != f).collect();
                let test_idx: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] == f).collect();
                let model = train(&data.subset(&train_idx), lambda)?;
                total += model.evaluate(&data.subset(&test_idx))?;
            }
            Ok(total / folds as f64)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    Ok((grid[best], scores))
}
