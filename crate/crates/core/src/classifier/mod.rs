//! Authentic-vs-tampered classification: standardized ridge regression
//! fitted with LSMR.

mod lsmr;
mod matrix;
mod model_file;
mod ridge;

pub use lsmr::{lsmr_solve, LsmrParams, LsmrSolution, StopReason};
pub use matrix::{DenseMatrix, LinearOperator};
pub use model_file::{load_model, model_to_string, parse_model, save_model};
pub use ridge::{
    cross_validate_lambda, evaluate, predict, train, train_with, Label, LabeledFeatureSet,
    RidgeModel, TrainOptions, TrainReport, LAMBDA_GRID, STD_EPSILON,
};
