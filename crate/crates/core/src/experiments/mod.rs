//! Dataset handling, the encrypt-extract-train pipeline, report files and the
//! privacy trade-off table.

mod manifest;
mod report;
mod runner;
mod split;
mod synth;
mod tradeoff;

pub use manifest::{ingest_manifest, DatasetManifest, ManifestEntry};
pub use report::{
    append_report, format_decimal, parse_decimal, privacy_index, read_report, write_report,
    ReportRow, Task, REPORT_HEADER,
};
pub use runner::{
    derive_key, encrypt_indexed, encrypted_features, evaluate_split, run_forensics_experiment,
    run_sweep, ExperimentConfig, LoadedDataset, Preprocess,
};
pub use split::{split, split_indices, Split};
pub use synth::{
    synthesize_authentic, synthesize_dataset, synthesize_tampered, write_synthetic_dataset,
    PatchRect, SyntheticSample, MIN_SYNTH_PER_CLASS, MIN_SYNTH_SIZE,
};
pub use tradeoff::{
    tradeoff_report, tradeoff_to_string, write_tradeoff, TradeoffRow, TRADEOFF_HEADER,
};
