//! Selective bitplane encryption with forensics on the clear planes.
//!
//! The `s` most significant bitplanes of an 8-bit grayscale image are XOR-ed
//! with a ChaCha20 keystream. Tampering detection runs on the remaining
//! `8 - s` planes: rich-model residual co-occurrence features feed a ridge
//! regression classifier fitted with LSMR. The experiment layer measures
//! detection accuracy per `s` and pairs it with a privacy index derived from
//! content recognizability.
//!
//! Floating-point stages are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the common choice.

pub mod bitplane;
pub mod classifier;
pub mod error;
pub mod experiments;
pub mod features;
pub mod image;
pub mod io;
pub mod keystream;
pub mod residuals;
pub mod scalar;

pub use bitplane::{encrypt_planes, shift_planes, zero_planes, EncryptionParams};
pub use error::{Error, Result};
pub use image::{to_luminance, GrayImage, Raster};
pub use keystream::{keystream_bits, Key, KeystreamSpec, Nonce};
pub use scalar::Real;

/// Feature vector in double precision, as produced for training.
pub type FeatureVec = features::FeatureVector<f64>;
/// Single-precision feature vector, matching the on-disk representation.
pub type FeatureVec32 = features::FeatureVector<f32>;
pub type RidgeModel = classifier::RidgeModel<f64>;
pub type RidgeModel32 = classifier::RidgeModel<f32>;
pub type LabeledFeatureSet = classifier::LabeledFeatureSet<f64>;
pub type DenseMatrix = classifier::DenseMatrix<f64>;
/// Exact decimal arithmetic for accuracies and privacy indices.
pub type Exact = num_rational::Ratio<i128>;
