//! Rich-model features from the clear low bitplanes.
//!
//! Pipeline per image: clear the `s` top planes, compute the residual maps the
//! roster needs, quantize each with its own normalizer, accumulate fourth-order
//! co-occurrences and fold them into symmetric orbits. Blocks are concatenated
//! in roster order.

mod cooc;
mod file;
mod quantize;
mod roster;
mod symmetry;

use std::collections::HashMap;

use rayon::prelude::*;

use crate::bitplane::zero_planes;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::residuals::{min_max, ResidualKernel, ResidualMap};
use crate::scalar::Real;

pub use cooc::{cooccurrence4, quad_from_index, quad_index, CoocHistogram, Scan, BINS};
pub use file::{
    label_sidecar_path, read_feature_file, read_labels, write_feature_csv, write_feature_file,
    write_labels, FeatureMatrix,
};
pub use quantize::{quantize_truncate, round_div, QuantizedResidualMap, TRUNCATION};
pub use roster::{
    roster, roster_digest, roster_manifest, Residual, SubmodelKind, SubmodelSpec, FEATURE_DIM,
    MINMAX_BLOCK, SPAM_BLOCK,
};
pub use symmetry::{
    minmax_orbits, spam_block, spam_orbits, symmetrize_minmax, symmetrize_spam, MINMAX_ORBITS,
    SPAM_ORBITS,
};

/// Smallest accepted side: 16 pixels left after the widest 2-pixel margins.
pub const MIN_SIDE: usize = 20;

/// A full feature vector laid out by [`roster`].
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector<T> {
    values: Vec<T>,
}

impl<T: Real> FeatureVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() != FEATURE_DIM {
            return Err(Error::InvalidInput(format!(
                "feature vector has {} values, expected {FEATURE_DIM}",
                values.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The submodel manifest describing this vector's layout.
    pub fn manifest(&self) -> &'static [SubmodelSpec] {
        roster()
    }

    /// Values of one named submodel.
    pub fn block(&self, id: &str) -> Option<&[T]> {
        roster()
            .iter()
            .find(|s| s.id == id)
            .map(|s| &self.values[s.offset..s.offset + s.len()])
    }

    /// Every normalized block: two per spam submodel, one per minmax submodel.
    pub fn normalized_blocks(&self) -> impl Iterator<Item = &[T]> + '_ {
        roster().iter().flat_map(move |s| {
            let block = &self.values[s.offset..s.offset + s.len()];
            match s.kind {
                SubmodelKind::Spam => {
                    let (h, v) = block.split_at(SPAM_ORBITS);
                    vec![h, v]
                }
                SubmodelKind::MinMax => vec![block],
            }
        })
    }
}

fn kernel_for(r: &Residual) -> ResidualKernel {
    match *r {
        Residual::Directional(d) => ResidualKernel::directional(d),
        Residual::Kernel(k) => ResidualKernel::fixed(k),
    }
}

fn submodel<T: Real>(spec: &SubmodelSpec, maps: &HashMap<Residual, ResidualMap>) -> Result<Vec<T>> {
    let scans = [Scan::Horizontal, Scan::Vertical];
    match spec.kind {
        SubmodelKind::Spam => {
            let mut hists = [CoocHistogram::default(), CoocHistogram::default()];
            for r in &spec.residuals {
                let q = quantize_truncate(&maps[r], spec.q, TRUNCATION)?;
                for (hist, scan) in hists.iter_mut().zip(scans) {
                    hist.merge(&cooccurrence4(&q, scan)?);
                }
            }
            symmetrize_spam(&hists[0], &hists[1])
        }
        SubmodelKind::MinMax => {
            let members: Vec<ResidualMap> =
                spec.residuals.iter().map(|r| maps[r].clone()).collect();
            let (lo, hi) = min_max(&members)?;
            let lo = quantize_truncate(&lo, spec.q, TRUNCATION)?;
            let hi = quantize_truncate(&hi, spec.q, TRUNCATION)?;
            let mut hist_lo = CoocHistogram::default();
            let mut hist_hi = CoocHistogram::default();
            for scan in scans {
                hist_lo.merge(&cooccurrence4(&lo, scan)?);
                hist_hi.merge(&cooccurrence4(&hi, scan)?);
            }
            symmetrize_minmax(&hist_lo, &hist_hi)
        }
    }
}

/// Features of `img` after clearing its `s` most significant planes.
///
/// `s = 8` is accepted and yields the all-zero-residual vector.
pub fn extract_features<T: Real>(img: &GrayImage, s: u8) -> Result<FeatureVector<T>> {
    if img.width() < MIN_SIDE || img.height() < MIN_SIDE {
        return Err(Error::DegenerateInput(format!(
            "image too small: {}x{} (minimum {MIN_SIDE}x{MIN_SIDE})",
            img.width(),
            img.height()
        )));
    }
    let clear = zero_planes(img, s)?;

    let mut needed: Vec<Residual> = Vec::new();
    for spec in roster() {
        for r in &spec.residuals {
            if !needed.contains(r) {
                needed.push(*r);
            }
        }
    }
    let maps: HashMap<Residual, ResidualMap> = needed
        .par_iter()
        .map(|r| kernel_for(r).apply(&clear).map(|m| (*r, m)))
        .collect::<Result<_>>()?;

    let blocks: Vec<Vec<T>> = roster()
        .par_iter()
        .map(|spec| submodel(spec, &maps))
        .collect::<Result<_>>()?;
    let values: Vec<T> = blocks.into_iter().flatten().collect();
    FeatureVector::new(values)
}
