use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::Label;
use crate::error::{Error, Result};

use super::manifest::{DatasetManifest, ManifestEntry};

/// Manifest indices on each side, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

const LABELS: [Label; 2] = [Label::Authentic, Label::Tampered];

fn label_slot(l: Label) -> usize {
    match l {
        Label::Authentic => 0,
        Label::Tampered => 1,
    }
}

/// Deterministic label-stratified split that never separates a group.
///
/// Each label's train target is `round(ratio * count)`. Groups (entries sharing
/// a group id; ungrouped entries stand alone) are visited in seeded random
/// order and go to train while every label they contain still fits its target.
pub fn split_indices(entries: &[ManifestEntry], ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    let mut totals = [0usize; 2];
    for e in entries {
        totals[label_slot(e.label)] += 1;
    }
    let mut targets = [0usize; 2];
    for l in LABELS {
        let n = totals[label_slot(l)];
        if n < 2 {
            return Err(Error::InvalidSplit(format!(
                "need at least 2 {l} entries to split, have {n}"
            )));
        }
        targets[label_slot(l)] = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
    }

    let mut units: Vec<Vec<usize>> = Vec::new();
    let mut by_group: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        match e.group.as_deref() {
            Some(g) => match by_group.get(g) {
                Some(&u) => units[u].push(i),
                None => {
                    by_group.insert(g, units.len());
                    units.push(vec![i]);
                }
            },
            None => units.push(vec![i]),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    units.shuffle(&mut rng);

    let mut taken = [0usize; 2];
    let mut train = Vec::new();
    let mut test = Vec::new();
    for unit in units {
        let mut need = [0usize; 2];
        for &i in &unit {
            need[label_slot(entries[i].label)] += 1;
        }
        let fits = (0..2).all(|k| taken[k] + need[k] <= targets[k]);
        if fits {
            for k in 0..2 {
                taken[k] += need[k];
            }
            train.extend(unit);
        } else {
            test.extend(unit);
        }
    }
    train.sort_unstable();
    test.sort_unstable();

    for l in LABELS {
        let on_train = train.iter().filter(|&&i| entries[i].label == l).count();
        let on_test = test.iter().filter(|&&i| entries[i].label == l).count();
        if on_train == 0 || on_test == 0 {
            return Err(Error::InvalidSplit(format!(
                "{l} entries cannot populate both sides ({on_train} train, {on_test} test)"
            )));
        }
    }
    Ok(Split { train, test })
}

/// Splits a manifest into `(train, test)` manifests.
pub fn split(
    manifest: &DatasetManifest,
    ratio: f64,
    seed: u64,
) -> Result<(DatasetManifest, DatasetManifest)> {
    let s = split_indices(manifest.entries(), ratio, seed)?;
    Ok((manifest.subset(&s.train), manifest.subset(&s.test)))
}
