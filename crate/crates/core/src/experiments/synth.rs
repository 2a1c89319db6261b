use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::classifier::Label;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::io::write_pgm;

use super::manifest::{DatasetManifest, ManifestEntry};

pub const MIN_SYNTH_SIZE: usize = 64;
pub const MIN_SYNTH_PER_CLASS: usize = 10;

const TEXTURE_STD: f64 = 40.0;
const TEXTURE_BLUR: f64 = 1.5;
const DONOR_BLUR: f64 = 0.5;
const FINE_STD: f64 = 2.0;
const GRADIENT_SPAN: f64 = 40.0;
const PATCH_MIN: usize = 16;
const PATCH_MAX: usize = 64;

/// Axis-aligned square, top-left corner plus side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchRect {
    pub row: usize,
    pub col: usize,
    pub side: usize,
}

impl PatchRect {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.row && i < self.row + self.side && j >= self.col && j < self.col + self.side
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticSample {
    pub image: GrayImage,
    pub label: Label,
    /// Image the patch was pasted into; equals `image` for authentic samples.
    pub base: GrayImage,
    pub patch: Option<PatchRect>,
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

fn reflect(x: isize, n: usize) -> usize {
    let n = n as isize;
    let mut x = x;
    while x < 0 || x >= n {
        x = if x < 0 { -x - 1 } else { 2 * n - x - 1 };
    }
    x as usize
}

/// Separable Gaussian blur with symmetric boundary reflection.
fn blur(field: &[f64], size: usize, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let mut tmp = vec![0.0; field.len()];
    for i in 0..size {
        for j in 0..size {
            tmp[i * size + j] = k
                .iter()
                .enumerate()
                .map(|(t, w)| w * field[i * size + reflect(j as isize + t as isize - r, size)])
                .sum();
        }
    }
    let mut out = vec![0.0; field.len()];
    for i in 0..size {
        for j in 0..size {
            out[i * size + j] = k
                .iter()
                .enumerate()
                .map(|(t, w)| w * tmp[reflect(i as isize + t as isize - r, size) * size + j])
                .sum();
        }
    }
    out
}

fn render(rng: &mut ChaCha8Rng, size: usize, sigma: f64) -> GrayImage {
    let white = Normal::new(0.0, TEXTURE_STD).unwrap();
    let fine = Normal::new(0.0, FINE_STD).unwrap();
    let noise: Vec<f64> = (0..size * size).map(|_| white.sample(rng)).collect();
    let texture = blur(&noise, size, sigma);
    let mean = rng.random_range(80.0..176.0);
    let gx = rng.random_range(-GRADIENT_SPAN..GRADIENT_SPAN);
    let gy = rng.random_range(-GRADIENT_SPAN..GRADIENT_SPAN);
    let pixels = texture
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            let (i, j) = (t / size, t % size);
            let ramp = gy * (i as f64 / size as f64 - 0.5) + gx * (j as f64 / size as f64 - 0.5);
            (mean + ramp + v + fine.sample(rng))
                .round()
                .clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(size, size, pixels).expect("size checked by caller")
}

fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn synthesize_authentic(seed: u64, index: u64, size: usize) -> GrayImage {
    render(&mut sample_rng(seed, index), size, TEXTURE_BLUR)
}

/// A fresh base image with a square taken from a sharper donor pasted in.
pub fn synthesize_tampered(
    seed: u64,
    index: u64,
    size: usize,
) -> (GrayImage, GrayImage, PatchRect) {
    let mut rng = sample_rng(seed, index);
    let base = render(&mut rng, size, TEXTURE_BLUR);
    let donor = render(&mut rng, size, DONOR_BLUR);
    let side = rng.random_range(PATCH_MIN..=PATCH_MAX.min(size / 2));
    let rect = PatchRect {
        row: rng.random_range(0..=size - side),
        col: rng.random_range(0..=size - side),
        side,
    };
    let (dr, dc) = (
        rng.random_range(0..=size - side),
        rng.random_range(0..=size - side),
    );
    let mut image = base.clone();
    for i in 0..side {
        for j in 0..side {
            image.set(rect.row + i, rect.col + j, donor.get(dr + i, dc + j));
        }
    }
    (image, base, rect)
}

/// `n_per_class` authentic then `n_per_class` tampered samples, fully
/// determined by `seed`.
pub fn synthesize_dataset(
    seed: u64,
    n_per_class: usize,
    size: usize,
) -> Result<Vec<SyntheticSample>> {
    if size < MIN_SYNTH_SIZE {
        return Err(Error::InvalidArgument(format!(
            "synthetic images must be at least {MIN_SYNTH_SIZE} pixels wide, got {size}"
        )));
    }
    if n_per_class < MIN_SYNTH_PER_CLASS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SYNTH_PER_CLASS} images per class, got {n_per_class}"
        )));
    }
    Ok((0..2 * n_per_class)
        .into_par_iter()
        .map(|k| {
            let index = k as u64;
            if k < n_per_class {
                let image = synthesize_authentic(seed, index, size);
                SyntheticSample {
                    base: image.clone(),
                    image,
                    label: Label::Authentic,
                    patch: None,
                }
            } else {
                let (image, base, rect) = synthesize_tampered(seed, index, size);
                SyntheticSample {
                    image,
                    base,
                    label: Label::Tampered,
                    patch: Some(rect),
                }
            }
        })
        .collect())
}

/// Writes PGM files and `manifest.csv` under `dir`; returns the manifest path.
pub fn write_synthetic_dataset(
    dir: &Path,
    seed: u64,
    n_per_class: usize,
    size: usize,
) -> Result<std::path::PathBuf> {
    let samples = synthesize_dataset(seed, n_per_class, size)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let entries: Vec<ManifestEntry> = samples
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let name = match s.label {
                Label::Authentic => format!("authentic_{k:05}.pgm"),
                Label::Tampered => format!("tampered_{:05}.pgm", k - n_per_class),
            };
            let path = dir.join(name);
            write_pgm(&path, &s.image)?;
            Ok(ManifestEntry {
                path,
                label: s.label,
                class: None,
                group: None,
            })
        })
        .collect::<Result<_>>()?;
    let manifest_path = dir.join("manifest.csv");
    DatasetManifest::new(entries)?.write(&manifest_path)?;
    Ok(manifest_path)
}
