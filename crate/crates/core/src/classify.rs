//! Spectrogram images, 2D-PCA features and kNN motion classification.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major `height x width`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub pixels: Array2<u8>,
}

impl GrayImage {
    pub fn height(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn width(&self) -> usize {
        self.pixels.ncols()
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.pixels.mapv(f64::from)
    }
}

/// Default display range below the peak, in dB.
pub const DEFAULT_DYN_RANGE_DB: f64 = 40.0;
pub const DEFAULT_IMAGE_SIZE: usize = 64;

fn bilinear(src: &Array2<f64>, out_h: usize, out_w: usize) -> Array2<f64> {
    let (in_h, in_w) = src.dim();
    let coord = |i: usize, n_in: usize, n_out: usize| -> (usize, usize, f64) {
        if n_out <= 1 || n_in <= 1 {
            return (0, 0, 0.0);
        }
        let x = i as f64 * (n_in - 1) as f64 / (n_out - 1) as f64;
        let lo = (x.floor() as usize).min(n_in - 1);
        let hi = (lo + 1).min(n_in - 1);
        (lo, hi, x - lo as f64)
    };
    Array2::from_shape_fn((out_h, out_w), |(r, c)| {
        let (r0, r1, fr) = coord(r, in_h, out_h);
        let (c0, c1, fc) = coord(c, in_w, out_w);
        let top = src[[r0, c0]] * (1.0 - fc) + src[[r0, c1]] * fc;
        let bottom = src[[r1, c0]] * (1.0 - fc) + src[[r1, c1]] * fc;
        top * (1.0 - fr) + bottom * fr
    })
}

/// Converts a power map (frames x Doppler bins) into a grayscale image.
///
/// Values are taken in dB relative to the peak, clipped to
/// `[-dyn_range_db, 0]`, mapped affinely onto `[0, 255]` and bilinearly
/// resized. The image is oriented with Doppler on the vertical axis
/// (positive frequencies at the top) and time running left to right.
pub fn to_grayscale(power: &Array2<f64>, dyn_range_db: f64, out_h: usize, out_w: usize) -> GrayImage {
    let peak = power.iter().copied().fold(0.0, f64::max);
    let (frames, bins) = power.dim();
    if peak.is_nan() || peak <= 0.0 || frames == 0 || bins == 0 {
        return GrayImage {
            pixels: Array2::zeros((out_h, out_w)),
        };
    }
    let scaled = Array2::from_shape_fn((bins, frames), |(r, c)| {
        let v = power[[c, bins - 1 - r]];
        let db = if v > 0.0 {
            (10.0 * (v / peak).log10()).max(-dyn_range_db)
        } else {
            -dyn_range_db
        };
        255.0 * (db + dyn_range_db) / dyn_range_db
    });
    let resized = bilinear(&scaled, out_h, out_w);
    GrayImage {
        pixels: resized.mapv(|v| v.round().clamp(0.0, 255.0) as u8),
    }
}

/// How many 2D-PCA components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Components {
    Fixed(usize),
    /// Smallest `d` whose leading eigenvalues hold this fraction of the total.
    Energy(f64),
}

impl Default for Components {
    fn default() -> Self {
        Components::Energy(0.95)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoDPcaModel {
    pub mean_image: Array2<f64>,
    /// `W x d`, orthonormal columns.
    pub projection: Array2<f64>,
    /// All `W` eigenvalues of the image covariance, descending.
    pub eigenvalues: Vec<f64>,
}

impl TwoDPcaModel {
    pub fn n_components(&self) -> usize {
        self.projection.ncols()
    }
}

/// Image covariance `G = (1/n) sum (A_i - mean)^T (A_i - mean)`.
pub fn image_covariance(images: &[Array2<f64>]) -> Result<(Array2<f64>, Array2<f64>)> {
    if images.len() < 2 {
        return Err(Error::invalid(format!(
            "2D-PCA needs at least 2 images, got {}",
            images.len()
        )));
    }
    let dim = images[0].dim();
    if let Some(bad) = images.iter().find(|a| a.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim:?}"),
            actual: format!("{:?}", bad.dim()),
        });
    }
    let n = images.len() as f64;
    let mut mean = Array2::zeros(dim);
    for a in images {
        mean += a;
    }
    mean /= n;
    let mut cov = Array2::zeros((dim.1, dim.1));
    for a in images {
        let centred = a - &mean;
        cov += &centred.t().dot(&centred);
    }
    cov /= n;
    Ok((mean, cov))
}

fn eigen_descending(cov: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let w = cov.nrows();
    // symmetrize against round-off before the solver
    let m = DMatrix::from_fn(w, w, |i, j| 0.5 * (cov[[i, j]] + cov[[j, i]]));
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..w).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Array2::from_shape_fn((w, w), |(r, c)| eig.eigenvectors[(r, order[c])]);
    // sign convention: largest-magnitude entry positive
    for mut col in vectors.columns_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
    (values, vectors)
}

/// Resolves a component rule against descending eigenvalues.
pub fn select_components(eigenvalues: &[f64], rule: Components) -> Result<usize> {
    let w = eigenvalues.len();
    match rule {
        Components::Fixed(d) if (1..=w).contains(&d) => Ok(d),
        Components::Fixed(d) => Err(Error::invalid(format!("d must lie in 1..={w}, got {d}"))),
        Components::Energy(frac) => {
            if !(frac > 0.0 && frac <= 1.0) {
                return Err(Error::invalid("energy fraction must lie in (0, 1]"));
            }
            let total: f64 = eigenvalues.iter().map(|v| v.max(0.0)).sum();
            if total <= 0.0 {
                return Ok(1);
            }
            let mut acc = 0.0;
            for (i, v) in eigenvalues.iter().enumerate() {
                acc += v.max(0.0);
                if acc >= frac * total {
                    return Ok(i + 1);
                }
            }
            Ok(w)
        }
    }
}

fn fit_from_arrays(images: &[Array2<f64>], rule: Components) -> Result<TwoDPcaModel> {
    let (mean_image, cov) = image_covariance(images)?;
    let (eigenvalues, vectors) = eigen_descending(&cov);
    let d = select_components(&eigenvalues, rule)?;
    Ok(TwoDPcaModel {
        mean_image,
        projection: vectors.slice(ndarray::s![.., ..d]).to_owned(),
        eigenvalues,
    })
}

/// Fits 2D-PCA keeping the top `d` eigenvectors of the image covariance.
pub fn fit_2dpca(images: &[GrayImage], d: usize) -> Result<TwoDPcaModel> {
    fit_2dpca_with(images, Components::Fixed(d))
}

pub fn fit_2dpca_with(images: &[GrayImage], rule: Components) -> Result<TwoDPcaModel> {
    let arrays: Vec<Array2<f64>> = images.iter().map(GrayImage::to_f64).collect();
    fit_from_arrays(&arrays, rule)
}

fn project_array(model: &TwoDPcaModel, image: &Array2<f64>) -> Result<Array2<f64>> {
    if image.dim() != model.mean_image.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{:?}", model.mean_image.dim()),
            actual: format!("{:?}", image.dim()),
        });
    }
    Ok((image - &model.mean_image).dot(&model.projection))
}

/// Feature matrix `(A - mean) X_d`, `H x d`.
pub fn project(model: &TwoDPcaModel, image: &GrayImage) -> Result<Array2<f64>> {
    project_array(model, &image.to_f64())
}

/// Distance between two feature matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// Frobenius norm of the difference.
    #[default]
    Frobenius,
    /// Sum over feature columns of the Euclidean column distance.
    ColumnSum,
}

impl Distance {
    pub fn between(self, a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        match self {
            Distance::Frobenius => a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt(),
            Distance::ColumnSum => a
                .columns()
                .into_iter()
                .zip(b.columns())
                .map(|(x, y)| {
                    x.iter()
                        .zip(y.iter())
                        .map(|(p, q)| (p - q).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .sum(),
        }
    }
}

/// k-nearest-neighbour vote with the Frobenius distance.
pub fn knn_classify(train: &[(Array2<f64>, u32)], query: &Array2<f64>, k: usize) -> Result<u32> {
    knn_classify_with(train, query, k, Distance::Frobenius)
}

/// Majority vote among the `k` nearest training samples. Vote ties go to
/// the label with the smaller summed distance, then to the lower label.
/// Equidistant neighbours are taken in training order.
pub fn knn_classify_with(
    train: &[(Array2<f64>, u32)],
    query: &Array2<f64>,
    k: usize,
    metric: Distance,
) -> Result<u32> {
    if train.is_empty() {
        return Err(Error::invalid("kNN training set is empty"));
    }
    if k == 0 || k > train.len() {
        return Err(Error::invalid(format!(
            "k = {k} must lie in 1..={}",
            train.len()
        )));
    }
    let mut dist: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, (f, _))| (metric.between(f, query), i))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut votes: BTreeMap<u32, (usize, f64)> = BTreeMap::new();
    for &(d, i) in &dist[..k] {
        let e = votes.entry(train[i].1).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += d;
    }
    let (label, _) = votes
        .into_iter()
        .min_by(|(la, (ca, da)), (lb, (cb, db))| {
            cb.cmp(ca).then(da.total_cmp(db)).then(la.cmp(lb))
        })
        .expect("k >= 1");
    Ok(label)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// Fraction of each class used for training.
    pub train_fraction: f64,
    pub n_trials: usize,
    pub components: Components,
    pub k: usize,
    pub distance: Distance,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            n_trials: 1000,
            components: Components::default(),
            k: 3,
            distance: Distance::Frobenius,
            seed: 0,
        }
    }
}

/// Monte-Carlo classification summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    /// Class ids in row/column order of `confusion`.
    pub labels: Vec<u32>,
    /// Rows are true classes, columns predictions; each row sums to one.
    pub confusion: Vec<Vec<f64>>,
    pub average_accuracy: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub d: usize,
}

fn split_trial(
    by_class: &[Vec<usize>],
    train_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut train = vec![];
    let mut test = vec![];
    for members in by_class {
        let mut idx = members.clone();
        idx.shuffle(rng);
        let n = idx.len();
        let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.shuffle(rng);
    (train, test)
}

/// Stratified Monte-Carlo evaluation of 2D-PCA + kNN.
///
/// Every trial draws its own split from a stream keyed by `(seed, trial)`,
/// so the report does not depend on how trials are scheduled. With
/// [`Components::Energy`], `d` is resolved once from the full image set
/// (labels are not used) and then held fixed across trials.
pub fn evaluate(dataset: &[(GrayImage, u32)], cfg: &EvalConfig) -> Result<EvalReport> {
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::invalid("train fraction must lie in (0, 1)"));
    }
    if cfg.n_trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let labels: Vec<u32> = {
        let mut l: Vec<u32> = dataset.iter().map(|(_, y)| *y).collect();
        l.sort_unstable();
        l.dedup();
        l
    };
    let by_class: Vec<Vec<usize>> = labels
        .iter()
        .map(|c| (0..dataset.len()).filter(|&i| dataset[i].1 == *c).collect())
        .collect();
    if let Some((c, members)) = labels.iter().zip(&by_class).find(|(_, m)| m.len() < 2) {
        return Err(Error::invalid(format!(
            "class {c} has {} sample(s); at least 2 required",
            members.len()
        )));
    }
    let images: Vec<Array2<f64>> = dataset.iter().map(|(img, _)| img.to_f64()).collect();
    let d = match cfg.components {
        Components::Fixed(d) => d,
        rule => {
            let (_, cov) = image_covariance(&images)?;
            select_components(&eigen_descending(&cov).0, rule)?
        }
    };
    let class_pos: BTreeMap<u32, usize> = labels.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let n_classes = labels.len();

    let counts: Vec<Vec<u64>> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<u64>> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial as u64);
            let (train_idx, test_idx) = split_trial(&by_class, cfg.train_fraction, &mut rng);
            let train_imgs: Vec<Array2<f64>> = train_idx.iter().map(|&i| images[i].clone()).collect();
            let model = fit_from_arrays(&train_imgs, Components::Fixed(d))?;
            let train: Vec<(Array2<f64>, u32)> = train_idx
                .iter()
                .map(|&i| Ok((project_array(&model, &images[i])?, dataset[i].1)))
                .collect::<Result<_>>()?;
            let mut counts = vec![0u64; n_classes * n_classes];
            for &i in &test_idx {
                let feat = project_array(&model, &images[i])?;
                let pred = knn_classify_with(&train, &feat, cfg.k.min(train.len()), cfg.distance)?;
                counts[class_pos[&dataset[i].1] * n_classes + class_pos[&pred]] += 1;
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![0u64; n_classes * n_classes];
    for c in &counts {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    let confusion: Vec<Vec<f64>> = total
        .chunks(n_classes)
        .map(|row| {
            let sum: u64 = row.iter().sum();
            row.iter().map(|&v| v as f64 / sum as f64).collect()
        })
        .collect();
    let average_accuracy =
        (0..n_classes).map(|i| confusion[i][i]).sum::<f64>() / n_classes as f64;
    Ok(EvalReport {
        labels,
        confusion,
        average_accuracy,
        n_trials: cfg.n_trials,
        seed: cfg.seed,
        d,
    })
}
