//! Region similarity (Jaccard) and contour accuracy (boundary F-measure).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::io::read_mask_dir;
use crate::raster::same_dims;
use crate::{BinaryMask, Error, Result};

/// Intersection over union; two empty masks score 1.
pub fn jaccard(m: &BinaryMask, g: &BinaryMask) -> Result<f64> {
    same_dims(m.dims(), g.dims())?;
    let (mut inter, mut union) = (0u64, 0u64);
    for (&a, &b) in m.labels().iter().zip(g.labels()) {
        inter += u64::from(a & b);
        union += u64::from(a | b);
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Foreground pixels with a background 4-neighbour or touching the border.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        mask.get(x, y)
            && (x == 0
                || y == 0
                || x + 1 == w
                || y + 1 == h
                || !mask.get(x - 1, y)
                || !mask.get(x + 1, y)
                || !mask.get(x, y - 1)
                || !mask.get(x, y + 1))
    })
    .expect("same shape as input")
}

/// Dilate by a Euclidean disk of radius `radius` pixels.
fn dilate(mask: &BinaryMask, radius: f64) -> BinaryMask {
    let (w, h) = mask.dims();
    let r = radius.max(0.0).floor() as isize;
    let r2 = radius * radius;
    let offsets: Vec<(isize, isize)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| ((dx * dx + dy * dy) as f64) <= r2)
        .collect();
    let mut out = BinaryMask::empty(w, h);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    out.set(nx as usize, ny as usize, true);
                }
            }
        }
    }
    out
}

fn matched_fraction(from: &BinaryMask, to_dilated: &BinaryMask) -> f64 {
    let total = from.count();
    let hit = from
        .labels()
        .iter()
        .zip(to_dilated.labels())
        .filter(|(&a, &b)| a == 1 && b == 1)
        .count();
    hit as f64 / total as f64
}

/// Boundary F-measure with matches accepted within `tolerance` pixels.
pub fn contour_f(m: &BinaryMask, g: &BinaryMask, tolerance: f64) -> Result<f64> {
    same_dims(m.dims(), g.dims())?;
    if !tolerance.is_finite() || tolerance < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "contour tolerance must be finite and >= 0, got {tolerance}"
        )));
    }
    let (bm, bg) = (boundary(m), boundary(g));
    match (bm.is_empty(), bg.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let precision = matched_fraction(&bm, &dilate(&bg, tolerance));
    let recall = matched_fraction(&bg, &dilate(&bm, tolerance));
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// `ceil(0.0075 * diagonal)` pixels.
pub fn default_tolerance(width: usize, height: usize) -> f64 {
    (0.0075 * (width as f64).hypot(height as f64)).ceil()
}

/// Mean of the first quarter of the series minus mean of the last quarter,
/// with quarters of `ceil(T / 4)` frames.
pub fn decay(series: &[f64]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    let q = series.len().div_ceil(4);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    mean(&series[..q]) - mean(&series[series.len() - q..])
}

fn mean(s: &[f64]) -> f64 {
    s.iter().sum::<f64>() / s.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceScore {
    pub j: Vec<f64>,
    pub f: Vec<f64>,
    pub j_mean: f64,
    pub j_decay: f64,
    pub f_mean: f64,
    pub f_decay: f64,
}

impl SequenceScore {
    pub fn from_series(j: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if j.is_empty() || j.len() != f.len() {
            return Err(Error::input("score series must be non-empty and equally long"));
        }
        Ok(Self {
            j_mean: mean(&j),
            j_decay: decay(&j),
            f_mean: mean(&f),
            f_decay: decay(&f),
            j,
            f,
        })
    }

    /// 1 when the mean score exceeds one half.
    pub fn j_recall(&self) -> f64 {
        f64::from(u8::from(self.j_mean > 0.5))
    }

    pub fn f_recall(&self) -> f64 {
        f64::from(u8::from(self.f_mean > 0.5))
    }
}

pub fn sequence_scores(masks: &[BinaryMask], gts: &[BinaryMask], tolerance: Option<f64>) -> Result<SequenceScore> {
    if masks.len() != gts.len() {
        return Err(Error::input(format!(
            "{} predicted masks but {} ground-truth masks",
            masks.len(),
            gts.len()
        )));
    }
    if masks.is_empty() {
        return Err(Error::input("no frames to score"));
    }
    let scores: Vec<(f64, f64)> = masks
        .par_iter()
        .zip(gts.par_iter())
        .map(|(m, g)| {
            let tol = tolerance.unwrap_or_else(|| default_tolerance(g.width(), g.height()));
            Ok((jaccard(m, g)?, contour_f(m, g, tol)?))
        })
        .collect::<Result<_>>()?;
    let (j, f) = scores.into_iter().unzip();
    SequenceScore::from_series(j, f)
}

/// Fraction of sequences whose mean score exceeds one half.
pub fn recall(means: &[f64]) -> f64 {
    if means.is_empty() {
        return 0.0;
    }
    means.iter().filter(|&&m| m > 0.5).count() as f64 / means.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub j_mean: f64,
    pub j_recall: f64,
    pub j_decay: f64,
    pub f_mean: f64,
    pub f_recall: f64,
    pub f_decay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    pub sequences: Vec<(String, SequenceScore)>,
}

impl DatasetReport {
    pub fn aggregate(&self) -> AggregateRow {
        let col = |f: fn(&SequenceScore) -> f64| -> Vec<f64> { self.sequences.iter().map(|(_, s)| f(s)).collect() };
        let j_means = col(|s| s.j_mean);
        let f_means = col(|s| s.f_mean);
        AggregateRow {
            j_mean: mean(&j_means),
            j_recall: recall(&j_means),
            j_decay: mean(&col(|s| s.j_decay)),
            f_mean: mean(&f_means),
            f_recall: recall(&f_means),
            f_decay: mean(&col(|s| s.f_decay)),
        }
    }

    /// One row per sequence plus an `ALL` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sequence,J_mean,J_recall,J_decay,F_mean,F_recall,F_decay\n");
        for (name, s) in &self.sequences {
            writeln!(
                out,
                "{name},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                s.j_mean,
                s.j_recall(),
                s.j_decay,
                s.f_mean,
                s.f_recall(),
                s.f_decay
            )
            .expect("writing to a String");
        }
        let a = self.aggregate();
        writeln!(
            out,
            "ALL,{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            a.j_mean, a.j_recall, a.j_decay, a.f_mean, a.f_recall, a.f_decay
        )
        .expect("writing to a String");
        out
    }
}

/// Score every sequence directory of `gt_root` against the same-named
/// directory under `pred_root`. Both hold `%05d.pgm` masks.
pub fn evaluate_dataset(pred_root: &Path, gt_root: &Path, tolerance: Option<f64>) -> Result<DatasetReport> {
    if !gt_root.is_dir() {
        return Err(Error::input("ground-truth directory not found").in_file(gt_root));
    }
    let mut names = Vec::new();
    for entry in fs::read_dir(gt_root)? {
        let entry = entry?;
        if entry.file_type()?.is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(Error::input("no ground-truth sequences").in_file(gt_root));
    }
    let sequences = names
        .par_iter()
        .map(|name| {
            let pred_dir = pred_root.join(name);
            if !pred_dir.is_dir() {
                return Err(Error::input(format!("missing predictions for sequence {name}")).in_file(&pred_dir));
            }
            let gts = read_mask_dir(&gt_root.join(name))?;
            let preds = read_mask_dir(&pred_dir)?;
            let score = sequence_scores(&preds, &gts, tolerance).map_err(|e| e.in_file(&pred_dir))?;
            Ok((name.clone(), score))
        })
        .collect::<Result<_>>()?;
    Ok(DatasetReport { sequences })
}
