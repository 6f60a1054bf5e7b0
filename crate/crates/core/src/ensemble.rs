//! Fusion of masks produced by several segmentation methods.
//!
//! Each frame is fused independently. Under [`FusionStrategy::Tism`] every
//! mask is weighted by how close its foreground-pixel count sits to the
//! median count of the set; masks with outlying counts get zero weight.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::raster::same_dims;
use crate::tukey::{mask_outlier_scales, TUKEY_K};
use crate::{BinaryMask, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FusionStrategy {
    #[default]
    Tism,
    Mean,
    Median,
}

impl FromStr for FusionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tism" => Ok(FusionStrategy::Tism),
            "mean" => Ok(FusionStrategy::Mean),
            "median" => Ok(FusionStrategy::Median),
            _ => Err(Error::InvalidParameter(format!(
                "unknown fusion strategy {s:?}, expected tism, mean or median"
            ))),
        }
    }
}

/// The masks of all methods for one frame.
#[derive(Debug, Clone)]
pub struct EnsembleFrameInput {
    masks: Vec<BinaryMask>,
}

impl EnsembleFrameInput {
    pub fn new(masks: Vec<BinaryMask>) -> Result<Self> {
        let first = masks
            .first()
            .ok_or_else(|| Error::input("fusion needs at least one mask"))?;
        for m in &masks[1..] {
            same_dims(first.dims(), m.dims())?;
        }
        Ok(Self { masks })
    }

    pub fn masks(&self) -> &[BinaryMask] {
        &self.masks
    }

    pub fn counts(&self) -> Vec<u64> {
        self.masks.iter().map(BinaryMask::count).collect()
    }

    fn dims(&self) -> (usize, usize) {
        self.masks[0].dims()
    }
}

/// Foreground counts and the weight given to each mask in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub counts: Vec<u64>,
    pub alphas: Vec<f64>,
}

/// Pixels where `sum(w_i * m_i) > 0.5 * sum(w_i)`.
fn weighted_vote(input: &EnsembleFrameInput, weights: &[f64]) -> BinaryMask {
    let (w, h) = input.dims();
    let total: f64 = weights.iter().sum();
    let mut acc = vec![0.0f64; w * h];
    for (m, &wt) in input.masks.iter().zip(weights) {
        if wt == 0.0 {
            continue;
        }
        for (a, &l) in acc.iter_mut().zip(m.labels()) {
            if l == 1 {
                *a += wt;
            }
        }
    }
    BinaryMask::from_predicate(w, h, |i| acc[i] > 0.5 * total)
}

/// Reliability-weighted fusion. Falls back to the median mask when every
/// weight is zero.
pub fn fuse_frame(input: &EnsembleFrameInput) -> Result<(BinaryMask, FrameReport)> {
    let counts = input.counts();
    let alphas: Vec<f64> = mask_outlier_scales(&counts, TUKEY_K)?
        .into_iter()
        .map(|a| a.value())
        .collect();
    let mask = if alphas.iter().all(|&a| a == 0.0) {
        fuse_median(input)
    } else {
        weighted_vote(input, &alphas)
    };
    Ok((mask, FrameReport { counts, alphas }))
}

/// Majority vote: foreground where strictly more than half the masks agree.
pub fn fuse_mean(input: &EnsembleFrameInput) -> BinaryMask {
    weighted_vote(input, &vec![1.0; input.masks.len()])
}

/// Index of the mask with the (lower) median foreground count; ties go to
/// the earliest mask.
pub fn median_index(counts: &[u64]) -> usize {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&i| (counts[i], i));
    let target = counts[order[(counts.len() - 1) / 2]];
    counts
        .iter()
        .position(|&c| c == target)
        .expect("target is one of the counts")
}

pub fn fuse_median(input: &EnsembleFrameInput) -> BinaryMask {
    input.masks[median_index(&input.counts())].clone()
}

/// Weights used per frame, one row per frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FusionReport {
    pub methods: Vec<String>,
    pub frames: Vec<FrameReport>,
}

impl FusionReport {
    /// `frame,method,count,alpha` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,method,count,alpha\n");
        for (t, f) in self.frames.iter().enumerate() {
            for (i, (c, a)) in f.counts.iter().zip(&f.alphas).enumerate() {
                let name = self.methods.get(i).map(String::as_str).unwrap_or("");
                writeln!(out, "{t},{name},{c},{a:.6}").expect("writing to a String");
            }
        }
        out
    }
}

/// Fuse every frame of a sequence.
pub fn fuse_sequence(
    frames: &[EnsembleFrameInput],
    methods: &[String],
    strategy: FusionStrategy,
) -> Result<(Vec<BinaryMask>, FusionReport)> {
    if frames.is_empty() {
        return Err(Error::input("no frames to fuse"));
    }
    let results: Vec<(BinaryMask, FrameReport)> = frames
        .par_iter()
        .map(|input| match strategy {
            FusionStrategy::Tism => fuse_frame(input),
            FusionStrategy::Mean => Ok((
                fuse_mean(input),
                FrameReport {
                    counts: input.counts(),
                    alphas: vec![1.0; input.masks.len()],
                },
            )),
            FusionStrategy::Median => {
                let counts = input.counts();
                let pick = median_index(&counts);
                let alphas = (0..counts.len()).map(|i| f64::from(u8::from(i == pick))).collect();
                Ok((input.masks[pick].clone(), FrameReport { counts, alphas }))
            }
        })
        .collect::<Result<_>>()?;
    let (masks, reports) = results.into_iter().unzip();
    Ok((
        masks,
        FusionReport {
            methods: methods.to_vec(),
            frames: reports,
        },
    ))
}
