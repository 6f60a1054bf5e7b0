//! Supervoxel consensus refinement of foregroundness masks.
//!
//! Every supervoxel votes with the average polarity of its labels
//! (`+1` foreground, `-1` background) across all frames it spans. That local
//! vote, optionally blended with the votes of the supervoxels nearest in
//! mean LAB colour, is added to the per-pixel foregroundness; pixels whose
//! refined value is positive form the new mask, cut down to its two best
//! segments per frame.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::color::{normalize_lab, rgb_to_lab};
use crate::io::FrameSequence;
use crate::raster::same_dims;
use crate::segments::{select_top_segments, Connectivity};
use crate::{BinaryMask, Error, LabelMap, Result, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsensusMode {
    LocalOnly,
    LocalNonLocal,
}

impl std::str::FromStr for ConsensusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(ConsensusMode::LocalOnly),
            "nonlocal" => Ok(ConsensusMode::LocalNonLocal),
            _ => Err(Error::InvalidParameter(format!(
                "unknown consensus mode {s:?}, expected local or nonlocal"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    pub mode: ConsensusMode,
    /// Weight of a supervoxel's own vote.
    pub w0: f64,
    /// Total weight shared by the non-local neighbours.
    pub nonlocal_weight: f64,
    /// Floor on the colour distance before it is squared.
    pub epsilon: f64,
    /// Segments kept per frame after refinement.
    pub segments: usize,
    pub connectivity: Connectivity,
}

impl RefineConfig {
    pub fn local_only() -> Self {
        Self {
            mode: ConsensusMode::LocalOnly,
            w0: 1.0,
            nonlocal_weight: 0.0,
            epsilon: 1e-3,
            segments: 2,
            connectivity: Connectivity::Eight,
        }
    }

    pub fn local_nonlocal() -> Self {
        Self {
            mode: ConsensusMode::LocalNonLocal,
            w0: 1.0 / 3.0,
            nonlocal_weight: 2.0 / 3.0,
            ..Self::local_only()
        }
    }

    pub fn for_mode(mode: ConsensusMode) -> Self {
        match mode {
            ConsensusMode::LocalOnly => Self::local_only(),
            ConsensusMode::LocalNonLocal => Self::local_nonlocal(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w0.is_finite() && self.nonlocal_weight.is_finite()) {
            return Err(Error::InvalidParameter("consensus weights must be finite".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "distance floor must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self::local_nonlocal()
    }
}

/// Accumulated statistics of one supervoxel over the whole video.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervoxelStats {
    pub id: u32,
    pub pixel_count: u64,
    /// Foreground pixels among `pixel_count`.
    pub label_sum: u64,
    /// Mean normalised LAB colour.
    pub mean_lab: [f64; 3],
}

impl SupervoxelStats {
    /// Average label polarity in `[-1, 1]`.
    pub fn local_consensus(&self) -> f64 {
        (2.0 * self.label_sum as f64 - self.pixel_count as f64) / self.pixel_count as f64
    }
}

#[derive(Debug, Default, Clone)]
struct Partial {
    pixels: u64,
    labels: u64,
    lab: [f64; 3],
}

/// One entry per supervoxel id, ordered by id.
pub fn supervoxel_stats(
    labels: &[LabelMap],
    lab: &[Vec<[f64; 3]>],
    masks: &[BinaryMask],
) -> Result<Vec<SupervoxelStats>> {
    if labels.len() != lab.len() || labels.len() != masks.len() {
        return Err(Error::input(format!(
            "frame count mismatch: {} label maps, {} colour frames, {} masks",
            labels.len(),
            lab.len(),
            masks.len()
        )));
    }
    let partials: Vec<BTreeMap<u32, Partial>> = labels
        .par_iter()
        .zip(lab.par_iter())
        .zip(masks.par_iter())
        .map(|((l, c), m)| {
            same_dims(l.dims(), m.dims())?;
            if c.len() != l.ids().len() {
                return Err(Error::input(format!(
                    "colour frame has {} pixels, label map has {}",
                    c.len(),
                    l.ids().len()
                )));
            }
            let mut acc: BTreeMap<u32, Partial> = BTreeMap::new();
            for ((&id, px), &on) in l.ids().iter().zip(c).zip(m.labels()) {
                let p = acc.entry(id).or_default();
                p.pixels += 1;
                p.labels += u64::from(on);
                for (a, v) in p.lab.iter_mut().zip(px) {
                    *a += v;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    // Merge in frame order so floating-point sums do not depend on scheduling.
    let mut total: BTreeMap<u32, Partial> = BTreeMap::new();
    for part in partials {
        for (id, p) in part {
            let t = total.entry(id).or_default();
            t.pixels += p.pixels;
            t.labels += p.labels;
            for k in 0..3 {
                t.lab[k] += p.lab[k];
            }
        }
    }
    Ok(total
        .into_iter()
        .map(|(id, p)| SupervoxelStats {
            id,
            pixel_count: p.pixels,
            label_sum: p.labels,
            mean_lab: p.lab.map(|s| s / p.pixels as f64),
        })
        .collect())
}

/// Local and non-local vote of one supervoxel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consensus {
    pub local: f64,
    pub nonlocal: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConsensusTable {
    entries: BTreeMap<u32, Consensus>,
}

impl ConsensusTable {
    pub fn get(&self, id: u32) -> Option<Consensus> {
        self.entries.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Consensus)> + '_ {
        self.entries.iter().map(|(&id, &c)| (id, c))
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u32, Consensus)>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }
}

/// City-block distance between two colours.
pub fn lab_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Number of colour neighbours consulted: one per hundred supervoxels, rounded up.
pub fn neighbour_count(n_supervoxels: usize) -> usize {
    n_supervoxels.div_ceil(100)
}

pub fn nonlocal_consensus(stats: &[SupervoxelStats], cfg: &RefineConfig) -> Result<ConsensusTable> {
    cfg.validate()?;
    let local: Vec<f64> = stats.iter().map(SupervoxelStats::local_consensus).collect();
    if cfg.mode == ConsensusMode::LocalOnly {
        return Ok(ConsensusTable::from_entries(stats.iter().zip(&local).map(|(s, &l)| {
            (
                s.id,
                Consensus {
                    local: l,
                    nonlocal: 0.0,
                },
            )
        })));
    }
    if stats.len() < 2 {
        return Err(Error::input(format!(
            "non-local consensus needs at least 2 supervoxels, got {}",
            stats.len()
        )));
    }
    let k = neighbour_count(stats.len()).min(stats.len() - 1);
    let entries: Vec<(u32, Consensus)> = stats
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut near: Vec<(f64, u32, usize)> = stats
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, o)| (lab_distance(&s.mean_lab, &o.mean_lab), o.id, j))
                .collect();
            let by_distance = |a: &(f64, u32, usize), b: &(f64, u32, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < near.len() {
                near.select_nth_unstable_by(k - 1, by_distance);
                near.truncate(k);
            }
            near.sort_by(by_distance);
            let raw: Vec<f64> = near.iter().map(|n| 1.0 / n.0.max(cfg.epsilon).powi(2)).collect();
            let total: f64 = raw.iter().sum();
            let nonlocal = near
                .iter()
                .zip(&raw)
                .map(|(n, w)| cfg.nonlocal_weight * w / total * local[n.2])
                .sum();
            (
                s.id,
                Consensus {
                    local: local[i],
                    nonlocal,
                },
            )
        })
        .collect();
    Ok(ConsensusTable::from_entries(entries))
}

/// Scale all frames by the largest value in the video (all zero if that is zero).
pub fn scale_to_unit(f: &[ScalarField]) -> Vec<ScalarField> {
    let max = f.iter().map(ScalarField::max).fold(0.0, f64::max);
    f.iter()
        .map(|frame| {
            if max > 0.0 {
                frame.map(|v| v / max).expect("finite")
            } else {
                ScalarField::zeros(frame.width(), frame.height())
            }
        })
        .collect()
}

/// `f + w0 * local + nonlocal` per pixel, with `f` scaled to `[0, 1]`.
pub fn refined_foregroundness(
    f: &[ScalarField],
    consensus: &ConsensusTable,
    labels: &[LabelMap],
    cfg: &RefineConfig,
) -> Result<Vec<ScalarField>> {
    if f.len() != labels.len() {
        return Err(Error::input(format!(
            "{} foregroundness frames but {} label maps",
            f.len(),
            labels.len()
        )));
    }
    scale_to_unit(f)
        .par_iter()
        .zip(labels.par_iter())
        .enumerate()
        .map(|(t, (frame, lm))| {
            same_dims(frame.dims(), lm.dims())?;
            let values = frame
                .values()
                .iter()
                .zip(lm.ids())
                .map(|(&v, &id)| {
                    let c = consensus.get(id).ok_or_else(|| {
                        Error::input(format!("frame {t}: supervoxel {id} missing from consensus table"))
                    })?;
                    Ok(v + cfg.w0 * c.local + c.nonlocal)
                })
                .collect::<Result<Vec<f64>>>()?;
            ScalarField::new(frame.width(), frame.height(), values)
        })
        .collect()
}

/// Positive refined foregroundness, limited to the best segments per frame.
pub fn refine_masks(
    f: &[ScalarField],
    consensus: &ConsensusTable,
    labels: &[LabelMap],
    cfg: &RefineConfig,
) -> Result<Vec<BinaryMask>> {
    refined_foregroundness(f, consensus, labels, cfg)?
        .par_iter()
        .map(|fp| {
            let values = fp.values();
            let raw = BinaryMask::from_predicate(fp.width(), fp.height(), |i| values[i] > 0.0);
            select_top_segments(&raw, fp, cfg.segments, cfg.connectivity)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RefineOutput {
    pub stats: Vec<SupervoxelStats>,
    pub consensus: ConsensusTable,
    pub masks: Vec<BinaryMask>,
}

/// Second pass over a video: consensus from `masks`, refinement of `f`.
///
/// The sequence must carry RGB frames and supervoxel labels for every frame.
pub fn refine_sequence(
    seq: &FrameSequence,
    f: &[ScalarField],
    masks: &[BinaryMask],
    cfg: &RefineConfig,
) -> Result<RefineOutput> {
    let mut labels = Vec::with_capacity(seq.len());
    let mut lab = Vec::with_capacity(seq.len());
    for (i, frame) in seq.frames.iter().enumerate() {
        labels.push(
            frame
                .labels
                .clone()
                .ok_or_else(|| Error::input(format!("frame {i} has no supervoxel labels")))?,
        );
        let rgb = frame
            .rgb
            .as_ref()
            .ok_or_else(|| Error::input(format!("frame {i} has no RGB image")))?;
        lab.push(rgb_to_lab(rgb));
    }
    let lab = normalize_lab(&lab);
    let stats = supervoxel_stats(&labels, &lab, masks)?;
    let consensus = nonlocal_consensus(&stats, cfg)?;
    let masks = refine_masks(f, &consensus, &labels, cfg)?;
    Ok(RefineOutput {
        stats,
        consensus,
        masks,
    })
}
