//! Foreground discovery from optical flow and visual saliency.
//!
//! Each frame's flow is split into four measures (x, y, magnitude, angle).
//! Tukey fences over each measure give an outlier set and an outlierness
//! scale; outlying deviations from the frame median become motion saliency,
//! and saliency-weighted deviations of all pixels become visual saliency.
//! The seven maps sum to a per-pixel foregroundness which is thresholded at
//! mean + standard deviation, with the threshold halved wherever the
//! previous frame's mask was set, and reduced to its best single segment.

use rayon::prelude::*;

use crate::raster::same_dims;
use crate::segments::{select_top_segments, Connectivity};
use crate::tukey::{self, OutlierFences, OutlierScale, Quartiles, TUKEY_K};
use crate::{BinaryMask, Error, FlowField, Result, ScalarField};

pub const COMPONENT_NAMES: [&str; 4] = ["x", "y", "magnitude", "angle"];

#[derive(Debug, Clone, PartialEq)]
pub struct Tis0Config {
    pub k_fences: f64,
    /// Exponents applied to the visual saliency map, one visual measure each.
    pub vs_exponents: Vec<f64>,
    /// Flow measures whose outlierness is below this contribute no motion saliency.
    pub min_flow_scale: f64,
    /// Lower bound on the per-measure weight inside visual saliency.
    pub vs_scale_floor: f64,
    pub connectivity: Connectivity,
}

impl Default for Tis0Config {
    fn default() -> Self {
        Self {
            k_fences: TUKEY_K,
            vs_exponents: vec![1.0, 1.0 / 2.0, 1.0 / 3.0],
            min_flow_scale: 0.5,
            vs_scale_floor: 0.5,
            connectivity: Connectivity::Eight,
        }
    }
}

impl Tis0Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.k_fences.is_finite() || self.k_fences < 0.0 {
            return bad(format!("k_fences must be finite and >= 0, got {}", self.k_fences));
        }
        if let Some(e) = self.vs_exponents.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return bad(format!("saliency exponents must be positive, got {e}"));
        }
        if !(0.0..=1.0).contains(&self.min_flow_scale) {
            return bad(format!(
                "min_flow_scale must lie in [0, 1], got {}",
                self.min_flow_scale
            ));
        }
        if !(0.0..=1.0).contains(&self.vs_scale_floor) {
            return bad(format!(
                "vs_scale_floor must lie in [0, 1], got {}",
                self.vs_scale_floor
            ));
        }
        Ok(())
    }
}

/// The four scalar views of one flow field.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMeasures {
    pub x: ScalarField,
    pub y: ScalarField,
    /// Euclidean norm of the flow vector.
    pub magnitude: ScalarField,
    /// `atan2(y, x)` in `(-pi, pi]`; 0 for the zero vector.
    pub angle: ScalarField,
}

impl FlowMeasures {
    pub fn components(&self) -> [&ScalarField; 4] {
        [&self.x, &self.y, &self.magnitude, &self.angle]
    }
}

pub fn flow_measures(flow: &FlowField) -> FlowMeasures {
    let (w, h) = flow.dims();
    let n = w * h;
    let (mut x, mut y, mut mag, mut ang) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for (&u, &v) in flow.u().iter().zip(flow.v()) {
        let (u, v) = (f64::from(u), f64::from(v));
        x.push(u);
        y.push(v);
        mag.push(u.hypot(v));
        let a = v.atan2(u);
        ang.push(if a == -std::f64::consts::PI {
            std::f64::consts::PI
        } else {
            a
        });
    }
    let field = |v| ScalarField::new(w, h, v).expect("finite flow gives finite measures");
    FlowMeasures {
        x: field(x),
        y: field(y),
        magnitude: field(mag),
        angle: field(ang),
    }
}

/// Fences and outlierness of one measure in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentStats {
    pub quartiles: Quartiles,
    pub fences: OutlierFences,
    pub alpha: OutlierScale,
}

pub fn component_stats(component: &ScalarField, k: f64) -> Result<ComponentStats> {
    let quartiles = tukey::quartiles(component.values())?;
    let fences = quartiles.fences(k)?;
    let alpha = tukey::outlier_scale_of(component.values(), |i| fences.is_outlier(component.values()[i]));
    Ok(ComponentStats {
        quartiles,
        fences,
        alpha,
    })
}

/// `alpha * |d - median|` at outlier pixels, zero elsewhere or when the
/// measure's outlierness is below `min_scale`.
pub fn motion_saliency(component: &ScalarField, stats: &ComponentStats, min_scale: f64) -> ScalarField {
    let alpha = stats.alpha.value();
    if alpha < min_scale {
        return ScalarField::zeros(component.width(), component.height());
    }
    component
        .map(|d| {
            if stats.fences.is_outlier(d) {
                alpha * (d - stats.quartiles.q2).abs()
            } else {
                0.0
            }
        })
        .expect("finite input gives finite saliency")
}

/// Saliency-scaled sum of all four measures' deviations from their medians.
///
/// No outlier gating is applied; each measure is weighted by its
/// outlierness, floored at `floor`.
pub fn visual_saliency(
    saliency: &ScalarField,
    measures: &FlowMeasures,
    stats: &[ComponentStats; 4],
    exponent: f64,
    floor: f64,
) -> Result<ScalarField> {
    same_dims(measures.x.dims(), saliency.dims())?;
    let comps = measures.components();
    let weights: [f64; 4] = std::array::from_fn(|i| stats[i].alpha.value().max(floor));
    let values = saliency
        .values()
        .iter()
        .enumerate()
        .map(|(p, &s)| {
            let dev: f64 = (0..4)
                .map(|i| weights[i] * (comps[i].values()[p] - stats[i].quartiles.q2).abs())
                .sum();
            s.powf(exponent) * dev
        })
        .collect();
    ScalarField::new(saliency.width(), saliency.height(), values)
}

/// Pointwise sum.
pub fn foregroundness(measures: &[ScalarField]) -> Result<ScalarField> {
    let first = measures
        .first()
        .ok_or_else(|| Error::input("foregroundness needs at least one measure"))?;
    let mut acc = first.values().to_vec();
    for m in &measures[1..] {
        same_dims(first.dims(), m.dims())?;
        for (a, v) in acc.iter_mut().zip(m.values()) {
            *a += v;
        }
    }
    ScalarField::new(first.width(), first.height(), acc)
}

/// Mean plus population standard deviation.
pub fn frame_threshold(f: &ScalarField) -> f64 {
    let n = f.values().len() as f64;
    let mean = f.values().iter().sum::<f64>() / n;
    let var = f.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    mean + var.sqrt()
}

/// Label pixels whose foregroundness exceeds the frame threshold, halved
/// where the previous mask was set.
pub fn threshold_mask(f: &ScalarField, previous: Option<&BinaryMask>) -> Result<BinaryMask> {
    if let Some(prev) = previous {
        same_dims(f.dims(), prev.dims())?;
    }
    let beta = frame_threshold(f);
    let values = f.values();
    Ok(BinaryMask::from_predicate(f.width(), f.height(), |i| {
        let discount = match previous {
            Some(prev) if prev.labels()[i] == 1 => 0.5,
            _ => 1.0,
        };
        values[i] > beta * discount
    }))
}

/// Per-frame quantities that do not depend on other frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnalysis {
    pub stats: [ComponentStats; 4],
    pub foregroundness: ScalarField,
}

pub fn analyze_frame(flow: &FlowField, saliency: &ScalarField, cfg: &Tis0Config) -> Result<FrameAnalysis> {
    same_dims(flow.dims(), saliency.dims())?;
    let measures = flow_measures(flow);
    let comps = measures.components();
    let stats = [
        component_stats(comps[0], cfg.k_fences)?,
        component_stats(comps[1], cfg.k_fences)?,
        component_stats(comps[2], cfg.k_fences)?,
        component_stats(comps[3], cfg.k_fences)?,
    ];
    let mut parts = Vec::with_capacity(4 + cfg.vs_exponents.len());
    for (c, s) in comps.iter().zip(&stats) {
        parts.push(motion_saliency(c, s, cfg.min_flow_scale));
    }
    for &e in &cfg.vs_exponents {
        parts.push(visual_saliency(saliency, &measures, &stats, e, cfg.vs_scale_floor)?);
    }
    Ok(FrameAnalysis {
        stats,
        foregroundness: foregroundness(&parts)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tis0Frame {
    pub analysis: FrameAnalysis,
    /// Thresholded mask before segment selection.
    pub raw_mask: BinaryMask,
    /// Final single-segment mask.
    pub mask: BinaryMask,
}

/// Run the segmenter over a whole sequence.
///
/// Frame analysis runs in parallel on the current rayon pool; thresholding
/// is a sequential fold because each frame reads the previous output mask.
pub fn run_tis0(seq: &crate::io::FrameSequence, cfg: &Tis0Config) -> Result<Vec<Tis0Frame>> {
    cfg.validate()?;
    if seq.is_empty() {
        return Err(Error::input("sequence has no frames"));
    }
    let analyses: Vec<FrameAnalysis> = seq
        .frames
        .par_iter()
        .enumerate()
        .map(|(i, frame)| {
            let flow = frame
                .flow
                .as_ref()
                .ok_or_else(|| Error::input(format!("frame {i} has no flow")))?;
            let sal = frame
                .saliency
                .as_ref()
                .ok_or_else(|| Error::input(format!("frame {i} has no saliency")))?;
            analyze_frame(flow, sal, cfg)
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<Tis0Frame> = Vec::with_capacity(analyses.len());
    for analysis in analyses {
        let previous = out.last().map(|f| &f.mask);
        let raw_mask = threshold_mask(&analysis.foregroundness, previous)?;
        let mask = select_top_segments(&raw_mask, &analysis.foregroundness, 1, cfg.connectivity)?;
        out.push(Tis0Frame {
            analysis,
            raw_mask,
            mask,
        });
    }
    Ok(out)
}
