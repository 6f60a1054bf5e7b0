//! Robust-statistics kernel: quartiles, Tukey fences and outlierness scales.
//!
//! Quartiles use linear interpolation between order statistics at the
//! zero-based position `(n - 1) * q` (Hyndman & Fan type 7).

use crate::raster::same_dims;
use crate::{BinaryMask, Error, Result, ScalarField};

/// Tukey's fence multiplier for "outliers".
pub const TUKEY_K: f64 = 1.5;

/// Lower quartile, median and upper quartile of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    /// Outlier thresholds `q1 - k*iqr` and `q3 + k*iqr`.
    pub fn fences(&self, k: f64) -> Result<OutlierFences> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "fence multiplier must be finite and non-negative, got {k}"
            )));
        }
        let iqr = self.iqr();
        Ok(OutlierFences {
            o1: self.q1 - k * iqr,
            o3: self.q3 + k * iqr,
            k,
        })
    }
}

/// Lower and upper outlier thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierFences {
    pub o1: f64,
    pub o3: f64,
    pub k: f64,
}

impl OutlierFences {
    /// Strictly outside the fences.
    #[inline]
    pub fn is_outlier(&self, value: f64) -> bool {
        value < self.o1 || value > self.o3
    }
}

/// Dimensionless outlierness in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct OutlierScale(f64);

impl OutlierScale {
    pub const ZERO: OutlierScale = OutlierScale(0.0);
    pub const ONE: OutlierScale = OutlierScale(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidParameter(format!(
                "outlier scale must lie in [0, 1], got {alpha}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Type-7 quantile of an already sorted, non-empty slice.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    match sorted.get(lo + 1) {
        Some(&hi) if frac > 0.0 => sorted[lo] + frac * (hi - sorted[lo]),
        _ => sorted[lo],
    }
}

/// Quartiles of a sample in any order.
pub fn quartiles(sample: &[f64]) -> Result<Quartiles> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(Quartiles {
        q1: sorted_quantile(&sorted, 0.25),
        q2: sorted_quantile(&sorted, 0.5),
        q3: sorted_quantile(&sorted, 0.75),
    })
}

/// Convenience: quartiles and fences in one step.
pub fn fences(q: &Quartiles, k: f64) -> Result<OutlierFences> {
    q.fences(k)
}

/// Indicator of the pixels lying strictly outside the fences.
pub fn outlier_set(data: &ScalarField, fences: &OutlierFences) -> BinaryMask {
    let values = data.values();
    BinaryMask::from_predicate(data.width(), data.height(), |i| fences.is_outlier(values[i]))
}

/// Share of the total absolute magnitude carried by the outlier pixels.
///
/// Zero when the outlier set is empty or the data is identically zero.
pub fn outlier_scale(data: &ScalarField, outliers: &BinaryMask) -> Result<OutlierScale> {
    same_dims(data.dims(), outliers.dims())?;
    Ok(outlier_scale_of(data.values(), |i| outliers.labels()[i] == 1))
}

pub(crate) fn outlier_scale_of(values: &[f64], is_outlier: impl Fn(usize) -> bool) -> OutlierScale {
    // Accumulate the two halves separately so that out / (out + rest) can
    // never exceed one through rounding.
    let (mut out, mut rest) = (0.0f64, 0.0f64);
    for (i, v) in values.iter().enumerate() {
        if is_outlier(i) {
            out += v.abs();
        } else {
            rest += v.abs();
        }
    }
    let total = out + rest;
    if out == 0.0 || total == 0.0 {
        OutlierScale::ZERO
    } else {
        OutlierScale((out / total).min(1.0))
    }
}

/// Per-mask reliability from the foreground-pixel counts of a mask set.
///
/// Counts at the median score one, counts outside the fences score zero and
/// the score falls linearly in between.
pub fn mask_outlier_scales(counts: &[u64], k: f64) -> Result<Vec<OutlierScale>> {
    let sample: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    let q = quartiles(&sample)?;
    let f = q.fences(k)?;
    Ok(sample.iter().map(|&n| OutlierScale(mask_alpha(n, &q, &f))).collect())
}

fn mask_alpha(n: f64, q: &Quartiles, f: &OutlierFences) -> f64 {
    if n == q.q2 {
        return 1.0;
    }
    let (num, den) = if n < q.q2 {
        (n - f.o1, q.q2 - f.o1)
    } else {
        (n - f.o3, q.q2 - f.o3)
    };
    // den == 0 only when the fence sits on the median; any other count is
    // then past the fence.
    if den == 0.0 {
        return 0.0;
    }
    (num / den).clamp(0.0, 1.0)
}
