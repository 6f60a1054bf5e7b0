//! Connected segments of a binary mask and top-scoring segment selection.

use std::cmp::Ordering;

use crate::raster::same_dims;
use crate::{BinaryMask, Error, Result, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(Error::InvalidParameter(format!("connectivity must be 4 or 8, got {n}"))),
        }
    }
}

/// One connected segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Pixel indices in raster order.
    pub pixels: Vec<usize>,
    pub score: f64,
}

impl Segment {
    /// Index of the first pixel in raster order.
    pub fn anchor(&self) -> usize {
        self.pixels[0]
    }
}

/// Per-pixel component ids (0 = background, components numbered from 1 in
/// raster order of their first pixel) and the component count.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> (Vec<u32>, u32) {
    let (w, h) = mask.dims();
    let on = mask.labels();
    let mut ids = vec![0u32; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if on[start] == 0 || ids[start] != 0 {
            continue;
        }
        next += 1;
        ids[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if (dx == 0 && dy == 0) || (connectivity == Connectivity::Four && dx != 0 && dy != 0) {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if on[j] == 1 && ids[j] == 0 {
                        ids[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
    }
    (ids, next)
}

/// Segments of `mask` scored by the sum of `score` over their pixels.
pub fn segments(mask: &BinaryMask, score: &ScalarField, connectivity: Connectivity) -> Result<Vec<Segment>> {
    same_dims(mask.dims(), score.dims())?;
    let (ids, n) = label_components(mask, connectivity);
    let mut out = vec![
        Segment {
            pixels: Vec::new(),
            score: 0.0
        };
        n as usize
    ];
    for (i, &id) in ids.iter().enumerate() {
        if id > 0 {
            let s = &mut out[id as usize - 1];
            s.pixels.push(i);
            s.score += score.values()[i];
        }
    }
    Ok(out)
}

/// Ranking: larger score, then more pixels, then earlier first pixel.
fn rank(a: &Segment, b: &Segment) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.pixels.len().cmp(&a.pixels.len()))
        .then(a.anchor().cmp(&b.anchor()))
}

/// Keep only the `n` segments with the greatest score sum.
pub fn select_top_segments(
    mask: &BinaryMask,
    score: &ScalarField,
    n: usize,
    connectivity: Connectivity,
) -> Result<BinaryMask> {
    let mut segs = segments(mask, score, connectivity)?;
    segs.sort_by(rank);
    let (w, h) = mask.dims();
    let mut out = BinaryMask::empty(w, h);
    for s in segs.iter().take(n) {
        for &i in &s.pixels {
            out.set(i % w, i / w, true);
        }
    }
    Ok(out)
}
