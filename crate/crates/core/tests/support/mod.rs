//! Independent reference computations and fixtures for the integration and
//! acceptance tests. Nothing here calls into the library's algorithms; only
//! the raster types are shared.

#![allow(dead_code, clippy::type_complexity)]

use tis_core::{BinaryMask, FlowField, LabelMap, ScalarField};

/// Quartiles times four, computed exactly in integers for integer samples.
///
/// Position `(n-1)*m/4` for m = 1, 2, 3; `4*Q = 4*x[lo] + rem*(x[lo+1]-x[lo])`.
pub fn quartiles_x4(sample: &[i64]) -> [i64; 3] {
    let mut s = sample.to_vec();
    // Insertion sort keeps the oracle free of library sorting helpers.
    for i in 1..s.len() {
        let mut j = i;
        while j > 0 && s[j - 1] > s[j] {
            s.swap(j - 1, j);
            j -= 1;
        }
    }
    let n = s.len() as i64;
    [1, 2, 3].map(|m| {
        let j = (n - 1) * m;
        let lo = (j / 4) as usize;
        let rem = j % 4;
        let next = if rem > 0 { s[lo + 1] } else { s[lo] };
        4 * s[lo] + rem * (next - s[lo])
    })
}

/// Plain floating-point quartiles by the same interpolation rule.
pub fn quartiles_f64(sample: &[f64]) -> (f64, f64, f64) {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| {
        let h = (s.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        if lo + 1 < s.len() {
            s[lo] + (h - lo as f64) * (s[lo + 1] - s[lo])
        } else {
            s[lo]
        }
    };
    (q(0.25), q(0.5), q(0.75))
}

pub fn fences_f64(q: (f64, f64, f64), k: f64) -> (f64, f64) {
    (q.0 - k * (q.2 - q.0), q.2 + k * (q.2 - q.0))
}

/// Every multiset of `len` values drawn from `0..=max`, as sorted vectors.
pub fn multisets(len: usize, max: i64, mut visit: impl FnMut(&[i64])) {
    fn rec(cur: &mut Vec<i64>, len: usize, lo: i64, max: i64, visit: &mut dyn FnMut(&[i64])) {
        if cur.len() == len {
            visit(cur);
            return;
        }
        for v in lo..=max {
            cur.push(v);
            rec(cur, len, v, max, visit);
            cur.pop();
        }
    }
    rec(&mut Vec::with_capacity(len), len, 0, max, &mut visit);
}

/// Per-mask weights straight from the piecewise formula.
pub fn mask_alphas(counts: &[u64]) -> Vec<f64> {
    let c: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    let q = quartiles_f64(&c);
    let (o1, o3) = fences_f64(q, 1.5);
    c.iter()
        .map(|&n| {
            if n == q.1 {
                1.0
            } else if n < q.1 {
                if q.1 == o1 {
                    0.0
                } else {
                    ((n - o1) / (q.1 - o1)).max(0.0)
                }
            } else if q.1 == o3 {
                0.0
            } else {
                ((n - o3) / (q.1 - o3)).max(0.0)
            }
        })
        .collect()
}

/// Weighted-average fusion thresholded at one half.
pub fn fuse_oracle(masks: &[BinaryMask]) -> BinaryMask {
    let counts: Vec<u64> = masks
        .iter()
        .map(|m| m.labels().iter().map(|&l| l as u64).sum())
        .collect();
    let a = mask_alphas(&counts);
    let total: f64 = a.iter().sum();
    let (w, h) = masks[0].dims();
    BinaryMask::from_fn(w, h, |x, y| {
        let f: f64 = masks
            .iter()
            .zip(&a)
            .map(|(m, &al)| if m.get(x, y) { al } else { 0.0 })
            .sum::<f64>()
            / total;
        f > 0.5
    })
    .unwrap()
}

/// Connected components by repeated label propagation (8-connected).
pub fn components(mask: &BinaryMask) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = mask.dims();
    let mut label: Vec<Option<usize>> = (0..w * h).map(|i| (mask.labels()[i] == 1).then_some(i)).collect();
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let Some(mut l) = label[y * w + x] else { continue };
                for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        if let Some(o) = label[ny * w + nx] {
                            l = l.min(o);
                        }
                    }
                }
                if Some(l) != label[y * w + x] {
                    label[y * w + x] = Some(l);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut roots: Vec<usize> = label.iter().flatten().copied().collect();
    roots.sort();
    roots.dedup();
    roots
        .iter()
        .map(|&r| {
            (0..w * h)
                .filter(|&i| label[i] == Some(r))
                .map(|i| (i % w, i / w))
                .collect()
        })
        .collect()
}

/// Keep the `n` components with the largest score sums (ties: size, then
/// first pixel).
pub fn top_components(mask: &BinaryMask, score: &[f64], n: usize) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut comps: Vec<(f64, usize, usize, Vec<(usize, usize)>)> = components(mask)
        .into_iter()
        .map(|c| {
            let s = c.iter().map(|&(x, y)| score[y * w + x]).sum();
            let first = c.iter().map(|&(x, y)| y * w + x).min().unwrap();
            (s, c.len(), first, c)
        })
        .collect();
    comps.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    let mut out = BinaryMask::empty(w, h);
    for c in comps.iter().take(n) {
        for &(x, y) in &c.3 {
            out.set(x, y, true);
        }
    }
    out
}

/// Step-by-step single-object segmentation of a flow/saliency sequence.
pub fn tis0_oracle(flows: &[FlowField], saliency: &[ScalarField]) -> Vec<BinaryMask> {
    let mut out: Vec<BinaryMask> = Vec::new();
    for (flow, sal) in flows.iter().zip(saliency) {
        let (w, h) = flow.dims();
        let n = w * h;
        let mut comps: Vec<Vec<f64>> = vec![Vec::new(); 4];
        for p in 0..n {
            let (u, v) = (flow.u()[p] as f64, flow.v()[p] as f64);
            comps[0].push(u);
            comps[1].push(v);
            comps[2].push((u * u + v * v).sqrt());
            let mut a = if u == 0.0 && v == 0.0 { 0.0 } else { v.atan2(u) };
            if a <= -std::f64::consts::PI {
                a = std::f64::consts::PI;
            }
            comps[3].push(a);
        }
        let mut f = vec![0.0; n];
        let mut med = [0.0; 4];
        let mut alpha = [0.0; 4];
        for (i, c) in comps.iter().enumerate() {
            let q = quartiles_f64(c);
            let (o1, o3) = fences_f64(q, 1.5);
            let outlier = |d: f64| d < o1 || d > o3;
            let num: f64 = c.iter().filter(|&&d| outlier(d)).map(|d| d.abs()).sum();
            let den: f64 = c.iter().map(|d| d.abs()).sum();
            let a = if den == 0.0 { 0.0 } else { num / den };
            med[i] = q.1;
            alpha[i] = a;
            if a >= 0.5 {
                for p in 0..n {
                    if outlier(c[p]) {
                        f[p] += a * (c[p] - q.1).abs();
                    }
                }
            }
        }
        for k in [1.0, 0.5, 1.0 / 3.0] {
            for p in 0..n {
                let dev: f64 = (0..4).map(|i| alpha[i].max(0.5) * (comps[i][p] - med[i]).abs()).sum();
                f[p] += sal.values()[p].powf(k) * dev;
            }
        }
        let mean = f.iter().sum::<f64>() / n as f64;
        let sd = (f.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
        let beta = mean + sd;
        let raw = BinaryMask::from_fn(w, h, |x, y| {
            let p = y * w + x;
            let delta = match out.last() {
                Some(prev) if prev.get(x, y) => 0.5,
                _ => 1.0,
            };
            f[p] > beta * delta
        })
        .unwrap();
        out.push(top_components(&raw, &f, 1));
    }
    out
}

/// Background moving at (1, 0), a `side`x`side` block at `(x0, y0)` moving at (8, 0).
pub fn moving_block(w: usize, h: usize, x0: usize, y0: usize, side: usize) -> (FlowField, BinaryMask) {
    let mut flow = FlowField::uniform(w, h, 1.0, 0.0).unwrap();
    let block = BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x0 + side && y >= y0 && y < y0 + side).unwrap();
    for y in y0..y0 + side {
        for x in x0..x0 + side {
            flow.set(x, y, 8.0, 0.0);
        }
    }
    (flow, block)
}

/// Brute-force refinement of a single-frame video.
///
/// Returns the refined foregroundness before segment selection.
pub fn refine_oracle(f: &[f64], labels: &[u32], mask: &[u8], lab: &[[f64; 3]], w0: f64, nonlocal: bool) -> Vec<f64> {
    let mut ids: Vec<u32> = labels.to_vec();
    ids.sort();
    ids.dedup();
    let local = |id: u32| {
        let px: Vec<usize> = (0..labels.len()).filter(|&p| labels[p] == id).collect();
        px.iter().map(|&p| 2.0 * mask[p] as f64 - 1.0).sum::<f64>() / px.len() as f64
    };
    let mean_lab = |id: u32| {
        let px: Vec<usize> = (0..labels.len()).filter(|&p| labels[p] == id).collect();
        let mut m = [0.0; 3];
        for &p in &px {
            for c in 0..3 {
                m[c] += lab[p][c];
            }
        }
        m.map(|s| s / px.len() as f64)
    };
    let fnl = |id: u32| -> f64 {
        if !nonlocal {
            return 0.0;
        }
        let k = ids.len().div_ceil(100);
        let me = mean_lab(id);
        let mut others: Vec<(f64, u32)> = ids
            .iter()
            .filter(|&&o| o != id)
            .map(|&o| {
                let ol = mean_lab(o);
                ((0..3).map(|c| (me[c] - ol[c]).abs()).sum(), o)
            })
            .collect();
        others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let near = &others[..k];
        let raw: Vec<f64> = near.iter().map(|(r, _)| 1.0 / r.max(1e-3).powi(2)).collect();
        let total: f64 = raw.iter().sum();
        near.iter()
            .zip(&raw)
            .map(|((_, o), w)| (2.0 / 3.0) * w / total * local(*o))
            .sum()
    };
    let fmax = f.iter().cloned().fold(0.0, f64::max);
    (0..f.len())
        .map(|p| {
            let scaled = if fmax > 0.0 { f[p] / fmax } else { 0.0 };
            scaled + w0 * local(labels[p]) + fnl(labels[p])
        })
        .collect()
}

/// 8 masks around a 6x6 square in a 20x20 frame (counts 34..38, minority
/// edits only) plus one all-foreground mask.
pub fn nine_mask_fixture() -> Vec<BinaryMask> {
    let core = |x: usize, y: usize| (7..13).contains(&x) && (7..13).contains(&y);
    // (pixels removed from the square, pixels added outside it)
    let edits: [(&[(usize, usize)], &[(usize, usize)]); 8] = [
        (&[(7, 7), (12, 12)], &[]),
        (&[(12, 7)], &[]),
        (&[], &[]),
        (&[], &[]),
        (&[(7, 12)], &[(6, 9)]),
        (&[], &[(13, 9)]),
        (&[], &[(9, 6)]),
        (&[], &[(9, 13), (10, 13)]),
    ];
    let mut masks: Vec<BinaryMask> = edits
        .iter()
        .map(|(rm, add)| {
            BinaryMask::from_fn(20, 20, |x, y| {
                (core(x, y) && !rm.contains(&(x, y))) || add.contains(&(x, y))
            })
            .unwrap()
        })
        .collect();
    masks.push(BinaryMask::full(20, 20));
    masks
}

/// Small deterministic RNG for fixture generation (xorshift64*).
pub struct Rng(pub u64);

impl Rng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn mask(&mut self, w: usize, h: usize, density: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| self.unit() < density).unwrap()
    }
}

pub fn label_map(w: usize, h: usize, ids: &[u32]) -> LabelMap {
    LabelMap::new(w, h, ids.to_vec()).unwrap()
}

/// 3x3 single-frame refinement fixture.
///
/// Supervoxels:      mask:      foregroundness:
///   0 0 1           1 1 0       0 2 4
///   0 2 1           1 0 0       1 3 0
///   3 3 1           0 1 0       4 2 1
pub struct RefineFixture {
    pub labels: Vec<u32>,
    pub mask: Vec<u8>,
    pub f: Vec<f64>,
    pub lab: Vec<[f64; 3]>,
}

pub fn refine_fixture() -> RefineFixture {
    let labels = vec![0, 0, 1, 0, 2, 1, 3, 3, 1];
    let colour = |id: u32| match id {
        0 => [0.0, 0.0, 0.0],
        1 => [1.0, 1.0, 1.0],
        2 => [0.1, 0.0, 0.0],
        _ => [0.3, 0.2, 0.0],
    };
    RefineFixture {
        lab: labels.iter().map(|&id| colour(id)).collect(),
        labels,
        mask: vec![1, 1, 0, 1, 0, 0, 0, 1, 0],
        f: vec![0.0, 2.0, 4.0, 1.0, 3.0, 0.0, 4.0, 2.0, 1.0],
    }
}
