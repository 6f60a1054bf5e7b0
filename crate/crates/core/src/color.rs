//! sRGB (D65) to CIE L*a*b* conversion and video-wide channel normalisation.

use crate::RgbImage;

/// D65 reference white, Y normalised to 1.
const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

fn linearize(c: u8) -> f64 {
    let c = f64::from(c) / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// One 8-bit sRGB pixel to `[L*, a*, b*]`.
pub fn srgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = rgb.map(linearize);
    let xyz: [f64; 3] = std::array::from_fn(|r| SRGB_TO_XYZ[r].iter().zip(&lin).map(|(m, c)| m * c).sum());
    let [fx, fy, fz] = std::array::from_fn(|i| lab_f(xyz[i] / WHITE[i]));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn rgb_to_lab(img: &RgbImage) -> Vec<[f64; 3]> {
    img.pixels().iter().map(|&p| srgb_to_lab(p)).collect()
}

/// Min-max normalise each channel to `[0, 1]` over every pixel of every
/// frame. A constant channel maps to 0.
pub fn normalize_lab(frames: &[Vec<[f64; 3]>]) -> Vec<Vec<[f64; 3]>> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for px in frames.iter().flatten() {
        for c in 0..3 {
            lo[c] = lo[c].min(px[c]);
            hi[c] = hi[c].max(px[c]);
        }
    }
    frames
        .iter()
        .map(|frame| {
            frame
                .iter()
                .map(|px| {
                    std::array::from_fn(|c| {
                        let range = hi[c] - lo[c];
                        if range > 0.0 {
                            (px[c] - lo[c]) / range
                        } else {
                            0.0
                        }
                    })
                })
                .collect()
        })
        .collect()
}
