//! Middlebury `.flo` optical-flow files.
//!
//! Layout (little-endian): `f32` tag 202021.25 ("PIEH"), `i32` width,
//! `i32` height, then `height * width` interleaved `(u, v)` `f32` pairs.

use crate::{Error, FlowField, Result};

pub const FLO_TAG: f32 = 202021.25;
const HEADER_LEN: usize = 12;

fn le_i32(b: &[u8]) -> i32 {
    i32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

fn le_f32(b: &[u8]) -> f32 {
    f32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

pub fn read_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < 4 || le_f32(&bytes[..4]).to_bits() != FLO_TAG.to_bits() {
        return Err(Error::format("not a flo file"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::format("truncated flow"));
    }
    let width = le_i32(&bytes[4..8]);
    let height = le_i32(&bytes[8..12]);
    if width <= 0 || height <= 0 {
        return Err(Error::format(format!(
            "flow dimensions must be positive, got {width}x{height}"
        )));
    }
    let (width, height) = (width as usize, height as usize);
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::format("flow dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < expected {
        return Err(Error::format("truncated flow"));
    }
    if payload.len() > expected {
        return Err(Error::format(format!(
            "flow payload has {} trailing bytes",
            payload.len() - expected
        )));
    }
    let n = width * height;
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for pair in payload.chunks_exact(8) {
        u.push(le_f32(&pair[..4]));
        v.push(le_f32(&pair[4..]));
    }
    FlowField::new(width, height, u, v)
}

pub fn write_flo(flow: &FlowField) -> Vec<u8> {
    let n = flow.width() * flow.height();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n);
    out.extend_from_slice(&FLO_TAG.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for (u, v) in flow.u().iter().zip(flow.v()) {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}
