//! Binary netpbm rasters: 8-bit and 16-bit P5 graymaps and 24-bit P6 pixmaps.
//!
//! Writers always emit the canonical header `P5\n<w> <h>\n<maxval>\n`.
//! Readers accept any whitespace (and `#` comments) between header fields,
//! require exactly one whitespace byte before the raster, and reject files
//! whose payload length disagrees with the header.

use crate::{BinaryMask, Error, LabelMap, Result, RgbImage, ScalarField};

/// Mask pixels strictly above this byte value are foreground.
pub const MASK_THRESHOLD: u8 = 127;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_header(bytes: &[u8], magic: &[u8; 2]) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(Error::format(format!(
            "wrong magic: expected {}",
            String::from_utf8_lossy(magic)
        )));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // At least one whitespace byte before every field.
        let start = pos;
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while !matches!(bytes.get(pos), None | Some(b'\n') | Some(b'\r')) {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::format("truncated header")),
            }
        }
        if pos == start {
            return Err(Error::format("malformed header"));
        }
        let digits = bytes[pos..].iter().take_while(|b| b.is_ascii_digit()).count();
        if digits == 0 {
            return Err(Error::format("malformed header: expected a number"));
        }
        // Anything longer than 9 digits overflows every accepted value.
        if digits > 9 {
            return Err(Error::format("header value out of range"));
        }
        *field = std::str::from_utf8(&bytes[pos..pos + digits])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("header value out of range"))?;
        pos += digits;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(Error::format("malformed header")),
        None => return Err(Error::format("truncated header")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::format(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(format!("invalid maxval {maxval}")));
    }
    Ok(Header {
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset: pos,
    })
}

fn payload<'a>(bytes: &'a [u8], h: &Header, bytes_per_pixel: usize) -> Result<&'a [u8]> {
    let expected = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(bytes_per_pixel))
        .ok_or_else(|| Error::format("dimensions overflow"))?;
    let data = &bytes[h.data_offset..];
    if data.len() < expected {
        return Err(Error::format(format!(
            "truncated data: expected {expected} bytes, got {}",
            data.len()
        )));
    }
    if data.len() > expected {
        return Err(Error::format(format!(
            "payload has {} trailing bytes",
            data.len() - expected
        )));
    }
    Ok(data)
}

fn write_header(out: &mut Vec<u8>, magic: &str, width: usize, height: usize, maxval: u32) {
    out.extend_from_slice(format!("{magic}\n{width} {height}\n{maxval}\n").as_bytes());
}

/// An 8-bit graymap as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8 {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    pub data: Vec<u8>,
}

impl Gray8 {
    /// Binarise: bytes above [`MASK_THRESHOLD`] are foreground.
    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask::from_predicate(self.width, self.height, |i| self.data[i] > MASK_THRESHOLD)
    }

    /// Map to `[0, 1]` by dividing by 255.
    pub fn to_saliency(&self) -> ScalarField {
        let values = self.data.iter().map(|&b| f64::from(b) / 255.0).collect();
        ScalarField::new(self.width, self.height, values).expect("graymap shape is valid")
    }

    /// Masks are written as 0 / 255.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            maxval: 255,
            data: mask.labels().iter().map(|&l| l * 255).collect(),
        }
    }

    /// Quantise a `[0, 1]` field to bytes; values outside are clamped.
    pub fn from_saliency(field: &ScalarField) -> Self {
        Self {
            width: field.width(),
            height: field.height(),
            maxval: 255,
            data: field
                .values()
                .iter()
                .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
                .collect(),
        }
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<Gray8> {
    let h = parse_header(bytes, b"P5")?;
    if h.maxval > 255 {
        return Err(Error::format(format!("maxval {} is not an 8-bit graymap", h.maxval)));
    }
    let data = payload(bytes, &h, 1)?;
    if let Some(&b) = data.iter().find(|&&b| u32::from(b) > h.maxval) {
        return Err(Error::format(format!("sample {b} exceeds maxval {}", h.maxval)));
    }
    Ok(Gray8 {
        width: h.width,
        height: h.height,
        maxval: h.maxval as u8,
        data: data.to_vec(),
    })
}

pub fn write_pgm(img: &Gray8) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.data.len() + 16);
    write_header(&mut out, "P5", img.width, img.height, u32::from(img.maxval));
    out.extend_from_slice(&img.data);
    out
}

pub fn read_mask(bytes: &[u8]) -> Result<BinaryMask> {
    read_pgm(bytes).map(|g| g.to_mask())
}

pub fn write_mask(mask: &BinaryMask) -> Vec<u8> {
    write_pgm(&Gray8::from_mask(mask))
}

pub fn read_saliency(bytes: &[u8]) -> Result<ScalarField> {
    read_pgm(bytes).map(|g| g.to_saliency())
}

/// 16-bit big-endian P5 supervoxel labels.
pub fn read_pgm16(bytes: &[u8]) -> Result<LabelMap> {
    let h = parse_header(bytes, b"P5")?;
    if h.maxval < 256 {
        return Err(Error::format(format!("maxval {} is not a 16-bit graymap", h.maxval)));
    }
    let data = payload(bytes, &h, 2)?;
    let mut ids = Vec::with_capacity(h.width * h.height);
    for w in data.chunks_exact(2) {
        let id = u16::from_be_bytes([w[0], w[1]]);
        if u32::from(id) > h.maxval {
            return Err(Error::format(format!("sample {id} exceeds maxval {}", h.maxval)));
        }
        ids.push(u32::from(id));
    }
    LabelMap::new(h.width, h.height, ids)
}

/// Writes maxval 65535. Fails for ids that do not fit in 16 bits.
pub fn write_pgm16(labels: &LabelMap) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(2 * labels.ids().len() + 20);
    write_header(&mut out, "P5", labels.width(), labels.height(), 65535);
    for &id in labels.ids() {
        let id = u16::try_from(id).map_err(|_| Error::input(format!("supervoxel id {id} does not fit in 16 bits")))?;
        out.extend_from_slice(&id.to_be_bytes());
    }
    Ok(out)
}

/// 24-bit P6 pixmap (maxval 255).
pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let h = parse_header(bytes, b"P6")?;
    if h.maxval != 255 {
        return Err(Error::format(format!("maxval {} unsupported, expected 255", h.maxval)));
    }
    let data = payload(bytes, &h, 3)?;
    let pixels = data.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
    RgbImage::new(h.width, h.height, pixels)
}

pub fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(3 * img.pixels().len() + 16);
    write_header(&mut out, "P6", img.width(), img.height(), 255);
    for p in img.pixels() {
        out.extend_from_slice(p);
    }
    out
}
