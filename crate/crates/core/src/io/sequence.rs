//! On-disk layout of one video:
//!
//! ```text
//! <video>/frames/%05d.ppm
//! <video>/flow/%05d.flo          flow i maps frame i to frame i+1
//! <video>/saliency/%05d.pgm
//! <video>/svx/%05d.pgm16
//! <video>/masks/<method>/%05d.pgm
//! ```
//!
//! Every directory is optional, but those present must agree on the frame
//! count and on the raster size. The flow directory may hold one file fewer
//! than there are frames; the last frame then reuses the final flow file.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{flo, pnm};
use crate::{BinaryMask, Error, FlowField, LabelMap, Result, RgbImage, ScalarField};

pub const FRAMES_DIR: &str = "frames";
pub const FLOW_DIR: &str = "flow";
pub const SALIENCY_DIR: &str = "saliency";
pub const SVX_DIR: &str = "svx";
pub const MASKS_DIR: &str = "masks";

/// File name for frame `index` with the given extension, e.g. `00007.pgm`.
pub fn frame_file_name(index: usize, ext: &str) -> String {
    format!("{index:05}.{ext}")
}

#[derive(Debug, Clone, Default)]
pub struct Frame {
    pub rgb: Option<RgbImage>,
    pub flow: Option<FlowField>,
    pub saliency: Option<ScalarField>,
    pub labels: Option<LabelMap>,
    /// One mask per entry of [`FrameSequence::methods`].
    pub masks: Vec<BinaryMask>,
}

#[derive(Debug, Clone)]
pub struct FrameSequence {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub methods: Vec<String>,
    pub frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// All masks of one method, in frame order.
    pub fn method_masks(&self, method: usize) -> Vec<BinaryMask> {
        self.frames.iter().map(|f| f.masks[method].clone()).collect()
    }
}

/// Sorted indexed files of `dir` with extension `ext`; `None` if `dir` is absent.
///
/// Indices must run 0, 1, 2, ... without gaps. Unrelated files are ignored.
pub fn list_indexed(dir: &Path, ext: &str) -> Result<Option<Vec<PathBuf>>> {
    if !dir.is_dir() {
        return Ok(None);
    }
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(ext) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if stem.len() < 5 || !stem.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        let index: usize = stem
            .parse()
            .map_err(|_| Error::input(format!("bad frame index in {}", path.display())))?;
        found.push((index, path));
    }
    found.sort();
    for (expected, (index, path)) in found.iter().enumerate() {
        if *index != expected {
            let at = if *index > expected { expected } else { *index };
            return Err(Error::input(format!("gap at index {at}")).in_file(path));
        }
    }
    Ok(Some(found.into_iter().map(|(_, p)| p).collect()))
}

fn decode_all<T: Send>(paths: &[PathBuf], decode: impl Fn(&[u8]) -> Result<T> + Sync) -> Result<Vec<T>> {
    paths
        .par_iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::from(e).in_file(p))?;
            decode(&bytes).map_err(|e| e.in_file(p))
        })
        .collect()
}

fn check_shape(paths: &[PathBuf], dims: &[(usize, usize)], expected: &mut Option<(usize, usize)>) -> Result<()> {
    for (p, &d) in paths.iter().zip(dims) {
        match *expected {
            None => *expected = Some(d),
            Some(e) if e != d => return Err(Error::DimensionMismatch { expected: e, actual: d }.in_file(p)),
            _ => {}
        }
    }
    Ok(())
}

fn check_count(what: &str, dir: &Path, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::input(format!("{what} has {got} frames, expected {want}")).in_file(dir))
    }
}

/// Load a whole video directory.
pub fn open_sequence(root: &Path) -> Result<FrameSequence> {
    if !root.is_dir() {
        return Err(Error::input("sequence directory not found").in_file(root));
    }
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();

    let frame_files = list_indexed(&root.join(FRAMES_DIR), "ppm")?;
    let flow_files = list_indexed(&root.join(FLOW_DIR), "flo")?;
    let sal_files = list_indexed(&root.join(SALIENCY_DIR), "pgm")?;
    let svx_files = list_indexed(&root.join(SVX_DIR), "pgm16")?;

    let mut methods = Vec::new();
    let masks_root = root.join(MASKS_DIR);
    if masks_root.is_dir() {
        for entry in fs::read_dir(&masks_root)? {
            let entry = entry?;
            if entry.file_type()?.is_dir() {
                methods.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        methods.sort();
    }
    let mut method_files = Vec::with_capacity(methods.len());
    for m in &methods {
        let dir = masks_root.join(m);
        method_files.push(list_indexed(&dir, "pgm")?.unwrap_or_default());
    }

    let non_empty = |f: &Option<Vec<PathBuf>>| f.as_ref().map(|v| v.len()).filter(|&n| n > 0);
    let len = non_empty(&frame_files)
        .or_else(|| non_empty(&sal_files))
        .or_else(|| non_empty(&flow_files).map(|n| n + 1))
        .or_else(|| non_empty(&svx_files))
        .or_else(|| method_files.iter().map(Vec::len).find(|&n| n > 0))
        .ok_or_else(|| Error::input("empty sequence: no frames found").in_file(root))?;

    if let Some(f) = &frame_files {
        check_count("frames", &root.join(FRAMES_DIR), f.len(), len)?;
    }
    if let Some(f) = &sal_files {
        check_count("saliency", &root.join(SALIENCY_DIR), f.len(), len)?;
    }
    if let Some(f) = &svx_files {
        check_count("svx", &root.join(SVX_DIR), f.len(), len)?;
    }
    if let Some(f) = &flow_files {
        if !(f.len() == len || (len > 1 && f.len() == len - 1)) {
            return Err(
                Error::input(format!("flow has {} files, expected {} or {}", f.len(), len, len - 1))
                    .in_file(root.join(FLOW_DIR)),
            );
        }
    }
    for (m, files) in methods.iter().zip(&method_files) {
        check_count(&format!("method {m}"), &masks_root.join(m), files.len(), len)?;
    }

    let mut dims = None;
    let rgb = match &frame_files {
        Some(p) => {
            let v = decode_all(p, pnm::read_ppm)?;
            check_shape(p, &v.iter().map(RgbImage::dims).collect::<Vec<_>>(), &mut dims)?;
            Some(v)
        }
        None => None,
    };
    let flow = match &flow_files {
        Some(p) => {
            let v = decode_all(p, flo::read_flo)?;
            check_shape(p, &v.iter().map(FlowField::dims).collect::<Vec<_>>(), &mut dims)?;
            Some(v)
        }
        None => None,
    };
    let saliency = match &sal_files {
        Some(p) => {
            let v = decode_all(p, pnm::read_saliency)?;
            check_shape(p, &v.iter().map(ScalarField::dims).collect::<Vec<_>>(), &mut dims)?;
            Some(v)
        }
        None => None,
    };
    let labels = match &svx_files {
        Some(p) => {
            let v = decode_all(p, pnm::read_pgm16)?;
            check_shape(p, &v.iter().map(LabelMap::dims).collect::<Vec<_>>(), &mut dims)?;
            Some(v)
        }
        None => None,
    };
    let mut masks = Vec::with_capacity(methods.len());
    for files in &method_files {
        let v = decode_all(files, pnm::read_mask)?;
        check_shape(files, &v.iter().map(BinaryMask::dims).collect::<Vec<_>>(), &mut dims)?;
        masks.push(v);
    }
    let (width, height) = dims.expect("at least one raster was read");

    let mut frames = Vec::with_capacity(len);
    for i in 0..len {
        frames.push(Frame {
            rgb: rgb.as_ref().map(|v| v[i].clone()),
            flow: flow.as_ref().map(|v| v[i.min(v.len() - 1)].clone()),
            saliency: saliency.as_ref().map(|v| v[i].clone()),
            labels: labels.as_ref().map(|v| v[i].clone()),
            masks: masks.iter().map(|m| m[i].clone()).collect(),
        });
    }
    log::debug!(
        "opened {name}: {len} frames, {width}x{height}, {} methods",
        methods.len()
    );
    Ok(FrameSequence {
        name,
        width,
        height,
        methods,
        frames,
    })
}

/// Read a flat directory of `%05d.pgm` masks.
pub fn read_mask_dir(dir: &Path) -> Result<Vec<BinaryMask>> {
    let files = list_indexed(dir, "pgm")?.ok_or_else(|| Error::input("mask directory not found").in_file(dir))?;
    if files.is_empty() {
        return Err(Error::input("no masks found").in_file(dir));
    }
    let masks = decode_all(&files, pnm::read_mask)?;
    let mut dims = None;
    check_shape(
        &files,
        &masks.iter().map(BinaryMask::dims).collect::<Vec<_>>(),
        &mut dims,
    )?;
    Ok(masks)
}

/// Write masks as `%05d.pgm` into `dir`, returning the paths written.
pub fn write_mask_dir(dir: &Path, masks: &[BinaryMask]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(masks.len());
    for (i, m) in masks.iter().enumerate() {
        let path = dir.join(frame_file_name(i, "pgm"));
        fs::write(&path, pnm::write_mask(m)).map_err(|e| Error::from(e).in_file(&path))?;
        written.push(path);
    }
    Ok(written)
}
