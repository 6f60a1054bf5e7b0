//! Synthetic sequence directories for driving the binary.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tis_core::io::{self, sequence::frame_file_name};
use tis_core::{BinaryMask, FlowField, LabelMap, RgbImage, ScalarField};

pub const W: usize = 32;
pub const H: usize = 24;
pub const SIDE: usize = 8;

pub struct Layout<'a> {
    pub frames: usize,
    pub svx: bool,
    pub methods: &'a [&'a str],
}

impl Default for Layout<'_> {
    fn default() -> Self {
        Layout {
            frames: 5,
            svx: true,
            methods: &["a", "b", "c"],
        }
    }
}

pub fn block_origin(t: usize) -> (usize, usize) {
    (6 + 2 * t, 8)
}

/// Ground-truth block of frame `t`.
pub fn block(t: usize) -> BinaryMask {
    let (x0, y0) = block_origin(t);
    BinaryMask::from_fn(W, H, |x, y| {
        (x0..x0 + SIDE).contains(&x) && (y0..y0 + SIDE).contains(&y)
    })
    .unwrap()
}

/// Per-method variation of the block: `b` loses a column, `c` gains a row.
fn method_mask(method: usize, t: usize) -> BinaryMask {
    let (x0, y0) = block_origin(t);
    let (x1, y1) = match method {
        0 => (x0 + SIDE, y0 + SIDE),
        1 => (x0 + SIDE - 1, y0 + SIDE),
        _ => (x0 + SIDE, y0 + SIDE + 1),
    };
    BinaryMask::from_fn(W, H, |x, y| (x0..x1).contains(&x) && (y0..y1).contains(&y)).unwrap()
}

fn put(path: PathBuf, bytes: &[u8]) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, bytes).unwrap();
}

/// Write a moving-block sequence under `dir`.
pub fn write_sequence(dir: &Path, layout: &Layout) {
    for t in 0..layout.frames {
        let truth = block(t);
        let mut flow = FlowField::uniform(W, H, 1.0, 0.0).unwrap();
        let mut px = Vec::with_capacity(W * H);
        for y in 0..H {
            for x in 0..W {
                let inside = truth.get(x, y);
                if inside {
                    flow.set(x, y, 2.0, 0.0);
                }
                let shade = ((x * 7 + y * 3) % 16) as u8;
                px.push(if inside {
                    [200, 30 + shade, 30]
                } else {
                    [60 + shade, 90, 120 - shade]
                });
            }
        }
        let rgb = RgbImage::new(W, H, px).unwrap();
        let sal = ScalarField::from_fn(W, H, |x, y| if truth.get(x, y) { 0.8 } else { 0.1 }).unwrap();
        let gray = io::Gray8::from_saliency(&sal);
        put(dir.join("frames").join(frame_file_name(t, "ppm")), &io::write_ppm(&rgb));
        put(dir.join("flow").join(frame_file_name(t, "flo")), &io::write_flo(&flow));
        put(
            dir.join("saliency").join(frame_file_name(t, "pgm")),
            &io::write_pgm(&gray),
        );
        if layout.svx {
            let ids = (0..W * H)
                .map(|i| ((i / W) / 4 * (W / 4) + (i % W) / 4) as u32)
                .collect();
            let labels = LabelMap::new(W, H, ids).unwrap();
            put(
                dir.join("svx").join(frame_file_name(t, "pgm16")),
                &io::write_pgm16(&labels).unwrap(),
            );
        }
        for (i, m) in layout.methods.iter().enumerate() {
            let path = dir.join("masks").join(m).join(frame_file_name(t, "pgm"));
            put(path, &io::write_mask(&method_mask(i, t)));
        }
    }
}

/// `<root>/<seq>/%05d.pgm` for each sequence.
pub fn write_mask_root(root: &Path, seqs: &[(&str, Vec<BinaryMask>)]) {
    for (name, masks) in seqs {
        io::write_mask_dir(&root.join(name), masks).unwrap();
    }
}

pub fn tis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tis"))
        .args(args)
        .env_remove("TIS_LOG")
        .output()
        .expect("spawning tis")
}

pub fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Every file under `dir` with its contents, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
