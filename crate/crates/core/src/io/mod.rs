//! Codecs and the frame-sequence directory layout.

pub mod flo;
pub mod pnm;
pub mod sequence;

pub use flo::{read_flo, write_flo};
pub use pnm::{
    read_mask, read_pgm, read_pgm16, read_ppm, read_saliency, write_mask, write_pgm, write_pgm16, write_ppm, Gray8,
};
pub use sequence::{open_sequence, read_mask_dir, write_mask_dir, Frame, FrameSequence};
