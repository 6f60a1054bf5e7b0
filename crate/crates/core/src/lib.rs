//! Unsupervised video object segmentation built on Tukey's outlier fences.
//!
//! The crate is organised as a set of small stages:
//!
//! * [`tukey`] holds the robust-statistics kernel (quartiles, fences,
//!   outlierness scales for scalar rasters and for mask populations).
//! * [`io`] reads and writes the on-disk rasters (Middlebury `.flo`,
//!   8/16-bit PGM, PPM) and binds them into a [`io::FrameSequence`].
//! * [`tis0`] turns optical flow and visual saliency into per-frame
//!   foregroundness and a single-object mask.
//! * [`refine`] sharpens those masks with supervoxel consensus.
//! * [`ensemble`] fuses masks produced by several external methods.
//! * [`metrics`] scores masks against ground truth (region and contour).

pub mod color;
pub mod ensemble;
mod error;
pub mod io;
pub mod metrics;
pub mod raster;
pub mod refine;
pub mod segments;
pub mod tis0;
pub mod tukey;

pub use error::{Error, Result};
pub use raster::{BinaryMask, FlowField, LabelMap, RgbImage, ScalarField};
