//! File formats and synthetic data.
//!
//! * MVI: little-endian binary container for manifold-valued images.
//! * PGM (P5, 8-bit) for grayscale grids and masks, PPM (P6) for renders.
//! * Contours as plain-text `x y` polylines.

mod contour;
mod mvi;
mod netpbm;
mod synth;

pub use contour::{contours, format_contours, write_contours, Polyline};
pub use mvi::{decode_mvi, encode_mvi, read_mvi, write_mvi, MVI_MAGIC};
pub use netpbm::{decode_pgm, encode_pgm, encode_ppm, read_pgm, write_mask_pgm, write_pgm, write_ppm, RgbImage};
pub use synth::{generate_synthetic, random_tangent, NormalSampler, SyntheticSpec};
