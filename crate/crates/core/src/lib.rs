//! Licence-plate recognition: blur-subtract plate localisation,
//! morphology-free character segmentation and template-matching OCR.
//!
//! Raster code is generic over [`Scalar`]; the aliases below name the
//! instantiations used in practice.

pub mod error;
pub mod extraction;
pub mod font;
pub mod imaging;
pub mod ocr;
pub mod scalar;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
pub use imaging::{BBox, BinaryImage, GrayImage, Region};
pub use scalar::Scalar;

/// Exact rational intensity, used to check invariance properties without
/// rounding.
pub type Exact = num_rational::Rational64;

pub type GrayImageF64 = GrayImage<f64>;
pub type GrayImageF32 = GrayImage<f32>;
pub type GrayImageExact = GrayImage<Exact>;
