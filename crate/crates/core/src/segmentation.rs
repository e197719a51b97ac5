//! Morphology-free character segmentation.
//!
//! Two bounding-box passes: the first crops the binarised plate to its
//! largest filled region, which is normalised to a fixed raster, inverted and
//! border-cleared; after an area filter the second pass cuts each surviving
//! component out as a glyph. No dilation or erosion touches the pixels, so a
//! glyph is an exact sub-raster of the cleaned plate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::ExtractedPlate;
use crate::imaging::{
    clear_border_components, complement, connected_components, fill_holes, filter_by_area, io, resize_nearest, threshold, BBox,
    BinaryImage,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationParams {
    pub bin_threshold: f64,
    pub norm_h: usize,
    pub norm_w: usize,
    pub min_char_area: usize,
    pub max_char_area: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            bin_threshold: 0.01,
            norm_h: 175,
            norm_w: 730,
            min_char_area: 1000,
            max_char_area: 8000,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        if self.norm_h == 0 || self.norm_w == 0 {
            return Err(Error::parameter("norm_h", "normalised size must be positive"));
        }
        if !(0 < self.min_char_area && self.min_char_area < self.max_char_area) {
            return Err(Error::parameter("min_char_area", "need 0 < min_char_area < max_char_area"));
        }
        if !self.bin_threshold.is_finite() {
            return Err(Error::parameter("bin_threshold", "must be finite"));
        }
        Ok(())
    }
}

/// One segmented character. `bitmap` is the tight crop of the cleaned,
/// normalised plate at `bbox`; 1 is ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    pub bitmap: BinaryImage,
    pub bbox: BBox,
    pub order_index: usize,
}

/// Binarise, crop to the largest filled region, resize to the normalised
/// size, invert and clear the border.
pub fn normalize_plate<T: Scalar>(plate: &ExtractedPlate<T>, p: &SegmentationParams) -> Result<BinaryImage> {
    p.validate()?;
    let bin = threshold(&plate.gray, T::lit(p.bin_threshold));
    let (_, regions) = connected_components(&fill_holes(&bin));
    // Largest area; the earliest label wins a tie.
    let largest = regions
        .iter()
        .fold(None::<&crate::imaging::Region>, |best, r| match best {
            Some(b) if b.area >= r.area => Some(b),
            _ => Some(r),
        })
        .ok_or(Error::EmptyPlate)?;
    let cropped = bin.crop(largest.bbox)?;
    let resized = resize_nearest(&cropped, p.norm_h, p.norm_w)?;
    Ok(clear_border_components(&complement(&resized)))
}

/// Clears every component with area outside `[min_char_area, max_char_area]`.
pub fn filter_debris(norm: &BinaryImage, p: &SegmentationParams) -> BinaryImage {
    filter_by_area(norm, p.min_char_area, p.max_char_area)
}

/// Glyphs of an already cleaned raster, ordered by `x_min` then `y_min`.
pub fn glyphs_of(cleaned: &BinaryImage) -> Result<Vec<Glyph>> {
    let (_, mut regions) = connected_components(cleaned);
    regions.sort_by_key(|r| (r.bbox.x_min, r.bbox.y_min));
    regions
        .iter()
        .enumerate()
        .map(|(order_index, r)| {
            Ok(Glyph {
                bitmap: cleaned.crop(r.bbox)?,
                bbox: r.bbox,
                order_index,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub normalized: BinaryImage,
    pub cleaned: BinaryImage,
    pub glyphs: Vec<Glyph>,
}

pub fn segment_traced<T: Scalar>(plate: &ExtractedPlate<T>, p: &SegmentationParams) -> Result<Segmentation> {
    let normalized = normalize_plate(plate, p)?;
    let cleaned = filter_debris(&normalized, p);
    let glyphs = glyphs_of(&cleaned)?;
    if glyphs.is_empty() {
        return Err(Error::NoCharacters);
    }
    Ok(Segmentation {
        normalized,
        cleaned,
        glyphs,
    })
}

pub fn segment_characters<T: Scalar>(plate: &ExtractedPlate<T>, p: &SegmentationParams) -> Result<Vec<Glyph>> {
    Ok(segment_traced(plate, p)?.glyphs)
}

impl Segmentation {
    /// Writes the normalised plate, the debris-filtered plate and each glyph.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        io::write_binary_pgm(&dir.join("10_normalized.pgm"), &self.normalized)?;
        io::write_binary_pgm(&dir.join("11_characters.pgm"), &self.cleaned)?;
        for g in &self.glyphs {
            io::write_binary_pgm(&dir.join(format!("12_glyph_{:02}.pgm", g.order_index)), &g.bitmap)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::GrayImage;
    use crate::synth::render_plate;

    fn plate_from_gray(gray: GrayImage) -> ExtractedPlate {
        let (w, h) = gray.dims();
        ExtractedPlate {
            bbox: BBox::from_xywh(0, 0, w, h),
            mask: BinaryImage::from_fn(w, h, |_, _| true).unwrap(),
            gray,
        }
    }

    #[test]
    fn normalized_size_and_polarity() {
        // Bright plate, one dark bar in the middle.
        let gray = GrayImage::from_fn(200, 50, |x, y| if (90..110).contains(&x) && (10..40).contains(&y) { 0.0 } else { 0.9 }).unwrap();
        let norm = normalize_plate(&plate_from_gray(gray), &SegmentationParams::default()).unwrap();
        assert_eq!(norm.dims(), (730, 175));
        assert!(norm.get(365, 87));
        assert!(!norm.get(100, 87));
    }

    #[test]
    fn dark_frame_is_gone_after_normalization() {
        let gray = GrayImage::from_fn(200, 50, |x, y| {
            let frame = x < 2 || y < 2 || x >= 198 || y >= 48;
            let bar = (90..110).contains(&x) && (10..40).contains(&y);
            if frame || bar {
                0.0
            } else {
                0.9
            }
        })
        .unwrap();
        let norm = normalize_plate(&plate_from_gray(gray), &SegmentationParams::default()).unwrap();
        for x in 0..730 {
            assert!(!norm.get(x, 0) && !norm.get(x, 174));
        }
        for y in 0..175 {
            assert!(!norm.get(0, y) && !norm.get(729, y));
        }
        assert!(norm.get(365, 87));
    }

    #[test]
    fn empty_plate_is_an_error() {
        let gray = GrayImage::filled(40, 10, 0.0).unwrap();
        assert!(matches!(normalize_plate(&plate_from_gray(gray), &SegmentationParams::default()), Err(Error::EmptyPlate)));
    }

    #[test]
    fn debris_area_bounds() {
        let p = SegmentationParams::default();
        let blob = |w: usize, h: usize| BinaryImage::from_fn(730, 175, move |x, y| (10..10 + w).contains(&x) && (10..10 + h).contains(&y)).unwrap();
        assert!(filter_debris(&blob(20, 15), &p).is_empty()); // 300 px
        assert!(filter_debris(&blob(100, 90), &p).is_empty()); // 9000 px
        assert_eq!(filter_debris(&blob(40, 25), &p).count_ones(), 1000);
        assert_eq!(filter_debris(&blob(100, 80), &p).count_ones(), 8000);
        assert!(filter_debris(&blob(37, 27), &p).is_empty()); // 999 px
        assert!(filter_debris(&blob(89, 90), &p).is_empty()); // 8010 px
    }

    #[test]
    fn rendered_plate_yields_ten_ordered_glyphs() {
        let gray = render_plate("TN23AL0322", 80, 0.85, 0.0).unwrap();
        let seg = segment_traced(&plate_from_gray(gray), &SegmentationParams::default()).unwrap();
        assert_eq!(seg.glyphs.len(), 10);
        for (i, g) in seg.glyphs.iter().enumerate() {
            assert_eq!(g.order_index, i);
            let area = g.bitmap.count_ones();
            assert!((1000..=8000).contains(&area), "glyph {i} area {area}");
            assert_eq!(g.bitmap, seg.cleaned.crop(g.bbox).unwrap());
        }
        assert!(seg.glyphs.windows(2).all(|w| w[0].bbox.x_min < w[1].bbox.x_min));
    }

    #[test]
    fn screw_hole_does_not_change_count() {
        let mut gray = render_plate("TN23AL0322", 80, 0.85, 0.0).unwrap();
        // An 8x9 dark dot in the top margin maps to roughly 360 px.
        for y in 3..12 {
            for x in 150..158 {
                gray.set(x, y, 0.0);
            }
        }
        let glyphs = segment_characters(&plate_from_gray(gray), &SegmentationParams::default()).unwrap();
        assert_eq!(glyphs.len(), 10);
    }

    #[test]
    fn border_only_ink_gives_no_characters() {
        let gray = GrayImage::from_fn(200, 50, |x, y| if x < 3 || y < 3 { 0.0 } else { 0.9 }).unwrap();
        let (w, h) = gray.dims();
        // Mask the whole box so the dark strip sits inside the crop.
        let plate = ExtractedPlate {
            bbox: BBox::from_xywh(0, 0, w, h),
            mask: BinaryImage::from_fn(w, h, |_, _| true).unwrap(),
            gray,
        };
        assert!(matches!(segment_characters(&plate, &SegmentationParams::default()), Err(Error::NoCharacters)));
    }
}
