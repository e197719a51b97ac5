//! Plate localisation by blur subtraction.
//!
//! The frame is median filtered, a 20x20 box blur is subtracted from it and
//! the positive residue thresholded. Border-touching components are dropped,
//! Sobel edges traced and enclosed areas filled; the best plate-shaped filled
//! component is cropped and masked out of the filtered frame.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{
    box_filter, clear_border_components, connected_components, difference, fill_holes, io, median_filter, sobel_edges_binary,
    threshold, BBox, BinaryImage, GrayImage, Region,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionParams {
    pub median_radius: usize,
    pub box_size: usize,
    pub diff_threshold: f64,
    pub edge_threshold: f64,
    pub min_extent: f64,
    pub aspect_min: f64,
    pub aspect_max: f64,
    pub min_area_frac: f64,
    pub max_area_frac: f64,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        Self {
            median_radius: 1,
            box_size: 20,
            diff_threshold: 0.03,
            edge_threshold: 0.5,
            min_extent: 0.5,
            aspect_min: 2.0,
            aspect_max: 6.0,
            min_area_frac: 0.001,
            max_area_frac: 0.15,
        }
    }
}

impl ExtractionParams {
    pub fn validate(&self) -> Result<()> {
        if self.median_radius < 1 {
            return Err(Error::parameter("median_radius", "must be >= 1"));
        }
        if self.box_size < 1 {
            return Err(Error::parameter("box_size", "must be >= 1"));
        }
        if !self.diff_threshold.is_finite() || !self.edge_threshold.is_finite() {
            return Err(Error::parameter("diff_threshold", "thresholds must be finite"));
        }
        if !(self.aspect_min < self.aspect_max) {
            return Err(Error::parameter("aspect_min", "aspect_min must be below aspect_max"));
        }
        if !(0.0 < self.min_area_frac && self.min_area_frac < self.max_area_frac && self.max_area_frac < 1.0) {
            return Err(Error::parameter("min_area_frac", "need 0 < min_area_frac < max_area_frac < 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateCandidate {
    pub region: Region,
    pub score: f64,
}

/// Isolated plate: the crop of the filtered frame at `bbox`, zeroed outside
/// the winning component.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedPlate<T = f64> {
    pub bbox: BBox,
    pub gray: GrayImage<T>,
    pub mask: BinaryImage,
}

/// Thresholded blur-subtraction residue.
pub fn enhance_edges<T: Scalar>(gray: &GrayImage<T>, p: &ExtractionParams) -> Result<BinaryImage> {
    let blurred = box_filter(gray, p.box_size)?;
    let diff = difference(gray, &blurred)?;
    Ok(threshold(&diff, T::lit(p.diff_threshold)))
}

/// Geometric gate and score for a filled component; `None` means rejected.
pub fn score_candidate(r: &Region, image_area: usize, p: &ExtractionParams) -> Option<PlateCandidate> {
    let aspect = r.aspect();
    let area = r.area as f64;
    let total = image_area as f64;
    let ok = aspect >= p.aspect_min
        && aspect <= p.aspect_max
        && r.extent >= p.min_extent
        && area >= p.min_area_frac * total
        && area <= p.max_area_frac * total;
    ok.then(|| PlateCandidate {
        region: *r,
        score: r.extent * area,
    })
}

/// Highest score wins; ties go to the larger area, then the topmost and
/// leftmost box.
pub fn pick_best(candidates: &[PlateCandidate]) -> Option<PlateCandidate> {
    candidates.iter().copied().reduce(|best, c| {
        let better = c.score > best.score
            || (c.score == best.score
                && (c.region.area > best.region.area
                    || (c.region.area == best.region.area
                        && (c.region.bbox.y_min, c.region.bbox.x_min) < (best.region.bbox.y_min, best.region.bbox.x_min))));
        if better {
            c
        } else {
            best
        }
    })
}

/// Every intermediate raster of one extraction run.
#[derive(Debug, Clone)]
pub struct ExtractionTrace<T = f64> {
    pub median: GrayImage<T>,
    pub difference: GrayImage<T>,
    pub binary: BinaryImage,
    pub cleared: BinaryImage,
    pub edges: BinaryImage,
    pub filled: BinaryImage,
    pub candidates: Vec<PlateCandidate>,
    pub plate: Option<ExtractedPlate<T>>,
}

pub fn extract_plate_traced<T: Scalar>(gray: &GrayImage<T>, p: &ExtractionParams) -> Result<ExtractionTrace<T>> {
    p.validate()?;
    let median = median_filter(gray, p.median_radius)?;
    let blurred = box_filter(&median, p.box_size)?;
    let diff = difference(&median, &blurred)?;
    let binary = threshold(&diff, T::lit(p.diff_threshold));
    let cleared = clear_border_components(&binary);
    let edges = sobel_edges_binary(&cleared, p.edge_threshold);
    let filled = fill_holes(&edges);
    let (labels, regions) = connected_components(&filled);
    let image_area = gray.width() * gray.height();
    let candidates: Vec<PlateCandidate> = regions.iter().filter_map(|r| score_candidate(r, image_area, p)).collect();

    let plate = match pick_best(&candidates) {
        None => None,
        Some(best) => {
            let bbox = best.region.bbox;
            let label = best.region.label;
            let mask = BinaryImage::from_fn(bbox.width(), bbox.height(), |x, y| {
                labels.get(bbox.x_min + x, bbox.y_min + y) == label
            })?;
            let crop = GrayImage::from_fn(bbox.width(), bbox.height(), |x, y| {
                if mask.get(x, y) {
                    median.get(bbox.x_min + x, bbox.y_min + y)
                } else {
                    T::zero()
                }
            })?;
            Some(ExtractedPlate { bbox, gray: crop, mask })
        }
    };
    Ok(ExtractionTrace {
        median,
        difference: diff,
        binary,
        cleared,
        edges,
        filled,
        candidates,
        plate,
    })
}

pub fn extract_plate<T: Scalar>(gray: &GrayImage<T>, p: &ExtractionParams) -> Result<ExtractedPlate<T>> {
    extract_plate_traced(gray, p)?.plate.ok_or(Error::NoPlateFound)
}

impl<T: Scalar> ExtractionTrace<T> {
    /// Writes the intermediate rasters as numbered PGM files.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        io::write_pgm(&dir.join("01_median.pgm"), &self.median)?;
        io::write_pgm(&dir.join("02_difference.pgm"), &self.difference)?;
        io::write_binary_pgm(&dir.join("03_binary.pgm"), &self.binary)?;
        io::write_binary_pgm(&dir.join("04_cleared.pgm"), &self.cleared)?;
        io::write_binary_pgm(&dir.join("05_sobel.pgm"), &self.edges)?;
        io::write_binary_pgm(&dir.join("06_filled.pgm"), &self.filled)?;
        if let Some(plate) = &self.plate {
            io::write_binary_pgm(&dir.join("07_mask.pgm"), &plate.mask)?;
            io::write_pgm(&dir.join("08_plate.pgm"), &plate.gray)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{add_horizontal_ramp, render_scene, SceneSpec};

    fn region(w: usize, h: usize, area: usize) -> Region {
        let bbox = BBox::from_xywh(10, 10, w, h);
        Region {
            label: 1,
            area,
            bbox,
            extent: area as f64 / bbox.area() as f64,
        }
    }

    #[test]
    fn score_accepts_plate_shaped_region() {
        let p = ExtractionParams::default();
        let c = score_candidate(&region(120, 40, 4800), 640 * 480, &p).unwrap();
        assert_eq!(c.score, 4800.0);
    }

    #[test]
    fn score_rejects_square_and_sparse() {
        let p = ExtractionParams::default();
        assert!(score_candidate(&region(60, 60, 3600), 640 * 480, &p).is_none());
        assert!(score_candidate(&region(120, 40, 960), 640 * 480, &p).is_none());
        // Too small and too large relative to the frame.
        assert!(score_candidate(&region(20, 5, 100), 640 * 480, &p).is_none());
        assert!(score_candidate(&region(600, 200, 120_000), 640 * 480, &p).is_none());
    }

    #[test]
    fn ties_prefer_area_then_top_left() {
        let mk = |x, y, area, score| PlateCandidate {
            region: Region {
                label: 1,
                area,
                bbox: BBox::from_xywh(x, y, 10, 3),
                extent: 1.0,
            },
            score,
        };
        let best = pick_best(&[mk(5, 5, 10, 9.0), mk(1, 1, 12, 9.0)]).unwrap();
        assert_eq!(best.region.area, 12);
        let best = pick_best(&[mk(5, 5, 10, 9.0), mk(1, 9, 10, 9.0), mk(3, 5, 10, 9.0)]).unwrap();
        assert_eq!((best.region.bbox.x_min, best.region.bbox.y_min), (3, 5));
        assert!(pick_best(&[]).is_none());
    }

    #[test]
    fn constant_image_enhances_to_nothing() {
        let img = GrayImage::filled(50, 40, 0.4).unwrap();
        assert!(enhance_edges(&img, &ExtractionParams::default()).unwrap().is_empty());
        assert!(matches!(extract_plate(&img, &ExtractionParams::default()), Err(Error::NoPlateFound)));
    }

    #[test]
    fn bright_patch_is_enhanced() {
        let img = GrayImage::from_fn(40, 40, |x, y| if (18..22).contains(&x) && (18..22).contains(&y) { 0.9 } else { 0.2 }).unwrap();
        let b = enhance_edges(&img, &ExtractionParams::default()).unwrap();
        for y in 18..22 {
            for x in 18..22 {
                assert!(b.get(x, y));
            }
        }
        assert!(!b.get(2, 2));
        assert!(!b.get(37, 37));
    }

    fn assert_close(found: BBox, truth: BBox, tol: usize) {
        let d = |a: usize, b: usize| a.abs_diff(b);
        assert!(
            d(found.x_min, truth.x_min) <= tol && d(found.y_min, truth.y_min) <= tol && d(found.x_max, truth.x_max) <= tol && d(found.y_max, truth.y_max) <= tol,
            "found {found:?}, truth {truth:?}"
        );
    }

    #[test]
    fn finds_planted_plate_with_and_without_ramp() {
        let spec = SceneSpec::centered(640, 480, "TN23AL0322", 60);
        let frame = render_scene(&spec).unwrap();
        let p = ExtractionParams::default();
        let plate = extract_plate(&frame.gray, &p).unwrap();
        assert_close(plate.bbox, frame.plate_bbox, 3);
        assert_eq!(plate.gray.dims(), (plate.bbox.width(), plate.bbox.height()));

        let ramped = add_horizontal_ramp(&frame.gray, 0.3);
        let plate2 = extract_plate(&ramped, &p).unwrap();
        assert_close(plate2.bbox, frame.plate_bbox, 3);
    }

    #[test]
    fn invalid_params_rejected() {
        let img = GrayImage::filled(10, 10, 0.0).unwrap();
        let p = ExtractionParams {
            aspect_min: 7.0,
            ..Default::default()
        };
        assert!(matches!(extract_plate(&img, &p), Err(Error::Parameter { .. })));
    }
}
