use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension {
            width,
            height,
            reason: "width and height must be positive",
        });
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::Dimension {
            width,
            height,
            reason: "data length does not match width x height",
        });
    }
    Ok(())
}

/// Dense row-major intensity raster. Canonical images hold values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T = f64> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    /// Pixel lookup with coordinates clamped into the raster (replicate border).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> GrayImage<U> {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Adds a constant to every pixel without clamping.
    pub fn offset(&self, c: T) -> GrayImage<T> {
        self.map(|v| v + c)
    }

    /// Converts between scalar types through `f64`.
    pub fn cast<U: Scalar>(&self) -> GrayImage<U> {
        self.map(|v| U::lit(v.to_f64()))
    }

    pub fn crop(&self, bbox: BBox) -> Result<GrayImage<T>> {
        if bbox.x_max >= self.width || bbox.y_max >= self.height {
            return Err(Error::parameter("bbox", format!("{bbox:?} outside {}x{}", self.width, self.height)));
        }
        GrayImage::from_fn(bbox.width(), bbox.height(), |x, y| {
            self.get(bbox.x_min + x, bbox.y_min + y)
        })
    }

    /// True when every value is in the canonical `[0, 1]` range.
    pub fn is_canonical(&self) -> bool {
        let (zero, one) = (T::zero(), T::one());
        self.data.iter().all(|&v| v >= zero && v <= one)
    }
}

/// Dense row-major 0/1 raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data.iter().any(|&b| b > 1) {
            return Err(Error::Dimension {
                width,
                height,
                reason: "binary pixels must be 0 or 1",
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y) as u8);
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.data[y * self.width + x] = on as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&b| b == 0)
    }

    pub fn crop(&self, bbox: BBox) -> Result<BinaryImage> {
        if bbox.x_max >= self.width || bbox.y_max >= self.height {
            return Err(Error::parameter("bbox", format!("{bbox:?} outside {}x{}", self.width, self.height)));
        }
        BinaryImage::from_fn(bbox.width(), bbox.height(), |x, y| {
            self.get(bbox.x_min + x, bbox.y_min + y)
        })
    }

    /// Bits as intensities: 1 becomes `T::one()`.
    pub fn to_gray<T: Scalar>(&self) -> GrayImage<T> {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&b| if b != 0 { T::one() } else { T::zero() })
                .collect(),
        }
    }

    /// Tight bounding box of the set pixels, `None` for an empty raster.
    pub fn ink_bbox(&self) -> Option<BBox> {
        let mut bbox: Option<BBox> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    bbox = Some(match bbox {
                        None => BBox::point(x, y),
                        Some(b) => b.include(x, y),
                    });
                }
            }
        }
        bbox
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl BBox {
    pub fn point(x: usize, y: usize) -> Self {
        Self {
            x_min: x,
            y_min: y,
            x_max: x,
            y_max: y,
        }
    }

    /// Box from a top-left corner and a size; `w` and `h` must be positive.
    pub fn from_xywh(x: usize, y: usize, w: usize, h: usize) -> Self {
        assert!(w > 0 && h > 0, "empty box");
        Self {
            x_min: x,
            y_min: y,
            x_max: x + w - 1,
            y_max: y + h - 1,
        }
    }

    pub fn include(self, x: usize, y: usize) -> Self {
        Self {
            x_min: self.x_min.min(x),
            y_min: self.y_min.min(y),
            x_max: self.x_max.max(x),
            y_max: self.y_max.max(y),
        }
    }

    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let ix0 = self.x_min.max(other.x_min);
        let iy0 = self.y_min.max(other.y_min);
        let ix1 = self.x_max.min(other.x_max);
        let iy1 = self.y_max.min(other.y_max);
        if ix0 > ix1 || iy0 > iy1 {
            return 0.0;
        }
        let inter = ((ix1 - ix0 + 1) * (iy1 - iy0 + 1)) as f64;
        inter / ((self.area() + other.area()) as f64 - inter)
    }
}

/// A labeled 8-connected component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: u32,
    pub area: usize,
    pub bbox: BBox,
    pub extent: f64,
}

impl Region {
    pub fn aspect(&self) -> f64 {
        self.bbox.width() as f64 / self.bbox.height() as f64
    }
}

/// Per-pixel component labels; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub(crate) fn new(width: usize, height: usize, labels: Vec<u32>) -> Self {
        debug_assert_eq!(labels.len(), width * height);
        Self {
            width,
            height,
            labels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Binary mask of a single label.
    pub fn mask(&self, label: u32) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|&l| (l == label) as u8).collect(),
        }
    }
}
