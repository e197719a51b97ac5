use crate::error::{Error, Result};
use crate::imaging::raster::{BinaryImage, GrayImage};
use crate::scalar::Scalar;

/// Interleaved 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb8 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

/// ITU-R 601 luma, normalised to `[0, 1]`.
pub fn to_grayscale<T: Scalar>(rgb: &Rgb8) -> Result<GrayImage<T>> {
    if rgb.width == 0 || rgb.height == 0 {
        return Err(Error::Dimension {
            width: rgb.width,
            height: rgb.height,
            reason: "empty RGB raster",
        });
    }
    if rgb.data.len() != rgb.width * rgb.height * 3 {
        return Err(Error::Dimension {
            width: rgb.width,
            height: rgb.height,
            reason: "RGB data length must be 3 x width x height",
        });
    }
    let (wr, wg, wb) = (T::lit(0.299), T::lit(0.587), T::lit(0.114));
    let scale = T::from_count(255);
    let data = rgb
        .data
        .chunks_exact(3)
        .map(|px| {
            let r = T::from_count(px[0] as usize);
            let g = T::from_count(px[1] as usize);
            let b = T::from_count(px[2] as usize);
            let v = (wr * r + wg * g + wb * b) / scale;
            // Rounding can push white a hair above 1.
            if v > T::one() {
                T::one()
            } else {
                v
            }
        })
        .collect();
    GrayImage::new(rgb.width, rgb.height, data)
}

/// Median of each `(2r+1)^2` replicate-padded window.
pub fn median_filter<T: Scalar>(img: &GrayImage<T>, radius: usize) -> Result<GrayImage<T>> {
    if radius < 1 {
        return Err(Error::parameter("radius", "median radius must be >= 1"));
    }
    let r = radius as isize;
    let side = 2 * radius + 1;
    let mid = side * side / 2;
    let mut window: Vec<T> = Vec::with_capacity(side * side);
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        window.clear();
        for dy in -r..=r {
            for dx in -r..=r {
                window.push(img.get_clamped(x as isize + dx, y as isize + dy));
            }
        }
        let (_, m, _) = window.select_nth_unstable_by(mid, |a, b| {
            a.partial_cmp(b).expect("finite intensities")
        });
        *m
    })
}

/// Offset of the output pixel from the top-left of a `size`-wide window.
/// Even sizes have no centre; the window then extends one pixel further
/// down/right than up/left (size 20 spans `y-9 ..= y+10`).
pub fn window_anchor(size: usize) -> usize {
    (size - 1) / 2
}

/// Mean over the `size x size` replicate-padded window anchored by
/// [`window_anchor`].
pub fn box_filter<T: Scalar>(img: &GrayImage<T>, size: usize) -> Result<GrayImage<T>> {
    if size < 1 {
        return Err(Error::parameter("size", "box size must be >= 1"));
    }
    let (w, h) = img.dims();
    let lo = window_anchor(size) as isize;
    let hi = size as isize - 1 - lo;

    // Separable: horizontal sums, then vertical sums of those.
    let mut rows = vec![T::zero(); w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for dx in -lo..=hi {
                acc = acc + img.get_clamped(x as isize + dx, y as isize);
            }
            rows[y * w + x] = acc;
        }
    }
    let norm = T::from_count(size * size);
    GrayImage::from_fn(w, h, |x, y| {
        let mut acc = T::zero();
        for dy in -lo..=hi {
            let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
            acc = acc + rows[yy * w + x];
        }
        acc / norm
    })
}

/// `max(original - blurred, 0)` per pixel.
pub fn difference<T: Scalar>(original: &GrayImage<T>, blurred: &GrayImage<T>) -> Result<GrayImage<T>> {
    if original.dims() != blurred.dims() {
        return Err(Error::DimensionMismatch {
            left: original.dims(),
            right: blurred.dims(),
        });
    }
    let data = original
        .data()
        .iter()
        .zip(blurred.data())
        .map(|(&a, &b)| Scalar::max(a - b, T::zero()))
        .collect();
    GrayImage::new(original.width(), original.height(), data)
}

/// Pixels strictly above `t` become 1.
pub fn threshold<T: Scalar>(img: &GrayImage<T>, t: T) -> BinaryImage {
    BinaryImage::new(
        img.width(),
        img.height(),
        img.data().iter().map(|&v| (v > t) as u8).collect(),
    )
    .expect("dimensions come from a valid image")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn gray(w: usize, h: usize, v: &[f64]) -> GrayImage {
        GrayImage::new(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn grayscale_extremes_and_red() {
        let black = Rgb8 { width: 2, height: 1, data: vec![0; 6] };
        let white = Rgb8 { width: 2, height: 1, data: vec![255; 6] };
        let red = Rgb8 { width: 1, height: 1, data: vec![255, 0, 0] };
        assert!(to_grayscale::<f64>(&black).unwrap().data().iter().all(|&v| v == 0.0));
        assert!(to_grayscale::<f64>(&white).unwrap().data().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!((to_grayscale::<f64>(&red).unwrap().get(0, 0) - 0.299).abs() < 1e-12);
        // Exact rational route gives exactly the weights.
        assert_eq!(to_grayscale::<Rational64>(&white).unwrap().get(0, 0), Rational64::from_integer(1));
        assert_eq!(to_grayscale::<Rational64>(&red).unwrap().get(0, 0), Rational64::new(299, 1000));
    }

    #[test]
    fn grayscale_rejects_empty() {
        let empty = Rgb8 { width: 0, height: 3, data: vec![] };
        assert!(matches!(to_grayscale::<f64>(&empty), Err(Error::Dimension { .. })));
    }

    #[test]
    fn median_removes_isolated_spike() {
        let mut img = GrayImage::filled(5, 5, 0.0).unwrap();
        img.set(2, 2, 1.0);
        let out = median_filter(&img, 1).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn median_of_constant_is_constant() {
        let img = GrayImage::filled(7, 4, 0.42).unwrap();
        assert_eq!(median_filter(&img, 2).unwrap(), img);
    }

    #[test]
    fn median_rejects_zero_radius() {
        let img = GrayImage::filled(3, 3, 0.0).unwrap();
        assert!(matches!(median_filter(&img, 0), Err(Error::Parameter { .. })));
    }

    #[test]
    fn box_filter_impulse_spreads_ninths() {
        let mut img = GrayImage::filled(8, 8, 0.0f64).unwrap();
        img.set(4, 4, 1.0);
        let out = box_filter(&img, 3).unwrap();
        for y in 3..=5 {
            for x in 3..=5 {
                assert!((out.get(x, y) - 1.0 / 9.0).abs() < 1e-15);
            }
        }
        assert_eq!(out.get(1, 1), 0.0);
        assert_eq!(out.get(6, 4), 0.0);
    }

    #[test]
    fn box_filter_even_size_anchor() {
        // Impulse at row 10 of a column; size 20 window for output row y
        // spans y-9..=y+10, so rows 0..=19 see it and row 20 does not.
        let mut img = GrayImage::filled(1, 40, 0.0f64).unwrap();
        img.set(0, 10, 1.0);
        let out = box_filter(&img, 20).unwrap();
        let expect = 1.0 / 400.0 * 20.0; // replicate padding: column width 1 repeated 20x
        assert!((out.get(0, 0) - expect).abs() < 1e-15);
        assert!((out.get(0, 19) - expect).abs() < 1e-15);
        assert_eq!(out.get(0, 20), 0.0);
        assert_eq!(window_anchor(20), 9);
        assert_eq!(window_anchor(3), 1);
    }

    #[test]
    fn box_filter_constant_is_exact() {
        let img = GrayImage::filled(5, 9, Rational64::new(7, 10)).unwrap();
        assert_eq!(box_filter(&img, 20).unwrap(), img);
        assert!(matches!(box_filter(&img, 0), Err(Error::Parameter { .. })));
    }

    #[test]
    fn difference_clamps_and_checks_dims() {
        let a = gray(3, 1, &[0.5, 0.2, 0.9]);
        let b = gray(3, 1, &[0.1, 0.4, 0.9]);
        let d = difference(&a, &b).unwrap();
        assert!((d.get(0, 0) - 0.4).abs() < 1e-15);
        assert_eq!(d.get(1, 0), 0.0);
        assert_eq!(d.get(2, 0), 0.0);
        assert!(difference(&a, &a).unwrap().data().iter().all(|&v| v == 0.0));
        let c = gray(1, 3, &[0.0; 3]);
        assert!(matches!(difference(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn threshold_is_strict() {
        let img = gray(3, 1, &[0.05, 0.03, 0.0]);
        let b = threshold(&img, 0.03);
        assert_eq!(b.data(), &[1, 0, 0]);
        let zeros = GrayImage::filled(4, 4, 0.0).unwrap();
        assert!(threshold(&zeros, 0.0).is_empty());
    }
}
