use num_traits::Float;

use crate::imaging::raster::{BinaryImage, GrayImage};
use crate::scalar::Scalar;

/// `a + 2b + c`, the smoothing half of a Sobel kernel.
#[inline]
fn smooth<T: Scalar>(a: T, b: T, c: T) -> T {
    a + (b + b) + c
}

/// Horizontal and vertical Sobel responses with replicate border.
///
/// Kernels: `Gx = [[-1,0,1],[-2,0,2],[-1,0,1]]` and its transpose. Each
/// response is evaluated as the difference of two identically ordered
/// smoothing sums, so flat regions give exactly zero in floating point.
pub fn sobel_gradients<T: Scalar>(img: &GrayImage<T>) -> (GrayImage<T>, GrayImage<T>) {
    let (w, h) = img.dims();
    let mut gx = Vec::with_capacity(w * h);
    let mut gy = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| img.get_clamped(x as isize + dx, y as isize + dy);
            let right = smooth(p(1, -1), p(1, 0), p(1, 1));
            let left = smooth(p(-1, -1), p(-1, 0), p(-1, 1));
            let bottom = smooth(p(-1, 1), p(0, 1), p(1, 1));
            let top = smooth(p(-1, -1), p(0, -1), p(1, -1));
            gx.push(right - left);
            gy.push(bottom - top);
        }
    }
    (
        GrayImage::new(w, h, gx).expect("same dims"),
        GrayImage::new(w, h, gy).expect("same dims"),
    )
}

/// `sqrt(gx^2 + gy^2)`; needs a floating-point scalar.
pub fn sobel_magnitude<T: Scalar + Float>(img: &GrayImage<T>) -> GrayImage<T> {
    let (gx, gy) = sobel_gradients(img);
    let data = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(&a, &b)| (a * a + b * b).sqrt())
        .collect();
    GrayImage::new(img.width(), img.height(), data).expect("same dims")
}

/// Pixels whose gradient magnitude exceeds `edge_t`.
///
/// Compared in squared form so exact scalars work without a square root.
pub fn sobel_edges<T: Scalar>(img: &GrayImage<T>, edge_t: T) -> BinaryImage {
    let (gx, gy) = sobel_gradients(img);
    let t2 = edge_t * edge_t;
    let negative = edge_t < T::zero();
    let data = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(&a, &b)| (negative || a * a + b * b > t2) as u8)
        .collect();
    BinaryImage::new(img.width(), img.height(), data).expect("same dims")
}

/// Sobel edges of a bit raster, bits read as 0/1 intensities.
pub fn sobel_edges_binary(img: &BinaryImage, edge_t: f64) -> BinaryImage {
    sobel_edges(&img.to_gray::<f64>(), edge_t)
}
