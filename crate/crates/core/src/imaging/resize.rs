use crate::error::{Error, Result};
use crate::imaging::raster::BinaryImage;

/// Source index for nearest-neighbour sampling:
/// `floor((dst + 0.5) * src_len / dst_len)`, evaluated in integers.
#[inline]
pub fn nearest_index(dst: usize, src_len: usize, dst_len: usize) -> usize {
    (((2 * dst + 1) * src_len) / (2 * dst_len)).min(src_len - 1)
}

pub fn resize_nearest(img: &BinaryImage, out_h: usize, out_w: usize) -> Result<BinaryImage> {
    if out_h < 1 || out_w < 1 {
        return Err(Error::parameter("size", format!("output size {out_w}x{out_h} must be positive")));
    }
    let (w, h) = img.dims();
    let xs: Vec<usize> = (0..out_w).map(|x| nearest_index(x, w, out_w)).collect();
    let ys: Vec<usize> = (0..out_h).map(|y| nearest_index(y, h, out_h)).collect();
    BinaryImage::from_fn(out_w, out_h, |x, y| img.get(xs[x], ys[y]))
}
