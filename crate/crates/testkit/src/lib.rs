//! Slow, obviously-correct versions of the raster kernels, random inputs,
//! and a self-contained suite comparing the two.
//!
//! Every oracle here is written straight from the definition: no separable
//! passes, no flood queues, no partial selection.

use platetrace_core::imaging::{
    box_filter, clear_border_components, connected_components, fill_holes, median_filter, resize_nearest, sobel_magnitude,
};
use platetrace_core::{BBox, BinaryImage, GrayImage};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod oracle {
    use super::*;

    fn at(img: &GrayImage, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, img.width() as isize - 1) as usize;
        let cy = y.clamp(0, img.height() as isize - 1) as usize;
        img.data()[cy * img.width() + cx]
    }

    /// Full sort of every replicate-padded window.
    pub fn median(img: &GrayImage, radius: usize) -> GrayImage {
        let r = radius as isize;
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            let mut w = Vec::new();
            for yy in y as isize - r..=y as isize + r {
                for xx in x as isize - r..=x as isize + r {
                    w.push(at(img, xx, yy));
                }
            }
            w.sort_by(|a, b| a.partial_cmp(b).unwrap());
            w[w.len() / 2]
        })
        .unwrap()
    }

    /// Direct 2-D sum; the window starts `(size-1)/2` above and left.
    pub fn box_mean(img: &GrayImage, size: usize) -> GrayImage {
        let before = ((size - 1) / 2) as isize;
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            let mut sum = 0.0;
            for j in 0..size as isize {
                for i in 0..size as isize {
                    sum += at(img, x as isize - before + i, y as isize - before + j);
                }
            }
            sum / (size * size) as f64
        })
        .unwrap()
    }

    /// Plain 3x3 convolution with both Sobel kernels.
    pub fn sobel_magnitude(img: &GrayImage) -> GrayImage {
        const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
        GrayImage::from_fn(img.width(), img.height(), |x, y| {
            let (mut gx, mut gy) = (0.0, 0.0);
            for (j, row) in KX.iter().enumerate() {
                for (i, &k) in row.iter().enumerate() {
                    let v = at(img, x as isize + i as isize - 1, y as isize + j as isize - 1);
                    gx += k * v;
                    gy += KX[i][j] * v;
                }
            }
            (gx * gx + gy * gy).sqrt()
        })
        .unwrap()
    }

    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            i = parent[i];
        }
        i
    }

    /// 8-connected labels by union-find over all pixel pairs, renumbered in
    /// raster order of first appearance. 0 is background.
    pub fn labels(img: &BinaryImage) -> Vec<u32> {
        let (w, h) = img.dims();
        let mut parent: Vec<usize> = (0..w * h).collect();
        for y in 0..h {
            for x in 0..w {
                if !img.get(x, y) {
                    continue;
                }
                for (dx, dy) in [(1isize, 0isize), (-1, 1), (0, 1), (1, 1)] {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    if img.get(nx as usize, ny as usize) {
                        let a = find(&mut parent, y * w + x);
                        let b = find(&mut parent, ny as usize * w + nx as usize);
                        parent[a] = b;
                    }
                }
            }
        }
        let mut names = std::collections::HashMap::new();
        (0..w * h)
            .map(|i| {
                if img.data()[i] == 0 {
                    return 0;
                }
                let root = find(&mut parent, i);
                let next = names.len() as u32 + 1;
                *names.entry(root).or_insert(next)
            })
            .collect()
    }

    /// Area and bounding box per label, indexed by `label - 1`.
    pub fn regions(img: &BinaryImage) -> Vec<(usize, BBox)> {
        let labels = labels(img);
        let w = img.width();
        let n = labels.iter().copied().max().unwrap_or(0) as usize;
        let mut out: Vec<Option<(usize, BBox)>> = vec![None; n];
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let (x, y) = (i % w, i / w);
            let e = &mut out[l as usize - 1];
            *e = Some(match *e {
                None => (1, BBox::point(x, y)),
                Some((a, b)) => (a + 1, b.include(x, y)),
            });
        }
        out.into_iter().map(Option::unwrap).collect()
    }

    pub fn clear_border(img: &BinaryImage) -> BinaryImage {
        let (w, h) = img.dims();
        let labels = labels(img);
        let mut touching = std::collections::HashSet::new();
        for y in 0..h {
            for x in 0..w {
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    touching.insert(labels[y * w + x]);
                }
            }
        }
        BinaryImage::from_fn(w, h, |x, y| {
            let l = labels[y * w + x];
            l != 0 && !touching.contains(&l)
        })
        .unwrap()
    }

    /// Background reachable from the border grows by 4-neighbour relaxation
    /// until nothing changes; everything else is foreground.
    pub fn fill_holes(img: &BinaryImage) -> BinaryImage {
        let (w, h) = img.dims();
        let mut outside = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                if (x == 0 || y == 0 || x == w - 1 || y == h - 1) && !img.get(x, y) {
                    outside[y * w + x] = true;
                }
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for y in 0..h {
                for x in 0..w {
                    if outside[y * w + x] || img.get(x, y) {
                        continue;
                    }
                    let reach = (x > 0 && outside[y * w + x - 1])
                        || (x + 1 < w && outside[y * w + x + 1])
                        || (y > 0 && outside[(y - 1) * w + x])
                        || (y + 1 < h && outside[(y + 1) * w + x]);
                    if reach {
                        outside[y * w + x] = true;
                        changed = true;
                    }
                }
            }
        }
        BinaryImage::from_fn(w, h, |x, y| !outside[y * w + x]).unwrap()
    }

    /// Source pixel whose centre is nearest the destination pixel centre.
    pub fn resize(img: &BinaryImage, out_h: usize, out_w: usize) -> BinaryImage {
        let pick = |d: usize, src: usize, dst: usize| (((d as f64 + 0.5) * src as f64 / dst as f64).floor() as usize).min(src - 1);
        BinaryImage::from_fn(out_w, out_h, |x, y| img.get(pick(x, img.width(), out_w), pick(y, img.height(), out_h))).unwrap()
    }
}

pub mod delivery;
pub mod service;

pub fn random_gray<R: Rng>(rng: &mut R, max_side: usize) -> GrayImage {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    // A coarse palette makes ties and flat patches common.
    let coarse = rng.gen_bool(0.5);
    GrayImage::from_fn(w, h, |_, _| if coarse { rng.gen_range(0..4) as f64 / 3.0 } else { rng.gen() }).unwrap()
}

pub fn random_binary<R: Rng>(rng: &mut R, max_side: usize) -> BinaryImage {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    let density = rng.gen_range(0.1..0.8);
    BinaryImage::from_fn(w, h, |_, _| rng.gen_bool(density)).unwrap()
}

pub fn max_abs_diff(a: &GrayImage, b: &GrayImage) -> f64 {
    assert_eq!(a.dims(), b.dims());
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One kernel's result over the whole suite.
#[derive(Debug, Clone)]
pub struct KernelReport {
    pub kernel: &'static str,
    pub cases: usize,
    /// First mismatch, if any.
    pub failure: Option<String>,
}

/// Checks every kernel against its oracle on `cases` random inputs of at
/// most 32x32.
pub fn kernel_suite(cases: usize, seed: u64) -> Vec<KernelReport> {
    type Check = fn(&mut ChaCha8Rng) -> Result<(), String>;
    let checks: [(&'static str, Check); 6] = [
        ("median_filter", |rng| {
            let img = random_gray(rng, 32);
            let r = rng.gen_range(1..=3);
            let got = median_filter(&img, r).map_err(|e| e.to_string())?;
            (got == oracle::median(&img, r)).then_some(()).ok_or(format!("radius {r} on {:?}", img.dims()))
        }),
        ("box_filter", |rng| {
            let img = random_gray(rng, 32);
            let s = rng.gen_range(1..=24);
            let got = box_filter(&img, s).map_err(|e| e.to_string())?;
            let d = max_abs_diff(&got, &oracle::box_mean(&img, s));
            (d <= 1e-12).then_some(()).ok_or(format!("size {s} on {:?}: error {d:e}", img.dims()))
        }),
        ("sobel_magnitude", |rng| {
            let img = random_gray(rng, 32);
            let d = max_abs_diff(&sobel_magnitude(&img), &oracle::sobel_magnitude(&img));
            (d <= 1e-12).then_some(()).ok_or(format!("{:?}: error {d:e}", img.dims()))
        }),
        ("connected_components", |rng| {
            let img = random_binary(rng, 32);
            let (labels, regions) = connected_components(&img);
            let want: Vec<(usize, BBox)> = oracle::regions(&img);
            let got: Vec<(usize, BBox)> = regions.iter().map(|r| (r.area, r.bbox)).collect();
            (labels.labels() == oracle::labels(&img).as_slice() && got == want)
                .then_some(())
                .ok_or(format!("{:?}", img.dims()))
        }),
        ("clear_border", |rng| {
            let img = random_binary(rng, 32);
            (clear_border_components(&img) == oracle::clear_border(&img)).then_some(()).ok_or(format!("{:?}", img.dims()))
        }),
        ("fill_holes", |rng| {
            let img = random_binary(rng, 32);
            (fill_holes(&img) == oracle::fill_holes(&img)).then_some(()).ok_or(format!("{:?}", img.dims()))
        }),
    ];
    let mut reports: Vec<KernelReport> = checks
        .iter()
        .enumerate()
        .map(|(k, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64) << 32);
            let failure = (0..cases).find_map(|_| check(&mut rng).err());
            KernelReport {
                kernel: name,
                cases,
                failure,
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
    let failure = (0..cases).find_map(|_| {
        let img = random_binary(&mut rng, 32);
        let (h, w) = (rng.gen_range(1..=64), rng.gen_range(1..=64));
        let got = resize_nearest(&img, h, w).ok()?;
        (got != oracle::resize(&img, h, w)).then(|| format!("{:?} -> {w}x{h}", img.dims()))
    });
    reports.push(KernelReport {
        kernel: "resize_nearest",
        cases,
        failure,
    });
    reports
}
