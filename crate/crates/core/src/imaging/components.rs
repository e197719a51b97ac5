//! Connected components and the flood-based binary operations built on them.

use std::collections::VecDeque;

use crate::imaging::raster::{BBox, BinaryImage, LabelMap, Region};

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const NEIGHBORS_4: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

/// Breadth-first flood over pixels whose bit equals `value`, starting from
/// `seeds`. Returns the visited mask as a flat vector.
fn flood(img: &BinaryImage, seeds: impl IntoIterator<Item = (usize, usize)>, value: bool, neighbors: &[(isize, isize)]) -> Vec<bool> {
    let (w, h) = img.dims();
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    for (x, y) in seeds {
        if img.get(x, y) == value && !seen[y * w + x] {
            seen[y * w + x] = true;
            queue.push_back((x, y));
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for &(dx, dy) in neighbors {
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            let idx = ny * w + nx;
            if !seen[idx] && img.get(nx, ny) == value {
                seen[idx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    seen
}

fn border_pixels(w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    let top_bottom = (0..w).flat_map(move |x| [(x, 0), (x, h - 1)]);
    let sides = (0..h).flat_map(move |y| [(0, y), (w - 1, y)]);
    top_bottom.chain(sides)
}

/// 8-connected labeling. Labels are `1..=N` in raster order of each
/// component's first pixel.
pub fn connected_components(img: &BinaryImage) -> (LabelMap, Vec<Region>) {
    let (w, h) = img.dims();
    let mut labels = vec![0u32; w * h];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();
    for sy in 0..h {
        for sx in 0..w {
            if !img.get(sx, sy) || labels[sy * w + sx] != 0 {
                continue;
            }
            let label = regions.len() as u32 + 1;
            labels[sy * w + sx] = label;
            queue.push_back((sx, sy));
            let mut bbox = BBox::point(sx, sy);
            let mut area = 0usize;
            while let Some((x, y)) = queue.pop_front() {
                area += 1;
                bbox = bbox.include(x, y);
                for &(dx, dy) in &NEIGHBORS_8 {
                    let nx = x as isize + dx;
                    let ny = y as isize + dy;
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let idx = ny as usize * w + nx as usize;
                    if labels[idx] == 0 && img.get(nx as usize, ny as usize) {
                        labels[idx] = label;
                        queue.push_back((nx as usize, ny as usize));
                    }
                }
            }
            regions.push(Region {
                label,
                area,
                bbox,
                extent: area as f64 / bbox.area() as f64,
            });
        }
    }
    (LabelMap::new(w, h, labels), regions)
}

/// Clears every 8-connected component that touches the image border.
pub fn clear_border_components(img: &BinaryImage) -> BinaryImage {
    let (w, h) = img.dims();
    let touching = flood(img, border_pixels(w, h), true, &NEIGHBORS_8);
    BinaryImage::from_fn(w, h, |x, y| img.get(x, y) && !touching[y * w + x])
        .expect("same dims")
}

/// Sets every background pixel not 4-reachable from the border.
pub fn fill_holes(img: &BinaryImage) -> BinaryImage {
    let (w, h) = img.dims();
    let outside = flood(img, border_pixels(w, h), false, &NEIGHBORS_4);
    BinaryImage::from_fn(w, h, |x, y| !outside[y * w + x]).expect("same dims")
}

pub fn complement(img: &BinaryImage) -> BinaryImage {
    let (w, h) = img.dims();
    BinaryImage::from_fn(w, h, |x, y| !img.get(x, y)).expect("same dims")
}

/// Removes components whose area lies outside `[min_area, max_area]`.
pub fn filter_by_area(img: &BinaryImage, min_area: usize, max_area: usize) -> BinaryImage {
    let (labels, regions) = connected_components(img);
    let keep: Vec<bool> = std::iter::once(false)
        .chain(regions.iter().map(|r| r.area >= min_area && r.area <= max_area))
        .collect();
    let (w, h) = img.dims();
    BinaryImage::from_fn(w, h, |x, y| keep[labels.get(x, y) as usize]).expect("same dims")
}
