//! A small stroke font for the 36 plate symbols.
//!
//! Each symbol is a set of polylines in a unit box (`x` right, `y` down).
//! Rendering maps the box onto a pixel rectangle and inks every pixel within
//! half a stroke width of any segment, so the same definition serves the
//! template set at canonical size and the synthetic plates at any scale.
//! Shapes are chosen to keep confusable pairs apart: the zero is slashed,
//! `1` has a flag and base, `I` has bars at both ends.

use std::f64::consts::PI;

use crate::imaging::BinaryImage;

pub const SYMBOLS: &str = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Stroke geometry relative to the glyph box height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FontStyle {
    /// Box width / box height.
    pub aspect: f64,
    /// Stroke width / box height.
    pub stroke: f64,
}

impl Default for FontStyle {
    fn default() -> Self {
        Self {
            aspect: 0.48,
            stroke: 0.14,
        }
    }
}

type Polyline = Vec<(f64, f64)>;

fn line(points: &[(f64, f64)]) -> Polyline {
    points.to_vec()
}

/// Elliptical arc, angles in degrees with 0 pointing right and 90 down.
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, from: f64, to: f64) -> Polyline {
    let steps = (((to - from).abs() / 7.5).ceil() as usize).max(2);
    (0..=steps)
        .map(|i| {
            let a = (from + (to - from) * i as f64 / steps as f64) * PI / 180.0;
            (cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect()
}

fn ellipse(cx: f64, cy: f64, rx: f64, ry: f64) -> Polyline {
    arc(cx, cy, rx, ry, 0.0, 360.0)
}

/// Polylines for `symbol`, or `None` outside `[0-9A-Z]`.
pub fn strokes(symbol: char) -> Option<Vec<Polyline>> {
    let s = match symbol {
        '0' => vec![ellipse(0.5, 0.5, 0.5, 0.5), line(&[(0.787, 0.09), (0.213, 0.91)])],
        '1' => vec![
            line(&[(0.15, 0.3), (0.55, 0.0), (0.55, 1.0)]),
            line(&[(0.15, 1.0), (0.95, 1.0)]),
        ],
        '2' => vec![
            arc(0.5, 0.3, 0.5, 0.3, -170.0, 20.0),
            line(&[(0.97, 0.4), (0.0, 1.0), (1.0, 1.0)]),
        ],
        '3' => vec![
            arc(0.5, 0.25, 0.48, 0.25, -160.0, 90.0),
            arc(0.5, 0.75, 0.5, 0.25, -90.0, 160.0),
        ],
        '4' => vec![line(&[(0.72, 1.0), (0.72, 0.0), (0.0, 0.68), (1.0, 0.68)])],
        '5' => vec![
            line(&[(0.95, 0.0), (0.08, 0.0), (0.05, 0.48), (0.067, 0.52)]),
            arc(0.5, 0.68, 0.5, 0.32, -150.0, 150.0),
        ],
        '6' => vec![
            arc(0.5, 0.5, 0.5, 0.5, -50.0, -180.0),
            line(&[(0.0, 0.5), (0.0, 0.7)]),
            ellipse(0.5, 0.7, 0.5, 0.3),
        ],
        '7' => vec![line(&[(0.0, 0.0), (1.0, 0.0), (0.35, 1.0)])],
        '8' => vec![ellipse(0.5, 0.24, 0.42, 0.24), ellipse(0.5, 0.74, 0.5, 0.26)],
        '9' => vec![
            ellipse(0.5, 0.3, 0.5, 0.3),
            line(&[(1.0, 0.3), (1.0, 0.5)]),
            arc(0.5, 0.5, 0.5, 0.5, 0.0, 130.0),
        ],
        'A' => vec![
            line(&[(0.0, 1.0), (0.5, 0.0), (1.0, 1.0)]),
            line(&[(0.19, 0.62), (0.81, 0.62)]),
        ],
        'B' => vec![
            line(&[(0.6, 0.5), (0.0, 0.5)]),
            line(&[(0.6, 0.0), (0.0, 0.0), (0.0, 1.0), (0.62, 1.0)]),
            arc(0.6, 0.25, 0.35, 0.25, -90.0, 90.0),
            arc(0.62, 0.75, 0.38, 0.25, -90.0, 90.0),
        ],
        'C' => vec![arc(0.5, 0.5, 0.5, 0.5, -40.0, -320.0)],
        'D' => vec![
            line(&[(0.4, 0.0), (0.0, 0.0), (0.0, 1.0), (0.4, 1.0)]),
            arc(0.4, 0.5, 0.6, 0.5, -90.0, 90.0),
        ],
        'E' => vec![
            line(&[(1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]),
            line(&[(0.0, 0.5), (0.8, 0.5)]),
        ],
        'F' => vec![
            line(&[(1.0, 0.0), (0.0, 0.0), (0.0, 1.0)]),
            line(&[(0.0, 0.5), (0.8, 0.5)]),
        ],
        'G' => vec![
            arc(0.5, 0.5, 0.5, 0.5, -40.0, -360.0),
            line(&[(1.0, 0.5), (0.55, 0.5)]),
        ],
        'H' => vec![
            line(&[(0.0, 0.0), (0.0, 1.0)]),
            line(&[(1.0, 0.0), (1.0, 1.0)]),
            line(&[(0.0, 0.5), (1.0, 0.5)]),
        ],
        'I' => vec![
            line(&[(0.5, 0.0), (0.5, 1.0)]),
            line(&[(0.1, 0.0), (0.9, 0.0)]),
            line(&[(0.1, 1.0), (0.9, 1.0)]),
        ],
        'J' => vec![
            line(&[(0.35, 0.0), (1.0, 0.0), (1.0, 0.68)]),
            arc(0.5, 0.68, 0.5, 0.32, 0.0, 180.0),
        ],
        'K' => vec![
            line(&[(0.0, 0.0), (0.0, 1.0)]),
            line(&[(1.0, 0.0), (0.0, 0.62)]),
            line(&[(0.32, 0.42), (1.0, 1.0)]),
        ],
        'L' => vec![line(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)])],
        'M' => vec![line(&[(0.0, 1.0), (0.0, 0.0), (0.5, 0.6), (1.0, 0.0), (1.0, 1.0)])],
        'N' => vec![line(&[(0.0, 1.0), (0.0, 0.0), (1.0, 1.0), (1.0, 0.0)])],
        'O' => vec![ellipse(0.5, 0.5, 0.5, 0.5)],
        'P' => vec![
            line(&[(0.0, 1.0), (0.0, 0.0), (0.6, 0.0)]),
            arc(0.6, 0.27, 0.4, 0.27, -90.0, 90.0),
            line(&[(0.6, 0.54), (0.0, 0.54)]),
        ],
        'Q' => vec![ellipse(0.5, 0.5, 0.5, 0.5), line(&[(0.6, 0.68), (1.0, 1.0)])],
        'R' => vec![
            line(&[(0.0, 1.0), (0.0, 0.0), (0.6, 0.0)]),
            arc(0.6, 0.27, 0.4, 0.27, -90.0, 90.0),
            line(&[(0.6, 0.54), (0.0, 0.54)]),
            line(&[(0.45, 0.54), (1.0, 1.0)]),
        ],
        'S' => vec![
            arc(0.5, 0.25, 0.5, 0.25, -10.0, -270.0),
            arc(0.5, 0.75, 0.5, 0.25, -90.0, 170.0),
        ],
        'T' => vec![line(&[(0.0, 0.0), (1.0, 0.0)]), line(&[(0.5, 0.0), (0.5, 1.0)])],
        'U' => vec![
            line(&[(0.0, 0.0), (0.0, 0.62)]),
            arc(0.5, 0.62, 0.5, 0.38, 180.0, 0.0),
            line(&[(1.0, 0.62), (1.0, 0.0)]),
        ],
        'V' => vec![line(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)])],
        'W' => vec![line(&[(0.0, 0.0), (0.25, 1.0), (0.5, 0.4), (0.75, 1.0), (1.0, 0.0)])],
        'X' => vec![line(&[(0.0, 0.0), (1.0, 1.0)]), line(&[(1.0, 0.0), (0.0, 1.0)])],
        'Y' => vec![
            line(&[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]),
            line(&[(0.5, 0.5), (0.5, 1.0)]),
        ],
        'Z' => vec![line(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)])],
        _ => return None,
    };
    Some(s)
}

/// Pixel-space segments of `symbol` placed in the box `(x0, y0, w, h)` with
/// stroke radius `r`; the stroke stays inside the box.
pub fn placed_segments(symbol: char, x0: f64, y0: f64, w: f64, h: f64, r: f64) -> Option<Vec<[(f64, f64); 2]>> {
    let lines = strokes(symbol)?;
    let sx = (w - 2.0 * r).max(0.0);
    let sy = (h - 2.0 * r).max(0.0);
    let map = |(u, v): (f64, f64)| (x0 + r + u * sx, y0 + r + v * sy);
    let mut segs = Vec::new();
    for pl in lines {
        for pair in pl.windows(2) {
            segs.push([map(pair[0]), map(pair[1])]);
        }
    }
    Some(segs)
}

fn dist2_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    qx * qx + qy * qy
}

/// Accumulates ink coverage in `[0, 1]` for each pixel of a `width x height`
/// canvas, sampling `samples x samples` points per pixel.
pub fn paint_coverage(
    coverage: &mut [f64],
    width: usize,
    height: usize,
    segments: &[[(f64, f64); 2]],
    r: f64,
    samples: usize,
) {
    let r2 = r * r;
    let (mut bx0, mut by0, mut bx1, mut by1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for [a, b] in segments {
        bx0 = bx0.min(a.0.min(b.0));
        by0 = by0.min(a.1.min(b.1));
        bx1 = bx1.max(a.0.max(b.0));
        by1 = by1.max(a.1.max(b.1));
    }
    if segments.is_empty() {
        return;
    }
    let x_start = (bx0 - r).floor().max(0.0) as usize;
    let y_start = (by0 - r).floor().max(0.0) as usize;
    let x_end = ((bx1 + r).ceil() as usize + 1).min(width);
    let y_end = ((by1 + r).ceil() as usize + 1).min(height);
    let n = samples.max(1);
    let step = 1.0 / n as f64;
    for y in y_start..y_end {
        for x in x_start..x_end {
            let mut hits = 0usize;
            for sy in 0..n {
                for sx in 0..n {
                    let p = (x as f64 + (sx as f64 + 0.5) * step, y as f64 + (sy as f64 + 0.5) * step);
                    if segments.iter().any(|&[a, b]| dist2_to_segment(p, a, b) <= r2) {
                        hits += 1;
                    }
                }
            }
            let c = hits as f64 / (n * n) as f64;
            let cell = &mut coverage[y * width + x];
            *cell = cell.max(c);
        }
    }
}

/// Binary rendering of one symbol filling a `width x height` box.
pub fn render_symbol(symbol: char, width: usize, height: usize, style: FontStyle) -> Option<BinaryImage> {
    let r = style.stroke * height as f64 / 2.0;
    let segs = placed_segments(symbol, 0.0, 0.0, width as f64, height as f64, r)?;
    let mut cov = vec![0.0; width * height];
    paint_coverage(&mut cov, width, height, &segs, r, 1);
    BinaryImage::new(width, height, cov.iter().map(|&c| (c >= 0.5) as u8).collect()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::connected_components;

    #[test]
    fn every_symbol_is_defined_and_connected() {
        let style = FontStyle::default();
        for c in SYMBOLS.chars() {
            let img = render_symbol(c, 48, 100, style).unwrap();
            let (_, regions) = connected_components(&img);
            assert_eq!(regions.len(), 1, "symbol {c} renders as {} pieces", regions.len());
        }
        assert!(strokes('a').is_none());
        assert!(strokes('-').is_none());
    }

    #[test]
    fn renderings_are_pairwise_distinct() {
        let style = FontStyle::default();
        let imgs: Vec<_> = SYMBOLS.chars().map(|c| render_symbol(c, 24, 42, style).unwrap()).collect();
        for i in 0..imgs.len() {
            for j in i + 1..imgs.len() {
                assert_ne!(imgs[i], imgs[j]);
            }
        }
    }
}
