//! Synthetic vehicle frames with known plates, used by the corpus generator
//! and the end-to-end tests.
//!
//! A scene is composed as reflectance (sky, full-width car body, headlights,
//! bumper stripe, plate with glyphs), then lit by a linear illumination gain
//! ramp, then corrupted with faint uniform noise and salt-and-pepper noise.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::font::{self, FontStyle};
use crate::imaging::{BBox, GrayImage};

/// Glyph placement on a plate, in units of plate height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateLayout {
    pub glyph_height: f64,
    pub glyph_gap: f64,
    pub margin: f64,
    pub font: FontStyle,
}

impl Default for PlateLayout {
    fn default() -> Self {
        Self {
            glyph_height: 0.6,
            glyph_gap: 0.09,
            margin: 0.14,
            font: FontStyle::default(),
        }
    }
}

impl PlateLayout {
    pub fn glyph_width(&self, plate_h: f64) -> f64 {
        self.glyph_height * plate_h * self.font.aspect
    }

    pub fn plate_width(&self, chars: usize, plate_h: usize) -> usize {
        let h = plate_h as f64;
        let n = chars as f64;
        let w = n * self.glyph_width(h) + (n - 1.0).max(0.0) * self.glyph_gap * h + 2.0 * self.margin * h;
        w.round() as usize
    }

    /// Pixel-space stroke segments of every glyph, plus the stroke radius,
    /// for a plate whose top-left corner is at `(x0, y0)`.
    fn glyph_segments(&self, text: &str, x0: f64, y0: f64, plate_w: f64, plate_h: f64) -> Result<(Vec<Vec<[(f64, f64); 2]>>, f64)> {
        let gh = self.glyph_height * plate_h;
        let gw = self.glyph_width(plate_h);
        let gap = self.glyph_gap * plate_h;
        let n = text.chars().count() as f64;
        let run = n * gw + (n - 1.0).max(0.0) * gap;
        let left = x0 + (plate_w - run) / 2.0;
        let top = y0 + (plate_h - gh) / 2.0;
        let r = self.font.stroke * gh / 2.0;
        let mut all = Vec::new();
        for (i, c) in text.chars().enumerate() {
            let gx = left + i as f64 * (gw + gap);
            let segs = font::placed_segments(c, gx, top, gw, gh, r)
                .ok_or_else(|| Error::parameter("text", format!("unsupported plate symbol '{c}'")))?;
            all.push(segs);
        }
        Ok((all, r))
    }
}

/// Full description of one synthetic frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub text: String,
    pub plate_height: usize,
    pub plate_x: usize,
    pub plate_y: usize,
    pub plate_level: f64,
    pub ink_level: f64,
    pub body_level: f64,
    pub sky_level: f64,
    pub body_top: usize,
    pub headlights: bool,
    pub bumper: bool,
    /// Peak relative illumination change; the gain runs from `1 - a` to `1 + a`.
    pub illumination: f64,
    /// Ramp direction in radians, 0 = left-to-right.
    pub ramp_angle: f64,
    /// Fraction of pixels replaced by salt or pepper.
    pub salt_pepper: f64,
    pub seed: u64,
}

impl SceneSpec {
    /// A clean, centred scene with a plate `plate_height` pixels tall.
    pub fn centered(width: usize, height: usize, text: &str, plate_height: usize) -> Self {
        let layout = PlateLayout::default();
        let plate_w = layout.plate_width(text.chars().count(), plate_height);
        Self {
            width,
            height,
            text: text.to_string(),
            plate_height,
            plate_x: width.saturating_sub(plate_w) / 2,
            plate_y: height.saturating_sub(plate_height) / 2,
            plate_level: 0.85,
            ink_level: 0.0,
            body_level: 0.3,
            sky_level: 0.6,
            body_top: height / 8,
            headlights: true,
            bumper: true,
            illumination: 0.0,
            ramp_angle: 0.0,
            salt_pepper: 0.0,
            seed: 0,
        }
    }

    pub fn plate_bbox(&self) -> BBox {
        let w = PlateLayout::default().plate_width(self.text.chars().count(), self.plate_height);
        BBox::from_xywh(self.plate_x, self.plate_y, w, self.plate_height)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub gray: GrayImage,
    pub plate_bbox: BBox,
    pub text: String,
}

fn fill_rect(buf: &mut [f64], width: usize, bbox: BBox, value: f64) {
    for y in bbox.y_min..=bbox.y_max {
        buf[y * width + bbox.x_min..=y * width + bbox.x_max].fill(value);
    }
}

/// Plate reflectance alone: `plate_level` background with `ink_level`
/// glyphs, antialiased with 3x3 supersampling.
pub fn render_plate(text: &str, plate_height: usize, plate_level: f64, ink_level: f64) -> Result<GrayImage> {
    let layout = PlateLayout::default();
    let w = layout.plate_width(text.chars().count(), plate_height);
    let mut coverage = vec![0.0; w * plate_height];
    let (glyphs, r) = layout.glyph_segments(text, 0.0, 0.0, w as f64, plate_height as f64)?;
    for segs in &glyphs {
        font::paint_coverage(&mut coverage, w, plate_height, segs, r, 3);
    }
    GrayImage::new(w, plate_height, coverage.iter().map(|&c| plate_level * (1.0 - c) + ink_level * c).collect())
}

pub fn render_scene(spec: &SceneSpec) -> Result<SyntheticFrame> {
    let (w, h) = (spec.width, spec.height);
    let plate = spec.plate_bbox();
    if plate.x_max >= w || plate.y_max >= h {
        return Err(Error::parameter("plate", format!("plate {plate:?} does not fit a {w}x{h} frame")));
    }
    let hp = spec.plate_height as f64;
    let mut refl = vec![0.0; w * h];

    for y in 0..h {
        let v = if y < spec.body_top {
            spec.sky_level + 0.05 * (y as f64 / h as f64)
        } else {
            spec.body_level - 0.03 * ((y - spec.body_top) as f64 / h as f64)
        };
        refl[y * w..(y + 1) * w].fill(v);
    }

    if spec.headlights {
        let radius = 0.4 * hp;
        let cy = plate.y_min as f64 + 0.2 * hp;
        let gap = 25.0 + radius;
        for cx in [plate.x_min as f64 - gap, plate.x_max as f64 + gap] {
            let y0 = (cy - radius).floor().max(0.0) as usize;
            let y1 = ((cy + radius).ceil() as usize).min(h - 1);
            for y in y0..=y1 {
                for x in 0..w {
                    let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                    if dx * dx + dy * dy <= radius * radius {
                        refl[y * w + x] = 0.92;
                    }
                }
            }
        }
    }

    if spec.bumper {
        let top = plate.y_max + (0.5 * hp) as usize + 20;
        let thick = ((0.15 * hp) as usize).max(6);
        if top + thick + 3 < h {
            fill_rect(&mut refl, w, BBox::from_xywh(0, top, w, thick), 0.08);
        }
    }

    fill_rect(&mut refl, w, plate, spec.plate_level);
    let layout = PlateLayout::default();
    let (glyphs, r) = layout.glyph_segments(&spec.text, plate.x_min as f64, plate.y_min as f64, plate.width() as f64, hp)?;
    let mut coverage = vec![0.0; w * h];
    for segs in &glyphs {
        font::paint_coverage(&mut coverage, w, h, segs, r, 3);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (cos, sin) = (spec.ramp_angle.cos(), spec.ramp_angle.sin());
    let norm = cos.abs() + sin.abs();
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let c = coverage[i];
            let base = refl[i] * (1.0 - c) + spec.ink_level * c;
            let u = 2.0 * x as f64 / (w - 1).max(1) as f64 - 1.0;
            let v = 2.0 * y as f64 / (h - 1).max(1) as f64 - 1.0;
            let ramp = (u * cos + v * sin) / norm;
            let lit = base * (1.0 + spec.illumination * ramp);
            let noisy = lit + rng.gen_range(-0.004..0.004);
            data.push(noisy.clamp(0.0, 1.0));
        }
    }
    if spec.salt_pepper > 0.0 {
        for v in data.iter_mut() {
            if rng.gen_bool(spec.salt_pepper.min(1.0)) {
                *v = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
            }
        }
    }

    Ok(SyntheticFrame {
        gray: GrayImage::new(w, h, data)?,
        plate_bbox: plate,
        text: spec.text.clone(),
    })
}

const STATE_CODES: [&str; 12] = ["TN", "KA", "AP", "KL", "MH", "DL", "TS", "GJ", "UP", "WB", "RJ", "PB"];
const LETTERS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Indian-format plate: state code, two digits, two series letters, four
/// digits (`TN23AL0322`).
pub fn random_plate_text<R: Rng>(rng: &mut R) -> String {
    let mut s = String::with_capacity(10);
    s.push_str(STATE_CODES.choose(rng).expect("non-empty"));
    for _ in 0..2 {
        s.push(char::from(b'0' + rng.gen_range(0..10)));
    }
    for _ in 0..2 {
        s.push(char::from(*LETTERS.choose(rng).expect("non-empty")));
    }
    for _ in 0..4 {
        s.push(char::from(b'0' + rng.gen_range(0..10)));
    }
    s
}

/// Variation ranges for [`random_scene`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusRanges {
    pub width: usize,
    pub height: usize,
    /// Plate height as a fraction of frame height.
    pub plate_frac: (f64, f64),
    pub max_illumination: f64,
    pub max_salt_pepper: f64,
}

impl Default for CorpusRanges {
    fn default() -> Self {
        Self {
            width: 800,
            height: 450,
            plate_frac: (0.08, 0.25),
            max_illumination: 0.3,
            max_salt_pepper: 0.01,
        }
    }
}

pub fn random_scene<R: Rng>(rng: &mut R, ranges: &CorpusRanges) -> SceneSpec {
    let (w, h) = (ranges.width, ranges.height);
    let text = random_plate_text(rng);
    let frac = rng.gen_range(ranges.plate_frac.0..=ranges.plate_frac.1);
    let hp = ((frac * h as f64).round() as usize).max(8);
    let plate_w = PlateLayout::default().plate_width(text.chars().count(), hp);
    let hpf = hp as f64;

    let body_top = rng.gen_range(h / 20..=h / 10);
    let min_y = body_top + (0.6 * hpf) as usize + 20;
    let bumper_room = (0.5 * hpf) as usize + 20 + ((0.15 * hpf) as usize).max(6) + 5;
    let max_y = h.saturating_sub(hp + bumper_room).max(min_y);
    let plate_y = rng.gen_range(min_y..=max_y);
    let max_x = w.saturating_sub(plate_w + 25).max(25);
    let plate_x = rng.gen_range(25..=max_x);

    let angle_base = if rng.gen_bool(0.5) { 0.0 } else { std::f64::consts::PI };
    SceneSpec {
        width: w,
        height: h,
        text,
        plate_height: hp,
        plate_x,
        plate_y,
        plate_level: rng.gen_range(0.75..0.95),
        ink_level: 0.0,
        body_level: rng.gen_range(0.2..0.4),
        sky_level: rng.gen_range(0.5..0.7),
        body_top,
        headlights: rng.gen_bool(0.7),
        bumper: rng.gen_bool(0.7),
        illumination: rng.gen_range(0.0..=ranges.max_illumination),
        ramp_angle: angle_base + rng.gen_range(-0.5..0.5),
        salt_pepper: rng.gen_range(0.0..=ranges.max_salt_pepper),
        seed: rng.gen(),
    }
}

/// `count` scenes drawn deterministically from `seed`.
pub fn corpus(count: usize, seed: u64, ranges: &CorpusRanges) -> Vec<SceneSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_scene(&mut rng, ranges)).collect()
}

/// Adds a left-to-right additive ramp from `-amplitude` to `+amplitude`,
/// clamping into `[0, 1]`.
pub fn add_horizontal_ramp(img: &GrayImage, amplitude: f64) -> GrayImage {
    let w = img.width();
    GrayImage::from_fn(w, img.height(), |x, y| {
        let u = 2.0 * x as f64 / (w - 1).max(1) as f64 - 1.0;
        (img.get(x, y) + amplitude * u).clamp(0.0, 1.0)
    })
    .expect("same dims")
}
