//! Template-matching character recognition.
//!
//! A glyph is resized to the canonical template size and compared with every
//! template by the correlation of the two bitmaps mapped to +/-1. The glyph
//! is also tried at the eight one-pixel offsets around the aligned position,
//! scoring only the overlapping area, and the best offset counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::font::{self, FontStyle, SYMBOLS};
use crate::imaging::{io, resize_nearest, BinaryImage};
use crate::segmentation::Glyph;

pub const CANON_H: usize = 42;
pub const CANON_W: usize = 24;
pub const BUILTIN_STYLE: &str = "stroke-sans";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub symbol: char,
    pub bitmap: BinaryImage,
    pub style_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    canon_h: usize,
    canon_w: usize,
    templates: Vec<Template>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub symbol: char,
    pub score: f64,
    pub runner_up_margin: f64,
}

fn is_symbol(c: char) -> bool {
    c.is_ascii_digit() || c.is_ascii_uppercase()
}

impl TemplateSet {
    /// Validates coverage of all 36 symbols, canonical size and non-empty ink.
    pub fn new(canon_h: usize, canon_w: usize, mut templates: Vec<Template>) -> Result<Self> {
        if canon_h == 0 || canon_w == 0 {
            return Err(Error::InvalidTemplates(format!("canonical size {canon_w}x{canon_h}")));
        }
        for t in &templates {
            if !is_symbol(t.symbol) {
                return Err(Error::InvalidTemplates(format!("symbol '{}' is not in [A-Z0-9]", t.symbol)));
            }
            if t.bitmap.dims() != (canon_w, canon_h) {
                return Err(Error::InvalidTemplates(format!(
                    "template '{}'/{} is {:?}, expected {canon_w}x{canon_h}",
                    t.symbol,
                    t.style_id,
                    t.bitmap.dims()
                )));
            }
            if t.bitmap.is_empty() {
                return Err(Error::InvalidTemplates(format!("template '{}'/{} has no ink", t.symbol, t.style_id)));
            }
        }
        if let Some(missing) = SYMBOLS.chars().find(|&c| !templates.iter().any(|t| t.symbol == c)) {
            return Err(Error::MissingSymbol(missing));
        }
        templates.sort_by(|a, b| (a.symbol, &a.style_id).cmp(&(b.symbol, &b.style_id)));
        Ok(Self {
            canon_h,
            canon_w,
            templates,
        })
    }

    /// Templates rendered from the bundled stroke font.
    pub fn builtin() -> Self {
        let templates = SYMBOLS
            .chars()
            .map(|c| Template {
                symbol: c,
                bitmap: render_template(c, CANON_H, CANON_W),
                style_id: BUILTIN_STYLE.to_string(),
            })
            .collect();
        Self::new(CANON_H, CANON_W, templates).expect("builtin font covers every symbol")
    }

    /// Loads `<dir>/<symbol>/<style>.<ext>` at the default canonical size.
    pub fn load(dir: &Path) -> Result<Self> {
        Self::load_sized(dir, CANON_H, CANON_W)
    }

    pub fn load_sized(dir: &Path, canon_h: usize, canon_w: usize) -> Result<Self> {
        let unreadable = |path: &Path, e: std::io::Error| Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        let mut by_symbol: BTreeMap<char, Vec<std::path::PathBuf>> = BTreeMap::new();
        for entry in fs::read_dir(dir).map_err(|e| unreadable(dir, e))? {
            let entry = entry.map_err(|e| unreadable(dir, e))?;
            let path = entry.path();
            if !path.is_dir() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            let mut chars = name.chars();
            let symbol = match (chars.next(), chars.next()) {
                (Some(c), None) if is_symbol(c) => c,
                _ => {
                    warn!("ignoring template directory {}", path.display());
                    continue;
                }
            };
            let mut files = Vec::new();
            for f in fs::read_dir(&path).map_err(|e| unreadable(&path, e))? {
                let f = f.map_err(|e| unreadable(&path, e))?.path();
                if f.is_file() {
                    files.push(f);
                }
            }
            by_symbol.entry(symbol).or_default().extend(files);
        }

        let mut templates = Vec::new();
        for (symbol, files) in by_symbol {
            for file in files {
                let raw = io::read_binary(&file, 0.5)?;
                let bitmap = if raw.dims() == (canon_w, canon_h) {
                    raw
                } else {
                    resize_nearest(&raw, canon_h, canon_w)?
                };
                let style_id = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                templates.push(Template {
                    symbol,
                    bitmap,
                    style_id,
                });
            }
        }
        Self::new(canon_h, canon_w, templates)
    }

    /// Writes every template as `<dir>/<symbol>/<style>.pgm`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        for t in &self.templates {
            let path = dir.join(t.symbol.to_string()).join(format!("{}.pgm", t.style_id));
            io::write_binary_pgm(&path, &t.bitmap)?;
        }
        Ok(())
    }

    pub fn canon_h(&self) -> usize {
        self.canon_h
    }

    pub fn canon_w(&self) -> usize {
        self.canon_w
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn canonical(&self, bitmap: &BinaryImage) -> Result<BinaryImage> {
        resize_nearest(bitmap, self.canon_h, self.canon_w)
    }
}

/// Renders a symbol large, crops it tight and scales it to the canonical
/// size, the same path a segmented glyph takes.
pub fn render_template(symbol: char, canon_h: usize, canon_w: usize) -> BinaryImage {
    let style = FontStyle::default();
    let h = 8 * canon_h;
    let w = (h as f64 * style.aspect).round() as usize;
    let big = font::render_symbol(symbol, w, h, style).expect("symbol in font");
    let tight = big.crop(big.ink_bbox().expect("symbol has ink")).expect("bbox inside raster");
    resize_nearest(&tight, canon_h, canon_w).expect("positive size")
}

/// Mean of the pixelwise product of two equally sized bitmaps mapped to
/// +/-1. Ranges over `[-1, 1]`.
pub fn correlation(a: &BinaryImage, b: &BinaryImage) -> f64 {
    assert_eq!(a.dims(), b.dims(), "correlation needs equal sizes");
    let n = a.data().len() as i64;
    let agree = a.data().iter().zip(b.data()).filter(|(x, y)| x == y).count() as i64;
    (2 * agree - n) as f64 / n as f64
}

/// Correlation of `a` shifted by `(dx, dy)` against `b`, over the overlap.
fn shifted_correlation(a: &BinaryImage, b: &BinaryImage, dx: isize, dy: isize) -> f64 {
    let (w, h) = (a.width() as isize, a.height() as isize);
    let mut n = 0i64;
    let mut agree = 0i64;
    for y in 0.max(-dy)..h.min(h - dy) {
        for x in 0.max(-dx)..w.min(w - dx) {
            n += 1;
            if a.get(x as usize, y as usize) == b.get((x + dx) as usize, (y + dy) as usize) {
                agree += 1;
            }
        }
    }
    (2 * agree - n) as f64 / n as f64
}

/// Best overlap-normalised correlation over the aligned position and the
/// eight one-pixel offsets. Symmetric in its arguments.
pub fn match_score(a: &BinaryImage, b: &BinaryImage) -> f64 {
    assert_eq!(a.dims(), b.dims(), "match_score needs equal sizes");
    let mut best = f64::NEG_INFINITY;
    for dy in -1..=1 {
        for dx in -1..=1 {
            best = best.max(shifted_correlation(a, b, dx, dy));
        }
    }
    best
}

/// Classifies a canonical-size bitmap. `None` when the set is empty.
pub fn classify(canonical: &BinaryImage, ts: &TemplateSet) -> Option<MatchResult> {
    let mut per_symbol: BTreeMap<char, f64> = BTreeMap::new();
    for t in &ts.templates {
        let s = match_score(canonical, &t.bitmap);
        per_symbol.entry(t.symbol).and_modify(|best| *best = best.max(s)).or_insert(s);
    }
    // BTreeMap iterates in symbol order, so strict `>` keeps the smallest
    // symbol on ties.
    let mut best: Option<(char, f64)> = None;
    for (&sym, &score) in &per_symbol {
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((sym, score));
        }
    }
    let (symbol, score) = best?;
    let runner_up = per_symbol
        .iter()
        .filter(|(&s, _)| s != symbol)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(MatchResult {
        symbol,
        score,
        runner_up_margin: if runner_up.is_finite() { score - runner_up } else { 0.0 },
    })
}

pub fn match_glyph(g: &Glyph, ts: &TemplateSet) -> Result<MatchResult> {
    if g.bitmap.is_empty() {
        return Err(Error::EmptyGlyph { index: g.order_index });
    }
    let canonical = ts.canonical(&g.bitmap)?;
    classify(&canonical, ts).ok_or_else(|| Error::InvalidTemplates("empty template set".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recognition {
    pub text: String,
    pub matches: Vec<MatchResult>,
}

/// Concatenates the best symbol of each glyph in order, without separators.
pub fn recognize_plate(glyphs: &[Glyph], ts: &TemplateSet) -> Result<Recognition> {
    let mut ordered: Vec<&Glyph> = glyphs.iter().collect();
    ordered.sort_by_key(|g| g.order_index);
    let matches = ordered.iter().map(|g| match_glyph(g, ts)).collect::<Result<Vec<_>>>()?;
    Ok(Recognition {
        text: matches.iter().map(|m| m.symbol).collect(),
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{complement, BBox};

    fn glyph(bitmap: BinaryImage, index: usize) -> Glyph {
        let (w, h) = bitmap.dims();
        Glyph {
            bitmap,
            bbox: BBox::from_xywh(0, 0, w, h),
            order_index: index,
        }
    }

    #[test]
    fn self_match_and_anti_correlation() {
        let ts = TemplateSet::builtin();
        let a = ts.templates().iter().find(|t| t.symbol == 'A').unwrap().bitmap.clone();
        let m = match_glyph(&glyph(a.clone(), 0), &ts).unwrap();
        assert_eq!(m.symbol, 'A');
        assert_eq!(m.score, 1.0);
        assert!(m.runner_up_margin > 0.0);
        assert_eq!(correlation(&complement(&a), &a), -1.0);
    }

    #[test]
    fn every_template_wins_against_the_rest() {
        let ts = TemplateSet::builtin();
        for t in ts.templates() {
            let m = classify(&t.bitmap, &ts).unwrap();
            assert_eq!(m.symbol, t.symbol);
            assert_eq!(m.score, 1.0);
        }
    }

    #[test]
    fn ties_go_to_smallest_symbol() {
        // Two symbols sharing an identical bitmap.
        let base = TemplateSet::builtin();
        let mut templates = base.templates().to_vec();
        let x = templates.iter().find(|t| t.symbol == 'X').unwrap().bitmap.clone();
        templates.push(Template {
            symbol: 'B',
            bitmap: x.clone(),
            style_id: "dup".into(),
        });
        let ts = TemplateSet::new(CANON_H, CANON_W, templates).unwrap();
        let m = classify(&x, &ts).unwrap();
        assert_eq!(m.symbol, 'B');
        assert_eq!(m.runner_up_margin, 0.0);
    }

    #[test]
    fn empty_glyph_reports_index() {
        let ts = TemplateSet::builtin();
        let empty = BinaryImage::zeros(5, 9).unwrap();
        let ok = glyph(ts.templates()[0].bitmap.clone(), 0);
        let err = recognize_plate(&[ok, glyph(empty, 1)], &ts).unwrap_err();
        assert!(matches!(err, Error::EmptyGlyph { index: 1 }));
        assert_eq!(recognize_plate(&[], &ts).unwrap().text, "");
    }

    #[test]
    fn missing_symbol_detected() {
        let templates: Vec<Template> = TemplateSet::builtin().templates().iter().filter(|t| t.symbol != 'Q').cloned().collect();
        assert!(matches!(TemplateSet::new(CANON_H, CANON_W, templates), Err(Error::MissingSymbol('Q'))));
    }

    #[test]
    fn load_save_round_trip_and_resizing() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TemplateSet::builtin();
        ts.save(dir.path()).unwrap();
        assert_eq!(TemplateSet::load(dir.path()).unwrap(), ts);

        // A double-size file is accepted and scaled back down.
        let big = resize_nearest(&ts.templates()[0].bitmap, 2 * CANON_H, 2 * CANON_W).unwrap();
        let path = dir.path().join("0").join("big.pgm");
        io::write_binary_pgm(&path, &big).unwrap();
        let loaded = TemplateSet::load(dir.path()).unwrap();
        let t = loaded.templates().iter().find(|t| t.style_id == "big").unwrap();
        assert_eq!(t.bitmap.dims(), (CANON_W, CANON_H));
        assert_eq!(t.bitmap, ts.templates()[0].bitmap);

        fs::remove_dir_all(dir.path().join("Q")).unwrap();
        assert!(matches!(TemplateSet::load(dir.path()), Err(Error::MissingSymbol('Q'))));
    }

    #[test]
    fn bundled_directory_matches_builtin() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("templates");
        assert_eq!(TemplateSet::load(&dir).unwrap(), TemplateSet::builtin());
    }
}
