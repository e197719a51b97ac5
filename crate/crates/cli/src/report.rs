use std::fmt;
use std::path::PathBuf;

use platetrace_core::BBox;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub read_ms: f64,
    pub extraction_ms: f64,
    pub segmentation_ms: f64,
    pub recognition_ms: f64,
}

/// Outcome for one image. Pipeline failures are recorded here rather than
/// raised.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub path: PathBuf,
    pub expected: Option<String>,
    pub extraction_ok: bool,
    pub bbox: Option<BBox>,
    pub segmentation_ok: bool,
    pub glyph_count: usize,
    pub recognition_ok: bool,
    pub recognized: Option<String>,
    /// Why the pipeline stopped early, if it did.
    pub failure: Option<String>,
    pub timing: StageTiming,
}

/// `successes / total`, shown as `93/95 (97.89%)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub successes: usize,
    pub total: usize,
}

impl Rate {
    /// In `[0, 1]`; `None` without data.
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.successes as f64 / self.total as f64)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{}/{} ({:.2}%)", self.successes, self.total, 100.0 * v),
            None => write!(f, "0/0 (no data)"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub images: usize,
    pub extraction: Rate,
    pub segmentation: Rate,
    pub recognition: Rate,
    /// Manifest rows that could not be parsed.
    pub skipped_rows: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub images: Vec<ImageReport>,
    pub totals: Totals,
}

impl RunReport {
    /// Totals are always derived from the entries.
    pub fn new(images: Vec<ImageReport>, skipped_rows: usize) -> Self {
        let n = images.len();
        let count = |f: fn(&ImageReport) -> bool| Rate {
            successes: images.iter().filter(|r| f(r)).count(),
            total: n,
        };
        let totals = Totals {
            images: n,
            extraction: count(|r| r.extraction_ok),
            segmentation: count(|r| r.segmentation_ok),
            recognition: count(|r| r.recognition_ok),
            skipped_rows,
        };
        Self { images, totals }
    }
}

impl fmt::Display for Totals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "images        {}", self.images)?;
        writeln!(f, "extraction    {}", self.extraction)?;
        writeln!(f, "segmentation  {}", self.segmentation)?;
        writeln!(f, "recognition   {}", self.recognition)?;
        if self.skipped_rows > 0 {
            writeln!(f, "skipped rows  {}", self.skipped_rows)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_formats() {
        assert_eq!(Rate { successes: 93, total: 95 }.to_string(), "93/95 (97.89%)");
        assert_eq!(Rate::default().to_string(), "0/0 (no data)");
        assert_eq!(Rate { successes: 3, total: 3 }.value(), Some(1.0));
    }

    #[test]
    fn totals_sum_entries() {
        let ok = ImageReport {
            extraction_ok: true,
            segmentation_ok: true,
            ..Default::default()
        };
        let r = RunReport::new(vec![ok.clone(), ok, ImageReport::default()], 1);
        assert_eq!(r.totals.extraction, Rate { successes: 2, total: 3 });
        assert_eq!(r.totals.recognition, Rate { successes: 0, total: 3 });
        assert!(r.totals.to_string().contains("skipped rows  1"));
    }
}
