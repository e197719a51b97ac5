use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use platetrace_core::extraction::extract_plate_traced;
use platetrace_core::imaging::io::read_gray;
use platetrace_core::ocr::{recognize_plate, TemplateSet};
use platetrace_core::segmentation::segment_traced;
use platetrace_core::{BBox, GrayImage};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::manifest::Manifest;
use crate::params::PipelineParams;
use crate::report::{ImageReport, RunReport, StageTiming};

/// Minimum overlap with the ground-truth box for extraction to count.
pub const IOU_GATE: f64 = 0.5;

#[derive(Clone)]
pub struct Pipeline {
    pub params: PipelineParams,
    pub templates: Arc<TemplateSet>,
    /// Intermediate rasters go to `<debug_dir>/<image stem>/`.
    pub debug_dir: Option<PathBuf>,
}

/// What the caller knows about the image in advance.
#[derive(Debug, Clone, Default)]
pub struct Truth {
    pub text: Option<String>,
    pub bbox: Option<BBox>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

impl Pipeline {
    pub fn new(params: PipelineParams, templates: Option<&Path>) -> Result<Self> {
        let templates = match templates {
            Some(dir) => TemplateSet::load(dir)?,
            None => TemplateSet::builtin(),
        };
        Ok(Self {
            params,
            templates: Arc::new(templates),
            debug_dir: None,
        })
    }

    /// Runs every stage on an already decoded frame.
    pub fn process(&self, gray: &GrayImage, name: &Path, truth: &Truth) -> Result<ImageReport> {
        let mut report = ImageReport {
            path: name.to_path_buf(),
            expected: truth.text.clone(),
            ..Default::default()
        };
        let debug = self.debug_dir.as_ref().map(|d| d.join(name.file_stem().unwrap_or(name.as_os_str())));
        if let Some(d) = &debug {
            std::fs::create_dir_all(d).map_err(|e| CliError::file(d, e))?;
        }

        let t = Instant::now();
        let trace = extract_plate_traced(gray, &self.params.extraction)?;
        report.timing.extraction_ms = ms(t);
        if let Some(d) = &debug {
            trace.dump(d)?;
        }
        let Some(plate) = trace.plate else {
            report.failure = Some(platetrace_core::Error::NoPlateFound.to_string());
            return Ok(report);
        };
        report.bbox = Some(plate.bbox);
        report.extraction_ok = match truth.bbox {
            Some(b) => plate.bbox.iou(&b) >= IOU_GATE,
            None => true,
        };

        let t = Instant::now();
        let seg = segment_traced(&plate, &self.params.segmentation);
        report.timing.segmentation_ms = ms(t);
        let seg = match seg {
            Ok(s) => s,
            Err(e) => {
                report.failure = Some(e.to_string());
                return Ok(report);
            }
        };
        if let Some(d) = &debug {
            seg.dump(d)?;
        }
        report.glyph_count = seg.glyphs.len();
        report.segmentation_ok = truth.text.as_ref().map_or(true, |t| t.chars().count() == seg.glyphs.len());

        let t = Instant::now();
        let rec = recognize_plate(&seg.glyphs, &self.templates);
        report.timing.recognition_ms = ms(t);
        match rec {
            Ok(r) => {
                report.recognition_ok = truth.text.as_ref().map_or(true, |t| *t == r.text);
                report.recognized = Some(r.text);
            }
            Err(e) => report.failure = Some(e.to_string()),
        }
        Ok(report)
    }

    /// Reads and processes one file. A file that cannot be read is an error;
    /// a frame without a readable plate is a report with failures.
    pub fn run_file(&self, path: &Path, truth: &Truth) -> Result<ImageReport> {
        let t = Instant::now();
        let gray: GrayImage = read_gray(path)?;
        let read_ms = ms(t);
        let mut report = self.process(&gray, path, truth)?;
        report.timing = StageTiming { read_ms, ..report.timing };
        Ok(report)
    }

    /// Processes every manifest row in parallel. Entries come back in
    /// manifest order; unreadable images are reported as failures and also
    /// returned as the first I/O error.
    pub fn run_corpus(&self, manifest: &Manifest) -> (RunReport, Option<CliError>) {
        let results: Vec<Result<ImageReport>> = manifest
            .rows
            .par_iter()
            .map(|row| {
                let truth = Truth {
                    text: Some(row.expected.clone()),
                    bbox: row.bbox,
                };
                self.run_file(&row.path, &truth)
            })
            .collect();
        let mut first_error = None;
        let images = results
            .into_iter()
            .zip(&manifest.rows)
            .map(|(r, row)| match r {
                Ok(rep) => rep,
                Err(e) => {
                    let entry = ImageReport {
                        path: row.path.clone(),
                        expected: Some(row.expected.clone()),
                        failure: Some(e.to_string()),
                        ..Default::default()
                    };
                    first_error.get_or_insert(e);
                    entry
                }
            })
            .collect();
        (RunReport::new(images, manifest.skipped), first_error)
    }
}
