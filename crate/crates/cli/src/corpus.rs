use std::path::Path;

use platetrace_core::imaging::io::write_png;
use platetrace_core::synth::{corpus, render_scene, CorpusRanges};
use platetrace_core::BBox;
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::manifest::write_manifest;

pub const MANIFEST: &str = "manifest.csv";

/// Renders `count` frames as `frame_NNN.png` plus `manifest.csv` into `out`.
/// The same seed always gives the same corpus.
pub fn generate(out: &Path, count: usize, seed: u64, ranges: &CorpusRanges) -> Result<Vec<(String, String, BBox)>> {
    std::fs::create_dir_all(out).map_err(|e| CliError::file(out, e))?;
    let specs = corpus(count, seed, ranges);
    let rows = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let frame = render_scene(spec)?;
            let name = format!("frame_{i:03}.png");
            write_png(&out.join(&name), &frame.gray)?;
            Ok((name, frame.text, frame.plate_bbox))
        })
        .collect::<Result<Vec<_>>>()?;
    write_manifest(&out.join(MANIFEST), &rows)?;
    Ok(rows)
}
