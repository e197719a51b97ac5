//! Corpus manifests: CSV rows `path,expected_plate[,x,y,w,h]`, paths
//! relative to the manifest. A first row starting with `path` is a header.

use std::path::{Path, PathBuf};

use platetrace_core::BBox;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub expected: String,
    pub bbox: Option<BBox>,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
    /// Rows that could not be parsed.
    pub skipped: usize,
}

fn parse_row(rec: &csv::StringRecord, base: &Path) -> Option<ManifestRow> {
    let field = |i: usize| rec.get(i).map(str::trim);
    let (path, expected) = (field(0)?, field(1)?);
    if path.is_empty() || expected.is_empty() {
        return None;
    }
    let bbox = match rec.len() {
        2 => None,
        6 => {
            let n: Vec<usize> = (2..6).map(|i| field(i)?.parse().ok()).collect::<Option<_>>()?;
            if n[2] == 0 || n[3] == 0 {
                return None;
            }
            Some(BBox::from_xywh(n[0], n[1], n[2], n[3]))
        }
        _ => return None,
    };
    Some(ManifestRow {
        path: base.join(path),
        expected: expected.to_string(),
        bbox,
    })
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::file(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Manifest::default();
    for (i, rec) in reader.records().enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) if e.is_io_error() => return Err(CliError::file(path, e)),
            Err(e) => {
                log::warn!("{}: skipping row {}: {e}", path.display(), i + 1);
                out.skipped += 1;
                continue;
            }
        };
        if i == 0 && rec.get(0).map(str::trim) == Some("path") {
            continue;
        }
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        match parse_row(&rec, base) {
            Some(row) => out.rows.push(row),
            None => {
                log::warn!("{}: skipping malformed row {}: {:?}", path.display(), i + 1, rec);
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

/// Writes a manifest with a header; paths are written as given.
pub fn write_manifest(path: &Path, rows: &[(String, String, BBox)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::file(path, e))?;
    let io = |e: csv::Error| CliError::file(path, e);
    w.write_record(["path", "expected_plate", "x", "y", "w", "h"]).map_err(io)?;
    for (p, text, b) in rows {
        w.write_record([p.clone(), text.clone(), b.x_min.to_string(), b.y_min.to_string(), b.width().to_string(), b.height().to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_rows_and_skips_junk() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        std::fs::write(&m, "path,expected_plate,x,y,w,h\na.png,TN23AL0322,1,2,30,10\nb.png,KA01AB1234\nc.png,X,1,2\nd.png,Y,1,2,0,5\n,Z\n").unwrap();
        let got = read_manifest(&m).unwrap();
        assert_eq!(got.rows.len(), 2);
        assert_eq!(got.skipped, 3);
        assert_eq!(got.rows[0].path, dir.path().join("a.png"));
        assert_eq!(got.rows[0].bbox, Some(BBox::from_xywh(1, 2, 30, 10)));
        assert_eq!(got.rows[1].bbox, None);
        assert!(matches!(read_manifest(&dir.path().join("missing.csv")), Err(CliError::File { .. })));
    }
}
