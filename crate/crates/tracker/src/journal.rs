//! Write-ahead journal plus snapshot.
//!
//! `journal.log` is a sequence of records, each
//!
//! ```text
//! u32 LE  payload length
//! u32 LE  CRC-32 of the payload
//! [u8]    payload: one JSON `Entry`
//! ```
//!
//! Every append is flushed to disk before the operation is acknowledged.
//! A record cut short by a crash is dropped on open; a damaged record with
//! intact records after it is reported as corruption.
//!
//! `snapshot.json` holds the full state as of some sequence number. It is
//! written to a temporary file and renamed into place, after which the
//! journal is emptied; journal entries at or below the snapshot's sequence
//! are skipped on replay.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrackerError};
use crate::model::{AlertKey, TraceRecord, WatchEntry};

pub const JOURNAL_FILE: &str = "journal.log";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
const HEADER: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    /// A sighting together with the alerts it triggers, committed as one.
    Trace { trace: TraceRecord, alerts: Vec<AlertKey> },
    Watch { watch: WatchEntry },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub seq: u64,
    pub event: Event,
}

pub fn encode(entry: &Entry) -> Vec<u8> {
    let payload = serde_json::to_vec(entry).expect("entry serialises");
    let mut out = Vec::with_capacity(HEADER + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

/// Decoded entries and the byte length of the valid prefix.
pub fn decode(bytes: &[u8], path: &Path) -> Result<(Vec<Entry>, usize)> {
    let mut entries = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let rest = &bytes[pos..];
        if rest.len() < HEADER {
            break;
        }
        let len = u32::from_le_bytes(rest[0..4].try_into().unwrap()) as usize;
        let crc = u32::from_le_bytes(rest[4..8].try_into().unwrap());
        if rest.len() < HEADER + len {
            break;
        }
        let payload = &rest[HEADER..HEADER + len];
        let parsed = (crc32fast::hash(payload) == crc)
            .then(|| serde_json::from_slice::<Entry>(payload).ok())
            .flatten();
        match parsed {
            Some(e) => entries.push(e),
            None if pos + HEADER + len == bytes.len() => break,
            None => {
                return Err(TrackerError::Corrupt {
                    path: path.to_path_buf(),
                    offset: pos as u64,
                    reason: "checksum or payload mismatch".into(),
                })
            }
        }
        pos += HEADER + len;
    }
    Ok((entries, pos))
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    /// Opens (creating if needed) and returns the intact entries.
    pub fn open(path: &Path) -> Result<(Self, Vec<Entry>)> {
        let err = |e| TrackerError::storage(path, e);
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path).map_err(err)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(err)?;
        let (entries, valid) = decode(&bytes, path)?;
        if valid < bytes.len() {
            log::warn!("dropping {} bytes of incomplete record at end of {}", bytes.len() - valid, path.display());
            file.set_len(valid as u64).map_err(err)?;
            file.sync_all().map_err(err)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            entries,
        ))
    }

    pub fn append(&mut self, entry: &Entry) -> Result<()> {
        let err = |e| TrackerError::storage(&self.path, e);
        self.file.write_all(&encode(entry)).map_err(err)?;
        self.file.sync_data().map_err(err)
    }

    pub fn clear(&mut self) -> Result<()> {
        let err = |e| TrackerError::storage(&self.path, e);
        self.file.set_len(0).map_err(err)?;
        self.file.sync_all().map_err(err)
    }
}

pub fn read_snapshot<S: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<S>> {
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map(Some).map_err(|e| TrackerError::Corrupt {
            path: path.to_path_buf(),
            offset: e.column() as u64,
            reason: e.to_string(),
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(TrackerError::storage(path, e)),
    }
}

pub fn write_snapshot<S: Serialize>(path: &Path, state: &S) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    let err = |p: &Path, e| TrackerError::storage(p, e);
    let mut f = File::create(&tmp).map_err(|e| err(&tmp, e))?;
    f.write_all(&serde_json::to_vec(state).expect("state serialises")).map_err(|e| err(&tmp, e))?;
    f.sync_all().map_err(|e| err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| err(path, e))?;
    if let Some(dir) = path.parent() {
        // Make the rename itself durable.
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}
