//! The plate file shared by the recogniser (appends) and the poller (reads
//! a prefix, later removes it). Both sides hold an exclusive advisory lock
//! while touching the file, so a removal never eats a line appended after
//! the read.

use std::fs::{File, OpenOptions};
use std::io::{ErrorKind, Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::error::{IngestError, Result};

/// Appends each item as a line, atomically with respect to the poller.
pub fn append_lines<S: AsRef<str>>(path: &Path, lines: &[S]) -> Result<()> {
    let err = |e| IngestError::io(path, e);
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(err)?;
    f.lock().map_err(err)?;
    let mut buf = String::new();
    for l in lines {
        buf.push_str(l.as_ref());
        buf.push('\n');
    }
    f.write_all(buf.as_bytes()).map_err(err)?;
    f.flush().map_err(err)
    // Dropping the handle releases the lock.
}

/// The complete lines at the head of the file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Batch {
    pub lines: Vec<String>,
    /// Bytes covered by `lines`, newlines included.
    pub len: u64,
}

fn open_locked(path: &Path) -> Result<Option<File>> {
    match OpenOptions::new().read(true).write(true).open(path) {
        Ok(f) => {
            f.lock().map_err(|e| IngestError::io(path, e))?;
            Ok(Some(f))
        }
        Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
        Err(e) => Err(IngestError::io(path, e)),
    }
}

/// Reads every complete line; a trailing partial line is left for later.
/// A missing file is an empty batch.
pub fn read_batch(path: &Path) -> Result<Batch> {
    let Some(mut f) = open_locked(path)? else {
        return Ok(Batch::default());
    };
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(|e| IngestError::io(path, e))?;
    let end = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let lines = String::from_utf8_lossy(&bytes[..end]).lines().map(str::to_string).collect();
    Ok(Batch { lines, len: end as u64 })
}

/// Removes the first `len` bytes, keeping anything appended since the batch
/// was read.
pub fn consume(path: &Path, len: u64) -> Result<()> {
    if len == 0 {
        return Ok(());
    }
    let err = |e| IngestError::io(path, e);
    let Some(mut f) = open_locked(path)? else {
        return Err(err(std::io::Error::new(ErrorKind::NotFound, "plate file vanished before it was consumed")));
    };
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(err)?;
    if (bytes.len() as u64) < len {
        return Err(err(std::io::Error::new(ErrorKind::InvalidData, "plate file shrank under the poller")));
    }
    let rest = &bytes[len as usize..];
    f.seek(SeekFrom::Start(0)).map_err(err)?;
    f.write_all(rest).map_err(err)?;
    f.set_len(rest.len() as u64).map_err(err)?;
    f.sync_data().map_err(err)
}
