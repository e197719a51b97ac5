use std::time::Duration;

use crate::clock::{Clock, Shutdown};
use crate::config::IngestConfig;
use crate::error::Result;
use crate::plate_file;
use crate::sink::{SinkError, TraceSink};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PollReport {
    /// Lines the endpoint acknowledged.
    pub shipped: usize,
    /// Lines that are not a plate number, skipped.
    pub malformed: usize,
    /// Lines the endpoint refused outright, skipped.
    pub rejected: usize,
    /// Whether the batch was removed from the file.
    pub consumed: bool,
}

pub fn is_plate(line: &str) -> bool {
    !line.is_empty() && line.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
}

fn post_with_retry(cfg: &IngestConfig, sink: &dyn TraceSink, clock: &dyn Clock, number: &str) -> Result<(), SinkError> {
    let mut wait = cfg.backoff;
    let mut attempt = 0;
    loop {
        match sink.post(number, &cfg.camera_id) {
            Err(SinkError::Transient(e)) if attempt < cfg.retry_max => {
                log::debug!("post {number} failed ({e}); retrying in {wait:?}");
                clock.sleep(wait, None);
                wait *= 2;
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// Ships every complete line in the plate file. The lines are removed only
/// when all of them were acknowledged; otherwise the file is left as it was
/// and the whole batch goes again next time.
pub fn poll_once(cfg: &IngestConfig, sink: &dyn TraceSink, clock: &dyn Clock) -> Result<PollReport> {
    let batch = plate_file::read_batch(&cfg.watch_path)?;
    let mut report = PollReport::default();
    for raw in &batch.lines {
        let line = raw.trim();
        if !is_plate(line) {
            if !line.is_empty() {
                log::warn!("skipping malformed line {line:?}");
            }
            report.malformed += 1;
            continue;
        }
        match post_with_retry(cfg, sink, clock, line) {
            Ok(()) => report.shipped += 1,
            Err(SinkError::Rejected(e)) => {
                log::warn!("service refused {line}: {e}");
                report.rejected += 1;
            }
            Err(SinkError::Transient(e)) => {
                log::warn!("giving up on this poll at {line}: {e}");
                return Ok(report);
            }
        }
    }
    if batch.len > 0 {
        plate_file::consume(&cfg.watch_path, batch.len)?;
        report.consumed = true;
    }
    Ok(report)
}

/// Polls at `start + k * interval` for k = 1, 2, ... until `stop` fires,
/// then returns after any poll in progress. Returns the times at which each
/// poll started, at most `max_polls` of them.
pub fn run_for(cfg: &IngestConfig, sink: &dyn TraceSink, clock: &dyn Clock, stop: &Shutdown, max_polls: usize) -> Vec<Duration> {
    let start = clock.now();
    let mut starts = Vec::new();
    let mut k: u32 = 1;
    while starts.len() < max_polls {
        let due = start + cfg.interval * k;
        let now = clock.now();
        if now < due {
            clock.sleep(due - now, Some(stop));
        }
        if stop.is_triggered() {
            break;
        }
        starts.push(clock.now());
        match poll_once(cfg, sink, clock) {
            Ok(r) if r.shipped + r.malformed + r.rejected > 0 => log::info!("poll: {r:?}"),
            Ok(_) => {}
            Err(e) => log::error!("poll failed: {e}"),
        }
        // A poll that overran skips the slots it missed.
        let elapsed = clock.now().saturating_sub(start);
        k = k.max((elapsed.as_nanos() / cfg.interval.as_nanos()) as u32 + 1);
    }
    starts
}

pub fn run_loop(cfg: &IngestConfig, sink: &dyn TraceSink, clock: &dyn Clock, stop: &Shutdown) {
    let mut polls = 0usize;
    while !stop.is_triggered() {
        // Restarting the schedule every few million polls keeps the list of
        // start times bounded.
        polls += run_for(cfg, sink, clock, stop, 1 << 20).len();
    }
    log::info!("ingest stopped after {polls} polls");
}
