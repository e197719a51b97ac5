use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::error::{Result, TrackerError};
use crate::geo::GeoProvider;
use crate::journal::{self, Entry, Event, Journal};
use crate::model::{normalize_plate, AlertKey, NewWatch, TraceRecord, WatchEntry};
use crate::notify::Notifier;

#[derive(Debug, Clone)]
pub struct TrackerConfig {
    pub data_dir: PathBuf,
    /// Offset applied to every stored timestamp.
    pub timezone: FixedOffset,
    /// Committed operations between snapshots; 0 disables them.
    pub snapshot_every: u64,
}

impl TrackerConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            timezone: FixedOffset::east_opt(0).unwrap(),
            snapshot_every: 1000,
        }
    }
}

/// Committed state. Everything but the indexes is persisted.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct State {
    pub seq: u64,
    pub traces: Vec<TraceRecord>,
    pub watches: Vec<WatchEntry>,
    pub alerts: Vec<AlertKey>,
    #[serde(skip)]
    by_number: HashMap<String, Vec<usize>>,
    #[serde(skip)]
    last_stamp: HashMap<String, DateTime<FixedOffset>>,
}

impl State {
    fn reindex(&mut self) {
        self.by_number.clear();
        self.last_stamp.clear();
        for i in 0..self.traces.len() {
            self.index(i);
        }
    }

    fn index(&mut self, i: usize) {
        let t = &self.traces[i];
        self.by_number.entry(t.number.clone()).or_default().push(i);
        let last = self.last_stamp.entry(t.camera_id.clone()).or_insert(t.time);
        if t.time > *last {
            *last = t.time;
        }
    }

    fn apply(&mut self, entry: Entry) {
        debug_assert_eq!(entry.seq, self.seq + 1);
        self.seq = entry.seq;
        match entry.event {
            Event::Trace { trace, alerts } => {
                self.traces.push(trace);
                self.index(self.traces.len() - 1);
                self.alerts.extend(alerts);
            }
            Event::Watch { watch } => self.watches.push(watch),
        }
    }
}

/// Result of one ingest: the stored record and the alerts it committed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub trace: TraceRecord,
    pub alerts: Vec<AlertKey>,
}

struct Writer {
    journal: Journal,
    since_snapshot: u64,
}

/// The trace store. Mutations go one at a time through the journal; reads
/// see the last committed state and never wait on disk.
pub struct Tracker {
    config: TrackerConfig,
    state: RwLock<State>,
    writer: Mutex<Writer>,
    geo: Arc<dyn GeoProvider>,
    notifier: Arc<dyn Notifier>,
    clock: Arc<dyn Clock>,
}

impl Tracker {
    /// Loads the snapshot, replays the journal after it and opens for writing.
    pub fn open(config: TrackerConfig, geo: Arc<dyn GeoProvider>, notifier: Arc<dyn Notifier>, clock: Arc<dyn Clock>) -> Result<Self> {
        std::fs::create_dir_all(&config.data_dir).map_err(|e| TrackerError::storage(&config.data_dir, e))?;
        let mut state: State = journal::read_snapshot(&config.data_dir.join(journal::SNAPSHOT_FILE))?.unwrap_or_default();
        let journal_path = config.data_dir.join(journal::JOURNAL_FILE);
        let (journal, entries) = Journal::open(&journal_path)?;
        let mut replayed = 0;
        for e in entries {
            if e.seq <= state.seq {
                continue;
            }
            if e.seq != state.seq + 1 {
                return Err(TrackerError::Corrupt {
                    path: journal_path,
                    offset: 0,
                    reason: format!("sequence jumps from {} to {}", state.seq, e.seq),
                });
            }
            state.apply(e);
            replayed += 1;
        }
        state.reindex();
        log::info!(
            "opened {}: {} traces, {} watches, {replayed} replayed",
            config.data_dir.display(),
            state.traces.len(),
            state.watches.len()
        );
        Ok(Self {
            config,
            state: RwLock::new(state),
            writer: Mutex::new(Writer {
                journal,
                since_snapshot: replayed,
            }),
            geo,
            notifier,
            clock,
        })
    }

    pub fn data_dir(&self) -> &Path {
        &self.config.data_dir
    }

    fn commit(&self, w: &mut Writer, event: Event) -> Result<()> {
        let seq = self.state.read().unwrap().seq + 1;
        let entry = Entry { seq, event };
        w.journal.append(&entry)?;
        self.state.write().unwrap().apply(entry);
        w.since_snapshot += 1;
        if self.config.snapshot_every > 0 && w.since_snapshot >= self.config.snapshot_every {
            // The operation is already durable; a failed snapshot only
            // means a longer replay next time.
            if let Err(e) = self.snapshot_locked(w) {
                log::warn!("snapshot failed: {e}");
            }
        }
        Ok(())
    }

    fn snapshot_locked(&self, w: &mut Writer) -> Result<()> {
        let state = self.state.read().unwrap().clone();
        journal::write_snapshot(&self.config.data_dir.join(journal::SNAPSHOT_FILE), &state)?;
        w.journal.clear()?;
        w.since_snapshot = 0;
        Ok(())
    }

    pub fn snapshot(&self) -> Result<()> {
        let mut w = self.writer.lock().unwrap();
        self.snapshot_locked(&mut w)
    }

    /// Stores a sighting, stamped with the camera's location and the current
    /// time, and alerts every watch on that vehicle.
    pub fn ingest_trace(&self, number: &str, camera_id: &str) -> Result<Ingested> {
        let number = normalize_plate(number)?;
        if camera_id.trim().is_empty() {
            return Err(TrackerError::invalid("camera_id", "empty camera id"));
        }
        let location = self.geo.locate(camera_id)?;

        let mut w = self.writer.lock().unwrap();
        let (trace, alerts, watches) = {
            let st = self.state.read().unwrap();
            let now = self.clock.now().with_timezone(&self.config.timezone);
            let time = match st.last_stamp.get(camera_id) {
                Some(&last) if last > now => last,
                _ => now,
            };
            let trace = TraceRecord {
                id: st.traces.len() as u64 + 1,
                number,
                location,
                time,
                camera_id: camera_id.to_string(),
            };
            let watches: Vec<WatchEntry> = st.watches.iter().filter(|w| w.vehicle == trace.number).cloned().collect();
            let alerts = watches
                .iter()
                .map(|w| AlertKey {
                    watch_id: w.id,
                    trace_id: trace.id,
                })
                .collect::<Vec<_>>();
            (trace, alerts, watches)
        };
        self.commit(
            &mut w,
            Event::Trace {
                trace: trace.clone(),
                alerts: alerts.clone(),
            },
        )?;
        drop(w);

        for watch in &watches {
            if let Err(e) = self.notifier.send_alert(watch, &trace) {
                log::error!("alert for watch {} on trace {} not delivered: {e}", watch.id, trace.id);
            }
        }
        Ok(Ingested { trace, alerts })
    }

    pub fn register_watch(&self, new: NewWatch) -> Result<WatchEntry> {
        let new = new.validated()?;
        let mut w = self.writer.lock().unwrap();
        let watch = WatchEntry {
            id: self.state.read().unwrap().watches.len() as u64 + 1,
            vehicle: new.vehicle,
            email: new.email,
            mobile: new.mobile,
            details: new.details,
            created_at: self.clock.now().with_timezone(&self.config.timezone),
        };
        self.commit(&mut w, Event::Watch { watch: watch.clone() })?;
        Ok(watch)
    }

    /// Every sighting of the plate, most recent first.
    pub fn search(&self, number: &str) -> Result<Vec<TraceRecord>> {
        let number = normalize_plate(number)?;
        let st = self.state.read().unwrap();
        let mut hits: Vec<TraceRecord> = st
            .by_number
            .get(&number)
            .map(|ix| ix.iter().map(|&i| st.traces[i].clone()).collect())
            .unwrap_or_default();
        hits.sort_by(|a, b| b.time.cmp(&a.time).then(b.id.cmp(&a.id)));
        Ok(hits)
    }

    /// All watches, oldest first.
    pub fn list_watches(&self) -> Vec<WatchEntry> {
        let mut all = self.state.read().unwrap().watches.clone();
        all.sort_by(|a, b| a.created_at.cmp(&b.created_at).then(a.id.cmp(&b.id)));
        all
    }

    pub fn traces(&self) -> Vec<TraceRecord> {
        self.state.read().unwrap().traces.clone()
    }

    /// Every alert ever committed, in commit order.
    pub fn alerts(&self) -> Vec<AlertKey> {
        self.state.read().unwrap().alerts.clone()
    }

    pub fn seq(&self) -> u64 {
        self.state.read().unwrap().seq
    }
}
