//! A linear-scan model of the trace store and a randomized driver that
//! checks a real store against it.

use std::sync::Arc;

use chrono::{DateTime, Duration, FixedOffset, TimeZone, Utc};
use platetrace_tracker::{AlertKey, Location, ManualClock, NewWatch, TraceRecord, Tracker, WatchEntry};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn ist() -> FixedOffset {
    FixedOffset::east_opt(5 * 3600 + 30 * 60).unwrap()
}

pub fn vellore() -> Location {
    Location {
        latitude: 12.9333,
        longitude: 79.1333,
        label: "Vellore TN IN".into(),
    }
}

/// Sample sightings, local time on 2017-05-28.
pub const SAMPLE_TRACES: [(&str, &str); 5] = [
    ("TN23CB0624", "22:20:05"),
    ("TN23CE0541", "22:23:57"),
    ("TN23FG2217", "22:25:43"),
    ("AP03AE3361", "22:29:54"),
    ("AP03AE3361", "22:39:35"),
];

/// Sample watch entries: vehicle, email, mobile, details.
pub const SAMPLE_WATCHES: [(&str, &str, &str, &str); 2] = [
    ("TN29AE5417", "pradeepreddy0003@gmail.com", "8688114776", "I lost my vehicle near banjala palace."),
    ("TN23CB0624", "pradeepreddy0003@gmail.com", "9994370499", "I lost my vehicle in vellore."),
];

pub fn sample_time(hms: &str) -> DateTime<Utc> {
    let naive = chrono::NaiveDateTime::parse_from_str(&format!("2017-05-28 {hms}"), "%Y-%m-%d %H:%M:%S").unwrap();
    ist().from_local_datetime(&naive).unwrap().with_timezone(&Utc)
}

fn plate(raw: &str) -> Option<String> {
    let mut out = String::new();
    for c in raw.chars() {
        if c == ' ' || c == '\t' || c == '\n' || c == '\r' {
            continue;
        }
        let c = c.to_ascii_uppercase();
        if !(c.is_ascii_digit() || c.is_ascii_uppercase()) {
            return None;
        }
        out.push(c);
    }
    (!out.is_empty()).then_some(out)
}

#[derive(Debug, Default, Clone)]
pub struct ReferenceModel {
    pub traces: Vec<TraceRecord>,
    pub watches: Vec<WatchEntry>,
    pub alerts: Vec<AlertKey>,
}

impl ReferenceModel {
    /// What the store should record for this sighting at `now`, or the name
    /// of the rejected field.
    pub fn ingest(&mut self, raw: &str, camera_id: &str, location: Location, now: DateTime<FixedOffset>) -> Result<TraceRecord, &'static str> {
        let number = plate(raw).ok_or("number")?;
        if camera_id.trim().is_empty() {
            return Err("camera_id");
        }
        let mut time = now;
        for t in &self.traces {
            if t.camera_id == camera_id && t.time > time {
                time = t.time;
            }
        }
        let trace = TraceRecord {
            id: self.traces.len() as u64 + 1,
            number,
            location,
            time,
            camera_id: camera_id.to_string(),
        };
        for w in &self.watches {
            if w.vehicle == trace.number {
                self.alerts.push(AlertKey {
                    watch_id: w.id,
                    trace_id: trace.id,
                });
            }
        }
        self.traces.push(trace.clone());
        Ok(trace)
    }

    pub fn register(&mut self, w: &NewWatch, created_at: DateTime<FixedOffset>) -> Result<WatchEntry, &'static str> {
        let vehicle = plate(&w.vehicle).ok_or("vehicle")?;
        let email = w.email.trim();
        let at = email.find('@').ok_or("email")?;
        if at == 0 || at + 1 == email.len() || email[at + 1..].contains('@') || email.contains(char::is_whitespace) {
            return Err("email");
        }
        let mobile = w.mobile.trim();
        if mobile.is_empty() || mobile.chars().any(|c| !c.is_ascii_digit()) {
            return Err("mobile");
        }
        let entry = WatchEntry {
            id: self.watches.len() as u64 + 1,
            vehicle,
            email: email.to_string(),
            mobile: mobile.to_string(),
            details: w.details.clone(),
            created_at,
        };
        self.watches.push(entry.clone());
        Ok(entry)
    }

    /// Newest first by selection: repeatedly take the latest remaining hit.
    pub fn search(&self, raw: &str) -> Result<Vec<TraceRecord>, &'static str> {
        let number = plate(raw).ok_or("number")?;
        let mut left: Vec<&TraceRecord> = self.traces.iter().filter(|t| t.number == number).collect();
        let mut out = Vec::new();
        while !left.is_empty() {
            let mut best = 0;
            for (i, t) in left.iter().enumerate() {
                if (t.time, t.id) > (left[best].time, left[best].id) {
                    best = i;
                }
            }
            out.push(left.remove(best).clone());
        }
        Ok(out)
    }

    pub fn list_watches(&self) -> Vec<WatchEntry> {
        let mut out = self.watches.clone();
        out.sort_by_key(|w| (w.created_at, w.id));
        out
    }

    pub fn sorted_alerts(&self) -> Vec<AlertKey> {
        let mut a = self.alerts.clone();
        a.sort();
        a
    }
}

/// One randomly chosen request.
#[derive(Debug, Clone)]
pub enum Op {
    Ingest { number: String, camera: String },
    Register(NewWatch),
    Search(String),
    ListWatches,
    /// Moves the clock; negative steps check per-camera monotonicity.
    Tick(i64),
}

pub const CAMERAS: [&str; 3] = ["cam-vellore", "cam-katpadi", "cam-chennai"];
const PLATES: [&str; 6] = ["TN23CB0624", "TN23CE0541", "AP03AE3361", "TN29AE5417", "KA05MN4412", "DL8CAF5031"];

fn spaced(rng: &mut impl Rng, p: &str) -> String {
    match rng.gen_range(0..4) {
        0 => p.to_lowercase(),
        1 => format!("{} {} {}", &p[..2], &p[2..4], &p[4..]),
        2 => format!(" {p}\t"),
        _ => p.to_string(),
    }
}

pub fn random_op(rng: &mut impl Rng) -> Op {
    let p = *PLATES.choose(rng).unwrap();
    match rng.gen_range(0..100) {
        0..=39 => Op::Ingest {
            number: if rng.gen_bool(0.05) { "TN-23??".into() } else { spaced(rng, p) },
            camera: CAMERAS.choose(rng).unwrap().to_string(),
        },
        40..=54 => Op::Register(NewWatch {
            vehicle: if rng.gen_bool(0.05) { "".into() } else { spaced(rng, p) },
            email: ["owner@example.com", "pradeepreddy0003@gmail.com", "no-at-sign", "a@b@c"][rng.gen_range(0..4)].into(),
            mobile: if rng.gen_bool(0.05) { "98x".into() } else { format!("9{:09}", rng.gen_range(0..1_000_000_000u64)) },
            details: format!("note {}", rng.gen::<u16>()),
        }),
        55..=79 => Op::Search(if rng.gen_bool(0.05) { "ZZ99ZZ9999".into() } else { spaced(rng, p) }),
        80..=84 => Op::ListWatches,
        _ => Op::Tick(rng.gen_range(-5..=30)),
    }
}

pub fn location_for(camera: &str) -> Location {
    match camera {
        "cam-katpadi" => Location {
            latitude: 12.9692,
            longitude: 79.1559,
            label: "Katpadi TN IN".into(),
        },
        "cam-chennai" => Location {
            latitude: 13.0827,
            longitude: 80.2707,
            label: "Chennai TN IN".into(),
        },
        _ => vellore(),
    }
}

pub fn static_geo() -> platetrace_tracker::StaticGeo {
    platetrace_tracker::StaticGeo {
        cameras: CAMERAS.iter().map(|c| (c.to_string(), location_for(c))).collect(),
        fallback: Some(vellore()),
    }
}

fn field_of(e: platetrace_tracker::TrackerError) -> Result<&'static str, String> {
    match e {
        platetrace_tracker::TrackerError::Validation { field, .. } => Ok(field),
        other => Err(other.to_string()),
    }
}

/// Applies `op` to both and reports the first disagreement.
pub fn step(tracker: &Tracker, clock: &Arc<ManualClock>, model: &mut ReferenceModel, op: &Op) -> Result<(), String> {
    let tz = ist();
    let now = clock.now_fixed(tz);
    match op {
        Op::Ingest { number, camera } => {
            let want = model.ingest(number, camera, location_for(camera), now);
            let got = tracker.ingest_trace(number, camera).map(|i| i.trace).map_err(field_of);
            match (want, got) {
                (Ok(w), Ok(g)) if w == g => Ok(()),
                (Err(f), Err(Ok(g))) if f == g => Ok(()),
                (w, g) => Err(format!("ingest {number:?}: model {w:?}, store {g:?}")),
            }
        }
        Op::Register(new) => {
            let want = model.register(new, now);
            let got = tracker.register_watch(new.clone()).map_err(field_of);
            match (want, got) {
                (Ok(w), Ok(g)) if w == g => Ok(()),
                (Err(f), Err(Ok(g))) if f == g => Ok(()),
                (w, g) => Err(format!("register {new:?}: model {w:?}, store {g:?}")),
            }
        }
        Op::Search(q) => {
            let want = model.search(q);
            let got = tracker.search(q).map_err(field_of);
            match (want, got) {
                (Ok(w), Ok(g)) if w == g => Ok(()),
                (Err(f), Err(Ok(g))) if f == g => Ok(()),
                (w, g) => Err(format!("search {q:?}: model {w:?}, store {g:?}")),
            }
        }
        Op::ListWatches => (tracker.list_watches() == model.list_watches()).then_some(()).ok_or_else(|| "watch lists differ".to_string()),
        Op::Tick(s) => {
            clock.advance(Duration::seconds(*s));
            Ok(())
        }
    }
}

/// Compares everything observable at once.
pub fn same_state(tracker: &Tracker, model: &ReferenceModel) -> Result<(), String> {
    if tracker.traces() != model.traces {
        return Err("trace tables differ".into());
    }
    if tracker.list_watches() != model.list_watches() {
        return Err("watch tables differ".into());
    }
    let mut alerts = tracker.alerts();
    alerts.sort();
    if alerts != model.sorted_alerts() {
        return Err(format!("alerts differ: store {} vs model {}", alerts.len(), model.alerts.len()));
    }
    for p in PLATES {
        if tracker.search(p).ok() != model.search(p).ok() {
            return Err(format!("search {p} differs"));
        }
    }
    Ok(())
}

trait NowFixed {
    fn now_fixed(&self, tz: FixedOffset) -> DateTime<FixedOffset>;
}

impl NowFixed for Arc<ManualClock> {
    fn now_fixed(&self, tz: FixedOffset) -> DateTime<FixedOffset> {
        use platetrace_tracker::Clock;
        self.now().with_timezone(&tz)
    }
}
