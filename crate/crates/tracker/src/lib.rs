//! Sighting store for recognised plates: every trace is kept with the
//! camera's location and time, searchable by plate, and each trace of a
//! watched vehicle alerts its watchers.

pub mod api;
pub mod clock;
pub mod error;
pub mod geo;
pub mod journal;
pub mod model;
pub mod notify;
pub mod store;

pub use api::{router, serve, ApiConfig, TraceRequest};
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{Result, TrackerError};
pub use geo::{GeoProvider, HttpGeo, StaticGeo};
pub use model::{normalize_plate, AlertKey, Location, NewWatch, TraceRecord, WatchEntry};
pub use notify::{AlertMessage, MemoryNotifier, Notifier, OutboxNotifier, SmtpNotifier};
pub use store::{Ingested, Tracker, TrackerConfig};
