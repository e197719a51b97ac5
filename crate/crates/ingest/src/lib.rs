//! Periodically ships the plates the recogniser appends to its output file
//! to the trace service, removing them only once delivered.

pub mod clock;
pub mod config;
pub mod error;
pub mod plate_file;
pub mod poller;
pub mod sink;

pub use clock::{Clock, FakeClock, Shutdown, SystemClock};
pub use config::IngestConfig;
pub use error::{IngestError, Result};
pub use poller::{is_plate, poll_once, run_for, run_loop, PollReport};
pub use sink::{HttpSink, SinkError, TraceSink};
