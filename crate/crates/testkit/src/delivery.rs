//! Randomized check of the poller against an unreliable endpoint.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use platetrace_ingest::{plate_file, run_for, Clock, FakeClock, IngestConfig, Shutdown, SinkError, TraceSink};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct World {
    rng: ChaCha8Rng,
    next: usize,
    written: Vec<String>,
    acked: HashMap<String, usize>,
    fail_rate: f64,
    violation: Option<String>,
}

/// Fails a fraction of posts and, while posting, keeps appending new lines
/// to the plate file the way the recogniser would.
struct FlakySink {
    path: PathBuf,
    world: Mutex<World>,
}

impl FlakySink {
    fn write_some(&self, w: &mut World, max: usize) {
        let n = w.rng.gen_range(0..=max);
        let mut lines = Vec::new();
        for _ in 0..n {
            if w.rng.gen_bool(0.05) {
                lines.push("not a plate!".to_string());
            } else {
                w.next += 1;
                let line = format!("TN{:02}X{:05}", w.next % 100, w.next);
                w.written.push(line.clone());
                lines.push(line);
            }
        }
        plate_file::append_lines(&self.path, &lines).expect("append");
    }

    /// Every written line missing from the file must have been acknowledged.
    fn check_removed_were_acked(&self, w: &mut World) {
        let on_disk: HashSet<String> = std::fs::read_to_string(&self.path).unwrap_or_default().lines().map(str::to_string).collect();
        if let Some(lost) = w.written.iter().find(|l| !on_disk.contains(*l) && !w.acked.contains_key(*l)) {
            w.violation.get_or_insert(format!("{lost} left the file before it was acknowledged"));
        }
    }
}

impl TraceSink for FlakySink {
    fn post(&self, number: &str, _camera: &str) -> Result<(), SinkError> {
        let mut w = self.world.lock().unwrap();
        self.check_removed_were_acked(&mut w);
        if w.rng.gen_bool(0.3) {
            self.write_some(&mut w, 1);
        }
        let fail_rate = w.fail_rate;
        if w.rng.gen_bool(fail_rate) {
            return Err(SinkError::Transient("stub outage".into()));
        }
        *w.acked.entry(number.to_string()).or_default() += 1;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DeliverySummary {
    pub cycles: usize,
    pub written: usize,
    pub delivered: usize,
    pub duplicates: usize,
    pub drain_polls: usize,
    /// Consecutive polls exactly one interval apart.
    pub on_grid_gaps: usize,
}

/// Runs `cycles` polls against a sink failing `fail_rate` of posts, then
/// lets the endpoint recover and drains the file. Checks that every line
/// was delivered, that nothing left the file unacknowledged, and that polls
/// started exactly on the 10-second grid.
pub fn flaky_delivery(dir: &Path, seed: u64, cycles: usize, fail_rate: f64) -> Result<DeliverySummary, String> {
    let path = dir.join(format!("plates-{seed}.txt"));
    let mut cfg = IngestConfig::new(&path, "stub", "cam-1");
    cfg.retry_max = 2;
    cfg.backoff = Duration::from_millis(250);
    let sink = FlakySink {
        path: path.clone(),
        world: Mutex::new(World {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next: 0,
            written: Vec::new(),
            acked: HashMap::new(),
            fail_rate,
            violation: None,
        }),
    };
    {
        let mut w = sink.world.lock().unwrap();
        sink.write_some(&mut w, 5);
    }
    let clock = WritingClock {
        inner: FakeClock::auto(),
        sink: &sink,
    };
    let stop = Shutdown::new();
    let starts = run_for(&cfg, &sink, &clock, &stop, cycles);
    if starts.len() != cycles {
        return Err(format!("ran {} of {cycles} polls", starts.len()));
    }
    for pair in starts.windows(2) {
        if pair[1] <= pair[0] {
            return Err(format!("poll times not increasing: {pair:?}"));
        }
    }
    if let Some(bad) = starts.iter().find(|t| t.as_nanos() % cfg.interval.as_nanos() != 0) {
        return Err(format!("poll at {bad:?} is off the {:?} grid", cfg.interval));
    }
    let on_grid = starts.windows(2).filter(|p| p[1] - p[0] == cfg.interval).count();

    // The endpoint recovers and the recogniser goes quiet.
    let quiet = QuietSink(&sink);
    let mut drain_polls = 0;
    while !plate_file::read_batch(&path).map_err(|e| e.to_string())?.lines.is_empty() {
        if drain_polls == 10 {
            return Err("file never drained".into());
        }
        platetrace_ingest::poll_once(&cfg, &quiet, &clock).map_err(|e| e.to_string())?;
        drain_polls += 1;
    }

    let w = sink.world.lock().unwrap();
    if let Some(v) = &w.violation {
        return Err(v.clone());
    }
    if let Some(missing) = w.written.iter().find(|l| !w.acked.contains_key(*l)) {
        return Err(format!("{missing} was never delivered"));
    }
    let delivered: usize = w.acked.values().sum();
    Ok(DeliverySummary {
        cycles,
        written: w.written.len(),
        delivered,
        duplicates: delivered - w.acked.len(),
        drain_polls,
        on_grid_gaps: on_grid,
    })
}

struct QuietSink<'a>(&'a FlakySink);

impl TraceSink for QuietSink<'_> {
    fn post(&self, number: &str, _camera: &str) -> Result<(), SinkError> {
        let mut w = self.0.world.lock().unwrap();
        self.0.check_removed_were_acked(&mut w);
        *w.acked.entry(number.to_string()).or_default() += 1;
        Ok(())
    }
}

/// Time that passes between polls is time in which the recogniser writes.
struct WritingClock<'a> {
    inner: FakeClock,
    sink: &'a FlakySink,
}

impl Clock for WritingClock<'_> {
    fn now(&self) -> Duration {
        self.inner.now()
    }

    fn sleep(&self, d: Duration, stop: Option<&Shutdown>) {
        // Only the loop's wait between polls is interruptible.
        if stop.is_some() {
            let mut w = self.sink.world.lock().unwrap();
            self.sink.write_some(&mut w, 3);
        }
        self.inner.sleep(d, stop);
    }
}
