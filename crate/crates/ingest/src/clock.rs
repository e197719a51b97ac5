use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// A stop signal that wakes sleepers immediately.
#[derive(Debug, Default)]
pub struct Shutdown {
    stopped: Mutex<bool>,
    cv: Condvar,
}

impl Shutdown {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn trigger(&self) {
        *self.stopped.lock().unwrap() = true;
        self.cv.notify_all();
    }

    pub fn is_triggered(&self) -> bool {
        *self.stopped.lock().unwrap()
    }

    /// Waits up to `d`; true if stopped.
    pub fn wait(&self, d: Duration) -> bool {
        let guard = self.stopped.lock().unwrap();
        let (guard, _) = self.cv.wait_timeout_while(guard, d, |stopped| !*stopped).unwrap();
        *guard
    }
}

pub trait Clock: Send + Sync {
    /// Time since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    /// Sleeps for `d`, returning early when `stop` fires.
    fn sleep(&self, d: Duration, stop: Option<&Shutdown>);
}

#[derive(Debug)]
pub struct SystemClock(Instant);

impl Default for SystemClock {
    fn default() -> Self {
        Self(Instant::now())
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }

    fn sleep(&self, d: Duration, stop: Option<&Shutdown>) {
        match stop {
            Some(s) => {
                s.wait(d);
            }
            None => std::thread::sleep(d),
        }
    }
}

#[derive(Debug, Default)]
struct FakeState {
    now: Duration,
    sleeping: usize,
    started: usize,
}

/// Deterministic time for tests.
///
/// In auto mode every sleep completes instantly and moves time forward. In
/// manual mode a sleep blocks until [`FakeClock::advance`] moves time past
/// its deadline, so a test can step a loop tick by tick.
#[derive(Debug, Default)]
pub struct FakeClock {
    state: Mutex<FakeState>,
    cv: Condvar,
    manual: bool,
}

impl FakeClock {
    pub fn auto() -> Self {
        Self::default()
    }

    pub fn manual() -> Self {
        Self {
            manual: true,
            ..Self::default()
        }
    }

    pub fn advance(&self, d: Duration) {
        self.state.lock().unwrap().now += d;
        self.cv.notify_all();
    }

    /// Blocks until at least `n` sleeps have begun since creation and one
    /// of them is still waiting.
    pub fn wait_for_sleeps(&self, n: usize) {
        let guard = self.state.lock().unwrap();
        let _g = self.cv.wait_while(guard, |s| s.started < n || s.sleeping == 0).unwrap();
    }

    /// Wakes manual sleepers so they can notice a shutdown.
    pub fn poke(&self) {
        self.cv.notify_all();
    }
}

impl Clock for FakeClock {
    fn now(&self) -> Duration {
        self.state.lock().unwrap().now
    }

    fn sleep(&self, d: Duration, stop: Option<&Shutdown>) {
        let mut s = self.state.lock().unwrap();
        if !self.manual {
            s.now += d;
            return;
        }
        let deadline = s.now + d;
        s.sleeping += 1;
        s.started += 1;
        self.cv.notify_all();
        while s.now < deadline && !stop.is_some_and(Shutdown::is_triggered) {
            s = self.cv.wait(s).unwrap();
        }
        s.sleeping -= 1;
    }
}
