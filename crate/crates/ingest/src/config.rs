use std::path::PathBuf;
use std::time::Duration;

use crate::error::{IngestError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub watch_path: PathBuf,
    pub interval: Duration,
    /// Full URL of the trace endpoint, e.g. `http://host:8080/traces`.
    pub endpoint: String,
    pub camera_id: String,
    /// Extra attempts per line after the first failure.
    pub retry_max: u32,
    /// Wait before the first retry; doubles each time.
    pub backoff: Duration,
    pub token: Option<String>,
}

impl IngestConfig {
    pub fn new(watch_path: impl Into<PathBuf>, endpoint: impl Into<String>, camera_id: impl Into<String>) -> Self {
        Self {
            watch_path: watch_path.into(),
            interval: Duration::from_secs(10),
            endpoint: endpoint.into(),
            camera_id: camera_id.into(),
            retry_max: 3,
            backoff: Duration::from_millis(500),
            token: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.interval.is_zero() {
            return Err(IngestError::config("interval", "must be positive"));
        }
        if self.camera_id.is_empty() {
            return Err(IngestError::config("camera_id", "must not be empty"));
        }
        Ok(())
    }

    /// Sets one `key = value` option. Durations are in seconds.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |reason: String| IngestError::config(key, reason);
        let secs = |v: &str| v.parse::<f64>().ok().filter(|s| s.is_finite() && *s >= 0.0).map(Duration::from_secs_f64);
        match key {
            "watch_path" => self.watch_path = value.into(),
            "endpoint" => self.endpoint = value.into(),
            "camera_id" => self.camera_id = value.into(),
            "interval" => self.interval = secs(value).ok_or_else(|| bad(format!("not a duration: {value:?}")))?,
            "backoff" => self.backoff = secs(value).ok_or_else(|| bad(format!("not a duration: {value:?}")))?,
            "retry_max" => self.retry_max = value.parse().map_err(|e| bad(format!("{e}")))?,
            "token" => self.token = (!value.is_empty()).then(|| value.to_string()),
            _ => return Err(bad("unknown key".into())),
        }
        Ok(())
    }

    /// Parses a `key = value` file; blank lines and `#` comments are ignored.
    /// `watch_path`, `endpoint` and `camera_id` are required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::new("", "", "");
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| IngestError::config(format!("line {}", n + 1), "expected key = value"))?;
            cfg.set(k.trim(), v.trim())?;
            seen.push(k.trim().to_string());
        }
        for required in ["watch_path", "endpoint", "camera_id"] {
            if !seen.iter().any(|k| k == required) {
                return Err(IngestError::config(required, "missing"));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
