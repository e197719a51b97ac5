//! Alert delivery. The tracker calls a notifier once per committed
//! (watch, trace) pair and never retries, so alerts are at-most-once.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{TraceRecord, WatchEntry};

#[derive(Debug, Error)]
pub enum NotifyError {
    #[error("outbox {path}: {source}")]
    Outbox {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("smtp: {0}")]
    Smtp(String),
}

/// What a watcher is told.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertMessage {
    pub watch_id: u64,
    pub trace_id: u64,
    pub to: String,
    pub mobile: String,
    pub vehicle: String,
    pub location: String,
    pub time: String,
    pub subject: String,
    pub body: String,
}

impl AlertMessage {
    pub fn new(watch: &WatchEntry, trace: &TraceRecord) -> Self {
        let location = trace.location.to_string();
        let time = trace.time_display();
        Self {
            watch_id: watch.id,
            trace_id: trace.id,
            to: watch.email.clone(),
            mobile: watch.mobile.clone(),
            vehicle: trace.number.clone(),
            body: format!(
                "Vehicle {} was traced at {location} on {time} (camera {}).\nYour note: {}\n",
                trace.number, trace.camera_id, watch.details
            ),
            location,
            time,
            subject: "Vehicle Traced !".into(),
        }
    }
}

pub trait Notifier: Send + Sync {
    fn send_alert(&self, watch: &WatchEntry, trace: &TraceRecord) -> Result<(), NotifyError>;
}

/// Appends one JSON line per alert.
#[derive(Debug)]
pub struct OutboxNotifier {
    path: PathBuf,
    lock: Mutex<()>,
}

impl OutboxNotifier {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn read_all(path: &Path) -> std::io::Result<Vec<AlertMessage>> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
            .collect()
    }
}

impl Notifier for OutboxNotifier {
    fn send_alert(&self, watch: &WatchEntry, trace: &TraceRecord) -> Result<(), NotifyError> {
        let mut line = serde_json::to_string(&AlertMessage::new(watch, trace)).expect("alert serialises");
        line.push('\n');
        let _guard = self.lock.lock().unwrap();
        let err = |source| NotifyError::Outbox {
            path: self.path.clone(),
            source,
        };
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path).map_err(err)?;
        f.write_all(line.as_bytes()).map_err(err)
    }
}

/// Keeps alerts in memory.
#[derive(Debug, Default)]
pub struct MemoryNotifier {
    sent: Mutex<Vec<AlertMessage>>,
}

impl MemoryNotifier {
    pub fn sent(&self) -> Vec<AlertMessage> {
        self.sent.lock().unwrap().clone()
    }
}

impl Notifier for MemoryNotifier {
    fn send_alert(&self, watch: &WatchEntry, trace: &TraceRecord) -> Result<(), NotifyError> {
        self.sent.lock().unwrap().push(AlertMessage::new(watch, trace));
        Ok(())
    }
}

/// Plain SMTP submission without TLS or authentication, for a local relay.
#[derive(Debug, Clone)]
pub struct SmtpNotifier {
    pub server: String,
    pub from: String,
    pub helo_name: String,
    pub timeout: Duration,
}

impl SmtpNotifier {
    pub fn new(server: impl Into<String>, from: impl Into<String>) -> Self {
        Self {
            server: server.into(),
            from: from.into(),
            helo_name: "localhost".into(),
            timeout: Duration::from_secs(10),
        }
    }

    fn deliver(&self, msg: &AlertMessage) -> Result<(), NotifyError> {
        let io = |e: std::io::Error| NotifyError::Smtp(e.to_string());
        let stream = TcpStream::connect(&self.server).map_err(io)?;
        stream.set_read_timeout(Some(self.timeout)).map_err(io)?;
        stream.set_write_timeout(Some(self.timeout)).map_err(io)?;
        let mut reader = BufReader::new(stream.try_clone().map_err(io)?);
        let mut writer = stream;

        let expect = |reader: &mut BufReader<TcpStream>, code: &str| -> Result<(), NotifyError> {
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).map_err(io)? == 0 {
                    return Err(NotifyError::Smtp("connection closed".into()));
                }
                if !line.starts_with(code) {
                    return Err(NotifyError::Smtp(format!("expected {code}, got {}", line.trim_end())));
                }
                // "250-..." continues a multi-line reply, "250 ..." ends it.
                if line.as_bytes().get(3) != Some(&b'-') {
                    return Ok(());
                }
            }
        };
        let send = |w: &mut TcpStream, s: &str| w.write_all(s.as_bytes()).map_err(io);

        expect(&mut reader, "220")?;
        send(&mut writer, &format!("HELO {}\r\n", self.helo_name))?;
        expect(&mut reader, "250")?;
        send(&mut writer, &format!("MAIL FROM:<{}>\r\n", self.from))?;
        expect(&mut reader, "250")?;
        send(&mut writer, &format!("RCPT TO:<{}>\r\n", msg.to))?;
        expect(&mut reader, "250")?;
        send(&mut writer, "DATA\r\n")?;
        expect(&mut reader, "354")?;
        let mut data = format!("From: {}\r\nTo: {}\r\nSubject: {}\r\n\r\n", self.from, msg.to, msg.subject);
        for line in msg.body.lines() {
            if line.starts_with('.') {
                data.push('.');
            }
            data.push_str(line);
            data.push_str("\r\n");
        }
        data.push_str(".\r\n");
        send(&mut writer, &data)?;
        expect(&mut reader, "250")?;
        send(&mut writer, "QUIT\r\n")?;
        Ok(())
    }
}

impl Notifier for SmtpNotifier {
    fn send_alert(&self, watch: &WatchEntry, trace: &TraceRecord) -> Result<(), NotifyError> {
        self.deliver(&AlertMessage::new(watch, trace))
    }
}
