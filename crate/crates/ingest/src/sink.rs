use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SinkError {
    /// Worth retrying: network trouble or a server-side failure.
    #[error("transient: {0}")]
    Transient(String),
    /// The service refused this record; retrying will not help.
    #[error("rejected: {0}")]
    Rejected(String),
}

/// Where plates go.
pub trait TraceSink: Send + Sync {
    fn post(&self, number: &str, camera_id: &str) -> Result<(), SinkError>;
}

#[derive(Serialize)]
struct Body<'a> {
    number: &'a str,
    camera_id: &'a str,
}

/// POSTs `{"number","camera_id"}` as JSON.
pub struct HttpSink {
    endpoint: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpSink {
    pub fn new(endpoint: impl Into<String>, token: Option<String>) -> Result<Self, SinkError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(10))
            .build()
            .map_err(|e| SinkError::Transient(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.into(),
            token,
            client,
        })
    }
}

impl TraceSink for HttpSink {
    fn post(&self, number: &str, camera_id: &str) -> Result<(), SinkError> {
        let mut req = self.client.post(&self.endpoint).json(&Body { number, camera_id });
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| SinkError::Transient(e.to_string()))?;
        let status = resp.status();
        if status.is_success() {
            Ok(())
        } else if status.is_client_error() && status.as_u16() != 401 && status.as_u16() != 429 {
            Err(SinkError::Rejected(format!("{status}: {}", resp.text().unwrap_or_default())))
        } else {
            Err(SinkError::Transient(status.to_string()))
        }
    }
}
