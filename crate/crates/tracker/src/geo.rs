//! Camera placement. The static map is the default; the HTTP provider asks a
//! freegeoip-style service about the camera's address.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;

use crate::error::{Result, TrackerError};
use crate::model::Location;

pub trait GeoProvider: Send + Sync {
    /// Must return the same answer for a camera for the life of the process.
    fn locate(&self, camera_id: &str) -> Result<Location>;
}

#[derive(Debug, Clone, Deserialize)]
pub struct StaticGeo {
    #[serde(default)]
    pub cameras: HashMap<String, Location>,
    /// Used for cameras missing from the map; unknown cameras are an error
    /// without it.
    #[serde(default)]
    pub fallback: Option<Location>,
}

impl StaticGeo {
    pub fn uniform(location: Location) -> Self {
        Self {
            cameras: HashMap::new(),
            fallback: Some(location),
        }
    }

    /// Reads `{"cameras": {"id": {"latitude":..,"longitude":..,"label":..}}, "fallback": {..}}`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TrackerError::storage(path, e))?;
        let geo: Self = serde_json::from_str(&text).map_err(|e| TrackerError::invalid("geo", format!("{}: {e}", path.display())))?;
        for loc in geo.cameras.values().chain(geo.fallback.iter()) {
            Location::new(loc.latitude, loc.longitude, loc.label.clone())?;
        }
        Ok(geo)
    }
}

impl Default for StaticGeo {
    fn default() -> Self {
        Self::uniform(Location {
            latitude: 0.0,
            longitude: 0.0,
            label: "unknown".into(),
        })
    }
}

impl GeoProvider for StaticGeo {
    fn locate(&self, camera_id: &str) -> Result<Location> {
        self.cameras.get(camera_id).or(self.fallback.as_ref()).cloned().ok_or_else(|| TrackerError::Geo {
            camera_id: camera_id.to_string(),
            reason: "camera not in static map".into(),
        })
    }
}

#[derive(Debug, Deserialize)]
struct GeoIpReply {
    latitude: f64,
    longitude: f64,
    #[serde(default)]
    city: String,
    #[serde(default)]
    region_code: String,
    #[serde(default)]
    country_code: String,
}

/// Looks up `<base_url>/<ip>`; the camera id is used as the address unless
/// `addresses` maps it. Answers are cached so a camera never moves.
pub struct HttpGeo {
    base_url: String,
    addresses: HashMap<String, String>,
    client: reqwest::blocking::Client,
    cache: Mutex<HashMap<String, Location>>,
}

impl HttpGeo {
    pub fn new(base_url: impl Into<String>, addresses: HashMap<String, String>) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(5))
            .build()
            .map_err(|e| TrackerError::invalid("geo", e.to_string()))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            addresses,
            client,
            cache: Mutex::new(HashMap::new()),
        })
    }
}

impl GeoProvider for HttpGeo {
    fn locate(&self, camera_id: &str) -> Result<Location> {
        if let Some(hit) = self.cache.lock().unwrap().get(camera_id) {
            return Ok(hit.clone());
        }
        let fail = |reason: String| TrackerError::Geo {
            camera_id: camera_id.to_string(),
            reason,
        };
        let ip = self.addresses.get(camera_id).map(String::as_str).unwrap_or(camera_id);
        let reply: GeoIpReply = self
            .client
            .get(format!("{}/{ip}", self.base_url))
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(|e| fail(e.to_string()))?;
        let label = [reply.city, reply.region_code, reply.country_code]
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join(" ");
        let loc = Location::new(reply.latitude, reply.longitude, label).map_err(|e| fail(e.to_string()))?;
        Ok(self.cache.lock().unwrap().entry(camera_id.to_string()).or_insert(loc).clone())
    }
}
