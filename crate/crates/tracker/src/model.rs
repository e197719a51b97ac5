use std::fmt;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrackerError};

/// Uppercases and drops all whitespace, so "tn 23 al 0322" and
/// "TN23AL0322" name the same vehicle. The result must be `[A-Z0-9]+`.
pub fn normalize_plate(raw: &str) -> Result<String> {
    let plate: String = raw.chars().filter(|c| !c.is_whitespace()).map(|c| c.to_ascii_uppercase()).collect();
    if plate.is_empty() {
        return Err(TrackerError::invalid("number", "empty plate number"));
    }
    if let Some(bad) = plate.chars().find(|c| !(c.is_ascii_uppercase() || c.is_ascii_digit())) {
        return Err(TrackerError::invalid("number", format!("unexpected character {bad:?}")));
    }
    Ok(plate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub latitude: f64,
    pub longitude: f64,
    pub label: String,
}

impl Location {
    pub fn new(latitude: f64, longitude: f64, label: impl Into<String>) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(TrackerError::invalid("latitude", format!("{latitude} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(TrackerError::invalid("longitude", format!("{longitude} outside [-180, 180]")));
        }
        Ok(Self {
            latitude,
            longitude,
            label: label.into(),
        })
    }
}

/// `12.9333 79.1333 Vellore TN IN`
impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.latitude, self.longitude, self.label)
    }
}

/// One sighting of a plate by a camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub id: u64,
    pub number: String,
    pub location: Location,
    pub time: DateTime<FixedOffset>,
    pub camera_id: String,
}

impl TraceRecord {
    /// `2017-05-28 22:20:05`, in the stored offset.
    pub fn time_display(&self) -> String {
        self.time.format("%Y-%m-%d %H:%M:%S").to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewWatch {
    pub vehicle: String,
    pub email: String,
    pub mobile: String,
    #[serde(default)]
    pub details: String,
}

impl NewWatch {
    /// Normalises the vehicle and checks every field.
    pub fn validated(self) -> Result<Self> {
        let vehicle = normalize_plate(&self.vehicle).map_err(|e| match e {
            TrackerError::Validation { reason, .. } => TrackerError::invalid("vehicle", reason),
            other => other,
        })?;
        let email = self.email.trim().to_string();
        let mut parts = email.split('@');
        let ok = matches!((parts.next(), parts.next(), parts.next()), (Some(l), Some(d), None) if !l.is_empty() && !d.is_empty())
            && !email.chars().any(char::is_whitespace);
        if !ok {
            return Err(TrackerError::invalid("email", "expected local@domain"));
        }
        let mobile = self.mobile.trim().to_string();
        if mobile.is_empty() || !mobile.chars().all(|c| c.is_ascii_digit()) {
            return Err(TrackerError::invalid("mobile", "expected digits only"));
        }
        Ok(Self {
            vehicle,
            email,
            mobile,
            details: self.details,
        })
    }
}

/// A registered request to be told when a vehicle is sighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatchEntry {
    pub id: u64,
    pub vehicle: String,
    pub email: String,
    pub mobile: String,
    pub details: String,
    pub created_at: DateTime<FixedOffset>,
}

/// Identifies one alert; at most one is ever sent per key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AlertKey {
    pub watch_id: u64,
    pub trace_id: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plates_normalise() {
        assert_eq!(normalize_plate(" tn 23 al\t0322 ").unwrap(), "TN23AL0322");
        assert!(normalize_plate("  ").is_err());
        assert!(normalize_plate("TN-23").is_err());
    }

    #[test]
    fn watch_validation_names_field() {
        let w = NewWatch {
            vehicle: "TN23CB0624".into(),
            email: "no-at-sign".into(),
            mobile: "9994370499".into(),
            details: String::new(),
        };
        let err = w.clone().validated().unwrap_err();
        assert!(matches!(err, TrackerError::Validation { field: "email", .. }));
        for bad in ["a@b@c", "@x", "x@", "a b@c"] {
            let e = NewWatch { email: bad.into(), ..w.clone() }.validated();
            assert!(matches!(e, Err(TrackerError::Validation { field: "email", .. })), "{bad}");
        }
        let e = NewWatch { vehicle: "??".into(), email: "a@b".into(), ..w.clone() }.validated();
        assert!(matches!(e, Err(TrackerError::Validation { field: "vehicle", .. })));
        let e = NewWatch { mobile: "99-12".into(), email: "a@b".into(), ..w }.validated();
        assert!(matches!(e, Err(TrackerError::Validation { field: "mobile", .. })));
    }

    #[test]
    fn location_display_and_bounds() {
        let l = Location::new(12.9333, 79.1333, "Vellore TN IN").unwrap();
        assert_eq!(l.to_string(), "12.9333 79.1333 Vellore TN IN");
        assert!(Location::new(91.0, 0.0, "x").is_err());
        assert!(Location::new(0.0, -181.0, "x").is_err());
    }
}
