//! Hourly weather series: loading, windowing and seasonal start dates.

use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDate, NaiveDateTime, TimeZone, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%MZ";
pub const DEFAULT_IGNITION_HOUR: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherSample {
    pub timestamp: DateTime<Utc>,
    /// m/s
    pub wind_speed: f64,
    /// Meteorological convention: the bearing the wind blows from.
    pub wind_dir_from: f64,
    /// °C
    pub temperature: f64,
    /// Percent.
    pub rel_humidity: f64,
}

impl WeatherSample {
    fn check(&self) -> std::result::Result<(), String> {
        let vals = [
            self.wind_speed,
            self.wind_dir_from,
            self.temperature,
            self.rel_humidity,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err("non-finite value".into());
        }
        if self.wind_speed < 0.0 {
            return Err(format!("wind speed {} is negative", self.wind_speed));
        }
        if !(0.0..360.0).contains(&self.wind_dir_from) {
            return Err(format!("wind direction {} outside [0, 360)", self.wind_dir_from));
        }
        if !(0.0..=100.0).contains(&self.rel_humidity) {
            return Err(format!("relative humidity {} outside [0, 100]", self.rel_humidity));
        }
        Ok(())
    }

    /// Bearing the wind blows toward.
    pub fn wind_to_dir(&self) -> f64 {
        (self.wind_dir_from + 180.0).rem_euclid(360.0)
    }
}

/// Strictly hourly, gap-free sequence of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    samples: Vec<WeatherSample>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeatherRow {
    timestamp_utc: String,
    wind_speed_ms: f64,
    wind_dir_from_deg: f64,
    temp_c: f64,
    rh_pct: f64,
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT)
        .ok()
        .map(|n| Utc.from_utc_datetime(&n))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

impl WeatherSeries {
    pub fn new(samples: Vec<WeatherSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            s.check().map_err(|reason| Error::InvalidSample { row: i + 1, reason })?;
        }
        for (i, w) in samples.windows(2).enumerate() {
            let step = w[1].timestamp - w[0].timestamp;
            if step != Duration::hours(1) {
                return Err(Error::MalformedSeries(format!(
                    "rows {} and {}: timestamps {} -> {} are not one hour apart",
                    i + 1,
                    i + 2,
                    format_timestamp(&w[0].timestamp),
                    format_timestamp(&w[1].timestamp)
                )));
            }
        }
        Ok(WeatherSeries { samples })
    }

    pub fn samples(&self) -> &[WeatherSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first_timestamp(&self) -> Option<DateTime<Utc>> {
        self.samples.first().map(|s| s.timestamp)
    }

    /// The `hours` samples starting at `start`.
    pub fn window(&self, start: DateTime<Utc>, hours: usize) -> Result<WeatherSeries> {
        if hours == 0 {
            return Err(Error::InvalidInput("weather window must be at least one hour".into()));
        }
        let end = start + Duration::hours(hours as i64);
        let missing = || {
            Error::Coverage(format!(
                "no weather for [{}, {})",
                format_timestamp(&start),
                format_timestamp(&end)
            ))
        };
        let first = self.first_timestamp().ok_or_else(missing)?;
        let offset = start - first;
        if offset < Duration::zero() || offset.num_seconds() % 3600 != 0 {
            return Err(missing());
        }
        let from = (offset.num_seconds() / 3600) as usize;
        if from + hours > self.samples.len() {
            return Err(missing());
        }
        Ok(WeatherSeries {
            samples: self.samples[from..from + hours].to_vec(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            ),
            _ => Error::parse(path, e.to_string()),
        })?;
        let mut samples = Vec::new();
        for (i, rec) in rdr.deserialize::<WeatherRow>().enumerate() {
            let row = i + 1;
            let r = rec.map_err(|e| Error::InvalidSample {
                row,
                reason: e.to_string(),
            })?;
            let timestamp = parse_timestamp(&r.timestamp_utc).ok_or_else(|| Error::InvalidSample {
                row,
                reason: format!("timestamp `{}` is not YYYY-MM-DDThh:mmZ", r.timestamp_utc),
            })?;
            samples.push(WeatherSample {
                timestamp,
                wind_speed: r.wind_speed_ms,
                wind_dir_from: r.wind_dir_from_deg,
                temperature: r.temp_c,
                rel_humidity: r.rh_pct,
            });
        }
        Self::new(samples)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
        for s in &self.samples {
            w.serialize(WeatherRow {
                timestamp_utc: format_timestamp(&s.timestamp),
                wind_speed_ms: s.wind_speed,
                wind_dir_from_deg: s.wind_dir_from,
                temp_c: s.temperature,
                rh_pct: s.rel_humidity,
            })
            .map_err(|e| Error::parse(path, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn load_weather(path: &Path) -> Result<WeatherSeries> {
    WeatherSeries::load(path)
}

/// Jan 1, Apr 1, Jul 1 and Oct 1 of `year` at `hour`:00 UTC.
pub fn season_starts(year: i32, hour: u32) -> Result<[DateTime<Utc>; 4]> {
    if hour > 23 {
        return Err(Error::InvalidInput(format!("ignition hour {hour} outside 0..=23")));
    }
    let at = |month| -> Result<DateTime<Utc>> {
        let d = NaiveDate::from_ymd_opt(year, month, 1)
            .ok_or_else(|| Error::InvalidInput(format!("invalid year {year}")))?;
        Ok(Utc.from_utc_datetime(&d.and_hms_opt(hour, 0, 0).unwrap()))
    };
    Ok([at(1)?, at(4)?, at(7)?, at(10)?])
}

/// A named simulation start instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Season {
    pub label: String,
    #[serde(with = "timestamp_serde")]
    pub start: DateTime<Utc>,
}

pub const SEASON_LABELS: [&str; 4] = ["winter", "spring", "summer", "fall"];

pub fn default_seasons(year: i32, hour: u32) -> Result<Vec<Season>> {
    Ok(season_starts(year, hour)?
        .into_iter()
        .zip(SEASON_LABELS)
        .map(|(start, label)| Season {
            label: label.to_string(),
            start,
        })
        .collect())
}

mod timestamp_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_timestamp(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        parse_timestamp(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("`{s}` is not YYYY-MM-DDThh:mmZ")))
    }
}

/// A full year of plausible hourly foothill weather: hot dry summers,
/// damp winters, afternoon wind maxima and autumn offshore wind events.
pub fn synth_weather(year: i32, seed: u64) -> Result<WeatherSeries> {
    let start = NaiveDate::from_ymd_opt(year, 1, 1)
        .ok_or_else(|| Error::InvalidInput(format!("invalid year {year}")))?;
    let start = Utc.from_utc_datetime(&start.and_hms_opt(0, 0, 0).unwrap());
    let days = if NaiveDate::from_ymd_opt(year, 12, 31).unwrap().ordinal() == 366 {
        366
    } else {
        365
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gust = 0.0f64;
    let mut veer = 0.0f64;
    let mut samples = Vec::with_capacity(days * 24);
    for h in 0..days * 24 {
        let t = start + Duration::hours(h as i64);
        let doy = t.ordinal0() as f64;
        let hour = t.hour() as f64;
        let tau = std::f64::consts::TAU;
        // 1.0 in late July, -1.0 in late January
        let season = (tau * (doy - 114.0) / 365.0).sin();
        // afternoon peak
        let diurnal = (tau * (hour - 9.0) / 24.0).sin();
        // autumn offshore events centred on mid October
        let offshore = (-((doy - 290.0) / 25.0).powi(2)).exp();

        gust = 0.85 * gust + rng.random_range(-0.6..0.6);
        veer = 0.9 * veer + rng.random_range(-8.0..8.0);

        let temperature = 11.0 + 11.0 * season + 7.0 * diurnal + rng.random_range(-1.0..1.0);
        let rh = 48.0 - 25.0 * season - 15.0 * diurnal - 18.0 * offshore + rng.random_range(-4.0..4.0);
        let wind = 3.0 + 1.0 * diurnal.max(0.0) + 4.0 * offshore + 0.5 * (1.0 - season.abs()) + gust;
        let onshore_dir = 235.0;
        let offshore_dir = 45.0;
        let dir = onshore_dir * (1.0 - offshore) + offshore_dir * offshore + veer;

        samples.push(WeatherSample {
            timestamp: t,
            wind_speed: round2(wind.max(0.0)),
            wind_dir_from: round2(dir.rem_euclid(360.0)) % 360.0,
            temperature: round2(temperature),
            rel_humidity: round2(rh.clamp(5.0, 100.0)),
        });
    }
    WeatherSeries::new(samples)
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}
