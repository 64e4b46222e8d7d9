//! TOML study configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gridfire_core::fire::SpreadParams;
use gridfire_core::geo::GeoPoint;
use gridfire_core::scenario::DEFAULT_STUDY_YEAR;
use gridfire_core::weather::{default_seasons, DEFAULT_IGNITION_HOUR};
use gridfire_core::{CostParams, Placement, Season, StudyConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub paths: Paths,
    pub study: Study,
    pub spread: SpreadParams,
    pub costs: CostParams,
    pub synth: Synth,
}

/// Input and output locations. Relative entries are resolved against the
/// config file's directory; unset entries default to files in `--out`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub landscape: Option<PathBuf>,
    pub fuels: Option<PathBuf>,
    pub network: Option<PathBuf>,
    pub weather: Option<PathBuf>,
    pub results: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Study {
    pub ignitions_per_line: usize,
    pub duration_hours: f64,
    pub placement: Placement,
    pub seed: u64,
    /// Year of the default season start dates.
    pub year: i32,
    /// UTC hour of the default season start dates.
    pub ignition_hour: u32,
    /// Explicit seasons; replaces the four default quarter starts.
    pub seasons: Option<Vec<Season>>,
    pub buffer_cells: usize,
    /// Restrict the study to these line ids.
    pub lines: Option<Vec<u32>>,
}

impl Default for Study {
    fn default() -> Self {
        let d = StudyConfig::default();
        Study {
            ignitions_per_line: d.ignitions_per_line,
            duration_hours: d.duration_hours,
            placement: d.placement,
            seed: d.seed,
            year: DEFAULT_STUDY_YEAR,
            ignition_hour: DEFAULT_IGNITION_HOUR,
            seasons: None,
            buffer_cells: d.buffer_cells,
            lines: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Synth {
    pub ncols: usize,
    pub nrows: usize,
    pub cell_size: f64,
    /// South-west corner of the raster.
    pub origin_lat: f64,
    pub origin_lon: f64,
}

impl Default for Synth {
    fn default() -> Self {
        Synth {
            ncols: 128,
            nrows: 128,
            cell_size: 30.0,
            origin_lat: 37.80,
            origin_lon: -120.20,
        }
    }
}

impl Synth {
    pub fn origin(&self) -> GeoPoint {
        GeoPoint {
            lat: self.origin_lat,
            lon: self.origin_lon,
        }
    }
}

/// Parsed config plus the directory its relative paths hang off.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub base: PathBuf,
}

impl Loaded {
    pub fn read(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Loaded {
                config: Config::default(),
                base: PathBuf::from("."),
            });
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: Config =
            toml::from_str(&text).with_context(|| format!("config error in {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { config, base })
    }

    pub fn resolve(&self, set: &Option<PathBuf>, out: &Path, default: &str) -> PathBuf {
        match set {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => self.base.join(p),
            None => out.join(default),
        }
    }
}

impl Config {
    pub fn seasons(&self) -> anyhow::Result<Vec<Season>> {
        match &self.study.seasons {
            Some(s) if s.is_empty() => bail!("config lists no seasons"),
            Some(s) => Ok(s.clone()),
            None => Ok(default_seasons(self.study.year, self.study.ignition_hour)?),
        }
    }

    pub fn season_labels(&self) -> anyhow::Result<Vec<String>> {
        Ok(self.seasons()?.into_iter().map(|s| s.label).collect())
    }

    pub fn study_config(&self) -> anyhow::Result<StudyConfig> {
        let cfg = StudyConfig {
            ignitions_per_line: self.study.ignitions_per_line,
            seasons: self.seasons()?,
            duration_hours: self.study.duration_hours,
            placement: self.study.placement,
            seed: self.study.seed,
            spread: self.spread,
            costs: self.costs,
            buffer_cells: self.study.buffer_cells,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c: Config = toml::from_str("").unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn sections_parse() {
        let c: Config = toml::from_str(
            r#"
            [study]
            ignitions_per_line = 1
            placement = "seeded-random"
            seasons = [{ label = "summer", start = "2022-07-01T12:00Z" }]
            lines = [6]
            [spread]
            neighborhood = 8
            [costs]
            cbe = 1.0
            "#,
        )
        .unwrap();
        assert_eq!(c.study.placement, Placement::SeededRandom);
        assert_eq!(c.spread.neighborhood, gridfire_core::Neighborhood::Eight);
        assert_eq!(c.costs.cbl, 200_000.0);
        assert_eq!(c.season_labels().unwrap(), vec!["summer"]);
    }

    #[test]
    fn bad_seed_type_is_rejected() {
        assert!(toml::from_str::<Config>("[study]\nseed = \"abc\"").is_err());
        assert!(toml::from_str::<Config>("[study]\nbogus = 1").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = Config::default();
        let mut b = Config::default();
        assert_eq!(a.hash(), b.hash());
        b.study.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
