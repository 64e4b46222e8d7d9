//! Tabular study outputs: season tables, scenario results, risk rankings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::{seasonal_average, LineRisk, SeasonRow};
use crate::scenario::{ScenarioResult, ScenarioWarning};

pub const RESULTS_HEADER: [&str; 7] = [
    "line_id",
    "season",
    "ignition_idx",
    "burned_cells",
    "burned_acres",
    "affected_line_ids",
    "affected_miles",
];
pub const RISK_HEADER: [&str; 6] = ["line_id", "lbe", "lbl", "wfl", "metric", "rank"];
pub const PLOT_HEADER: [&str; 2] = ["line_id", "metric"];

/// File names written by [`StudyReport::write`].
pub const ACRES_TABLE_FILE: &str = "burned_acres.csv";
pub const MILES_TABLE_FILE: &str = "affected_miles.csv";
pub const RISK_FILE: &str = "risk.csv";
pub const PLOT_FILE: &str = "plot.csv";
pub const ASSESS_META_FILE: &str = "assess_meta.json";

/// Provenance of a run, written next to its outputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub workers: usize,
    pub scenarios: usize,
    pub elapsed_secs: f64,
    pub warnings: Vec<ScenarioWarning>,
}

impl RunMetadata {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("metadata serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub season_labels: Vec<String>,
    pub acres: Vec<SeasonRow>,
    pub miles: Vec<SeasonRow>,
    /// Sorted by metric descending, then line id.
    pub risks: Vec<LineRisk>,
    pub metadata: RunMetadata,
}

impl StudyReport {
    /// Builds the season tables from the per-line records.
    pub fn from_risks(season_labels: Vec<String>, risks: Vec<LineRisk>, metadata: RunMetadata) -> Result<Self> {
        let mut by_line: Vec<&LineRisk> = risks.iter().collect();
        by_line.sort_by_key(|r| r.line_id);
        let acres = by_line
            .iter()
            .map(|r| SeasonRow {
                line_id: r.line_id,
                seasons: r.season_acres.clone(),
            })
            .collect();
        let miles = by_line
            .iter()
            .map(|r| SeasonRow {
                line_id: r.line_id,
                seasons: r.season_miles.clone(),
            })
            .collect();
        let report = StudyReport {
            season_labels,
            acres,
            miles,
            risks,
            metadata,
        };
        report.check()?;
        Ok(report)
    }

    fn check(&self) -> Result<()> {
        let width = self.season_labels.len();
        for row in self.acres.iter().chain(&self.miles) {
            if row.seasons.len() != width {
                return Err(Error::Invariant(format!(
                    "line {} has {} season values, expected {width}",
                    row.line_id,
                    row.seasons.len()
                )));
            }
        }
        for (i, w) in self.risks.windows(2).enumerate() {
            let ordered = w[0].metric > w[1].metric || (w[0].metric == w[1].metric && w[0].line_id < w[1].line_id);
            if !ordered || w[0].rank != i + 1 {
                return Err(Error::Invariant(format!("risk ranking out of order at rank {}", i + 1)));
            }
        }
        Ok(())
    }

    /// Writes the two season tables, the ranking, plot data and metadata into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_season_table(&dir.join(ACRES_TABLE_FILE), &self.season_labels, &self.acres)?;
        write_season_table(&dir.join(MILES_TABLE_FILE), &self.season_labels, &self.miles)?;
        write_risk(&dir.join(RISK_FILE), &self.risks)?;
        write_plot(&dir.join(PLOT_FILE), &self.risks)?;
        self.metadata.write(&dir.join(ASSESS_META_FILE))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))
}

/// `line_id,<season labels>,avg`
pub fn write_season_table(path: &Path, labels: &[String], rows: &[SeasonRow]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["line_id".to_string()];
    header.extend(labels.iter().cloned());
    header.push("avg".into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        let mut rec = vec![r.line_id.to_string()];
        rec.extend(r.seasons.iter().map(|v| v.to_string()));
        rec.push(seasonal_average(&r.seasons)?.to_string());
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a season table. A trailing `avg` column is ignored; averages are
/// always recomputed from the season columns.
pub fn read_season_table(path: &Path) -> Result<(Vec<String>, Vec<SeasonRow>)> {
    let mut r = reader(path)?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("line_id") {
        return Err(Error::parse(path, "first column must be line_id"));
    }
    let season_end = if header.last().map(|h| h.eq_ignore_ascii_case("avg")).unwrap_or(false) {
        header.len() - 1
    } else {
        header.len()
    };
    let labels = header[1..season_end].to_vec();
    if labels.is_empty() {
        return Err(Error::parse(path, "no season columns"));
    }
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in r.records().enumerate() {
        let row_no = i + 1;
        let rec = rec.map_err(|e| Error::parse(path, format!("row {row_no}: {e}")))?;
        if rec.len() != header.len() {
            return Err(Error::parse(
                path,
                format!("row {row_no}: expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let line_id: u32 = rec[0]
            .parse()
            .map_err(|_| Error::parse(path, format!("row {row_no}: bad line_id {:?}", &rec[0])))?;
        if !seen.insert(line_id) {
            return Err(Error::parse(path, format!("row {row_no}: duplicate line {line_id}")));
        }
        let seasons = (1..season_end)
            .map(|k| {
                rec[k]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| Error::parse(path, format!("row {row_no}: bad value {:?}", &rec[k])))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(SeasonRow { line_id, seasons });
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "table has no rows"));
    }
    Ok((labels, rows))
}

/// One CSV row per scenario, seasons written by label.
pub fn write_results(path: &Path, labels: &[String], results: &[ScenarioResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RESULTS_HEADER).map_err(|e| csv_err(path, e))?;
    for r in results {
        let label = labels.get(r.season_index).ok_or_else(|| {
            Error::Invariant(format!("season index {} has no label", r.season_index))
        })?;
        let ids: Vec<String> = r.affected_line_ids.iter().map(u32::to_string).collect();
        w.write_record([
            r.line_id.to_string(),
            label.clone(),
            r.ignition_index.to_string(),
            r.burned_cells.to_string(),
            r.burned_acres.to_string(),
            ids.join(";"),
            r.affected_miles.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parses a results file; `labels` maps season names back to indices.
pub fn read_results(path: &Path, labels: &[String]) -> Result<Vec<ScenarioResult>> {
    let mut r = reader(path)?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(Error::parse(path, format!("expected header {}", RESULTS_HEADER.join(","))));
    }
    let season_of: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row_no = i + 1;
        let bad = |what: &str, v: &str| Error::parse(path, format!("row {row_no}: bad {what} {v:?}"));
        let rec = rec.map_err(|e| Error::parse(path, format!("row {row_no}: {e}")))?;
        if rec.len() != RESULTS_HEADER.len() {
            return Err(Error::parse(
                path,
                format!("row {row_no}: expected {} fields, found {}", RESULTS_HEADER.len(), rec.len()),
            ));
        }
        let line_id = rec[0].parse::<u32>().map_err(|_| bad("line_id", &rec[0]))?;
        let season_index = *season_of.get(&rec[1]).ok_or_else(|| bad("season", &rec[1]))?;
        let ignition_index = rec[2]
            .parse::<usize>()
            .ok()
            .filter(|v| *v >= 1)
            .ok_or_else(|| bad("ignition_idx", &rec[2]))?;
        let burned_cells = rec[3].parse::<usize>().map_err(|_| bad("burned_cells", &rec[3]))?;
        let nonneg = |k: usize, what: &str| {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| bad(what, &rec[k]))
        };
        let burned_acres = nonneg(4, "burned_acres")?;
        let affected_line_ids = rec[5]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| s.trim().parse::<u32>().map_err(|_| bad("affected_line_ids", &rec[5])))
            .collect::<Result<BTreeSet<_>>>()?;
        let affected_miles = nonneg(6, "affected_miles")?;
        out.push(ScenarioResult {
            line_id,
            ignition_index,
            season_index,
            burned_cells,
            burned_acres,
            affected_line_ids,
            affected_miles,
        });
    }
    if out.is_empty() {
        return Err(Error::parse(path, "results file has no rows"));
    }
    Ok(out)
}

/// `line_id,lbe,lbl,wfl,metric,rank`
pub fn write_risk(path: &Path, risks: &[LineRisk]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RISK_HEADER).map_err(|e| csv_err(path, e))?;
    for r in risks {
        w.write_record([
            r.line_id.to_string(),
            r.lbe.to_string(),
            r.lbl.to_string(),
            r.wfl.to_string(),
            r.metric.to_string(),
            r.rank.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Risk rows as written by [`write_risk`]; season columns are left empty.
pub fn read_risk(path: &Path) -> Result<Vec<LineRisk>> {
    let mut r = reader(path)?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(RISK_HEADER) {
        return Err(Error::parse(path, format!("expected header {}", RISK_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row_no = i + 1;
        let rec = rec.map_err(|e| Error::parse(path, format!("row {row_no}: {e}")))?;
        let num = |k: usize| {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::parse(path, format!("row {row_no}: bad {}", RISK_HEADER[k])))
        };
        out.push(LineRisk {
            line_id: num(0)? as u32,
            lbe: num(1)?,
            lbl: num(2)?,
            wfl: num(3)?,
            metric: num(4)?,
            rank: num(5)? as usize,
            season_acres: Vec::new(),
            season_miles: Vec::new(),
        });
    }
    Ok(out)
}

/// Bar-chart data: line id against metric, in line id order.
pub fn write_plot(path: &Path, risks: &[LineRisk]) -> Result<()> {
    let mut sorted: Vec<&LineRisk> = risks.iter().collect();
    sorted.sort_by_key(|r| r.line_id);
    let mut w = writer(path)?;
    w.write_record(PLOT_HEADER).map_err(|e| csv_err(path, e))?;
    for r in sorted {
        w.write_record([r.line_id.to_string(), r.metric.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Mean over lines of one season column.
pub fn column_mean(rows: &[SeasonRow], column: usize) -> Result<f64> {
    let vals = rows
        .iter()
        .map(|r| {
            r.seasons.get(column).copied().ok_or_else(|| {
                Error::InvalidInput(format!("line {} has no season column {column}", r.line_id))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    seasonal_average(&vals)
}

fn label_index(labels: &[String], name: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::InvalidInput(format!("no season labelled {name}")))
}

/// Mean summer burn over mean winter burn.
pub fn summer_winter_ratio(labels: &[String], acres: &[SeasonRow]) -> Result<f64> {
    let summer = column_mean(acres, label_index(labels, "summer")?)?;
    let winter = column_mean(acres, label_index(labels, "winter")?)?;
    if winter <= 0.0 {
        return Err(Error::InvalidInput("winter mean burned area is zero".into()));
    }
    Ok(summer / winter)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonExtremes {
    pub label: String,
    pub mean: f64,
    /// (line id, value) of the largest entry.
    pub max: (u32, f64),
    pub min: (u32, f64),
}

/// Column mean plus the largest and smallest line in each season.
pub fn seasonal_extremes(labels: &[String], rows: &[SeasonRow]) -> Result<Vec<SeasonExtremes>> {
    labels
        .iter()
        .enumerate()
        .map(|(k, label)| {
            let mean = column_mean(rows, k)?;
            let mut max = (0, f64::NEG_INFINITY);
            let mut min = (0, f64::INFINITY);
            for r in rows {
                let v = r.seasons[k];
                if v > max.1 {
                    max = (r.line_id, v);
                }
                if v < min.1 {
                    min = (r.line_id, v);
                }
            }
            Ok(SeasonExtremes {
                label: label.clone(),
                mean,
                max,
                min,
            })
        })
        .collect()
}
