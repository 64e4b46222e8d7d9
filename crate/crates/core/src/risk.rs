//! Damage accounting and the per-line risk metric.
//!
//! For line `j` with `I` ignitions:
//!
//! * environmental loss `LBE = Σ_i acres_i · cbe / I`
//! * line reconstruction loss `LBL = Σ_i Σ_{k affected} X_k · cbl / I`
//! * total loss `WFL = LBE + LBL`
//! * risk metric `M_j = WFL_j / max_k WFL_k`
//!
//! Seasonal studies average the per-season losses.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fire::BurnRaster;
use crate::network::{GridNetwork, LineCorridors};
use crate::scenario::ScenarioResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    /// Dollars per burned acre.
    pub cbe: f64,
    /// Dollars per mile of line reconstruction.
    pub cbl: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            cbe: 20_000.0,
            cbl: 200_000.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cbe.is_finite() && self.cbe > 0.0 && self.cbl.is_finite() && self.cbl > 0.0) {
            return Err(Error::InvalidInput(format!(
                "costs must be positive, got cbe={} cbl={}",
                self.cbe, self.cbl
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> CostParams {
        CostParams {
            cbe: self.cbe * factor,
            cbl: self.cbl * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRisk {
    pub line_id: u32,
    pub lbe: f64,
    pub lbl: f64,
    pub wfl: f64,
    pub metric: f64,
    /// 1 is the riskiest line.
    pub rank: usize,
    /// Mean burned acres per ignition, one entry per season.
    pub season_acres: Vec<f64>,
    /// Mean affected line miles per ignition, one entry per season.
    pub season_miles: Vec<f64>,
}

/// Lines whose corridor, dilated by `buffer_cells` (Chebyshev), touches a burned cell.
pub fn affected_lines(burn: &BurnRaster, corridors: &LineCorridors, buffer_cells: usize) -> BTreeSet<u32> {
    let (nc, nr) = (burn.ncols(), burn.nrows());
    let b = buffer_cells;
    let mut out = BTreeSet::new();
    if burn.burned_cells() == 0 {
        return out;
    }
    for (id, cells) in corridors.iter() {
        let hit = cells.iter().any(|c| {
            let rows = c.row.saturating_sub(b)..=(c.row + b).min(nr - 1);
            rows.into_iter().any(|r| {
                let cols = c.col.saturating_sub(b)..=(c.col + b).min(nc - 1);
                cols.into_iter().any(|col| burn.arrival()[r * nc + col].is_finite())
            })
        });
        if hit {
            out.insert(id);
        }
    }
    out
}

/// Environmental loss for one line from per-ignition burned acreage.
pub fn lbe(acres_per_ignition: &[f64], costs: &CostParams) -> Result<f64> {
    if acres_per_ignition.is_empty() {
        return Err(Error::InvalidInput("LBE needs at least one ignition".into()));
    }
    let total: f64 = acres_per_ignition.iter().map(|a| a * costs.cbe).sum();
    Ok(total / acres_per_ignition.len() as f64)
}

/// Reconstruction loss for one line; every affected line is charged its full length.
pub fn lbl(affected_per_ignition: &[BTreeSet<u32>], network: &GridNetwork, costs: &CostParams) -> Result<f64> {
    if affected_per_ignition.is_empty() {
        return Err(Error::InvalidInput("LBL needs at least one ignition".into()));
    }
    let mut total = 0.0;
    for set in affected_per_ignition {
        for id in set {
            total += network.line_length(*id)? * costs.cbl;
        }
    }
    Ok(total / affected_per_ignition.len() as f64)
}

pub fn wfl(lbe: f64, lbl: f64) -> f64 {
    lbe + lbl
}

/// Normalizes losses by the worst line.
pub fn risk_metric(wfl_by_line: &BTreeMap<u32, f64>) -> Result<BTreeMap<u32, f64>> {
    if wfl_by_line.is_empty() {
        return Err(Error::InvalidInput("no lines to rank".into()));
    }
    if let Some((id, v)) = wfl_by_line.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidInput(format!("line {id} has invalid loss {v}")));
    }
    let max = wfl_by_line.values().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::DegenerateNormalization);
    }
    Ok(wfl_by_line.iter().map(|(id, v)| (*id, v / max)).collect())
}

pub fn seasonal_average(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("seasonal average of an empty list".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Orders records by metric (descending), then line id, and assigns ranks.
pub fn rank(records: &mut [LineRisk]) {
    records.sort_by(|a, b| b.metric.total_cmp(&a.metric).then(a.line_id.cmp(&b.line_id)));
    for (i, r) in records.iter_mut().enumerate() {
        r.rank = i + 1;
    }
}

fn finish(mut records: Vec<LineRisk>) -> Result<Vec<LineRisk>> {
    let wfl_map: BTreeMap<u32, f64> = records.iter().map(|r| (r.line_id, r.wfl)).collect();
    let metric = risk_metric(&wfl_map)?;
    for r in &mut records {
        r.metric = metric[&r.line_id];
    }
    rank(&mut records);
    Ok(records)
}

/// Per-line losses from batch results. `season_count` fixes the table width;
/// every ignitable line must have results for every season.
pub fn assess_results(
    results: &[ScenarioResult],
    network: &GridNetwork,
    season_count: usize,
    costs: &CostParams,
) -> Result<Vec<LineRisk>> {
    costs.validate()?;
    if results.is_empty() {
        return Err(Error::InvalidInput("no scenario results to assess".into()));
    }
    // line -> season -> results
    let mut grouped: BTreeMap<u32, Vec<Vec<&ScenarioResult>>> = BTreeMap::new();
    for r in results {
        if r.season_index >= season_count {
            return Err(Error::InvalidInput(format!(
                "result for line {} has season index {} but only {season_count} seasons exist",
                r.line_id, r.season_index
            )));
        }
        network.line_length(r.line_id)?;
        grouped
            .entry(r.line_id)
            .or_insert_with(|| vec![Vec::new(); season_count])[r.season_index]
            .push(r);
    }

    let mut records = Vec::with_capacity(grouped.len());
    for (line_id, seasons) in grouped {
        let mut season_lbe = Vec::with_capacity(season_count);
        let mut season_lbl = Vec::with_capacity(season_count);
        let mut season_acres = Vec::with_capacity(season_count);
        let mut season_miles = Vec::with_capacity(season_count);
        for (s, runs) in seasons.iter().enumerate() {
            if runs.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "line {line_id} has no results for season {}",
                    s + 1
                )));
            }
            let acres: Vec<f64> = runs.iter().map(|r| r.burned_acres).collect();
            let sets: Vec<BTreeSet<u32>> = runs.iter().map(|r| r.affected_line_ids.clone()).collect();
            season_lbe.push(lbe(&acres, costs)?);
            season_lbl.push(lbl(&sets, network, costs)?);
            season_acres.push(seasonal_average(&acres)?);
            let miles: Vec<f64> = sets
                .iter()
                .map(|set| set.iter().map(|id| network.line_length(*id).unwrap_or(0.0)).sum())
                .collect();
            season_miles.push(seasonal_average(&miles)?);
        }
        let line_lbe = seasonal_average(&season_lbe)?;
        let line_lbl = seasonal_average(&season_lbl)?;
        records.push(LineRisk {
            line_id,
            lbe: line_lbe,
            lbl: line_lbl,
            wfl: wfl(line_lbe, line_lbl),
            metric: 0.0,
            rank: 0,
            season_acres,
            season_miles,
        });
    }
    finish(records)
}

/// One table row: per-season means for a line.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonRow {
    pub line_id: u32,
    pub seasons: Vec<f64>,
}

/// Per-line losses straight from season tables of mean burned acres and
/// mean affected miles (one row per line, one column per season).
pub fn assess_tables(acres: &[SeasonRow], miles: &[SeasonRow], costs: &CostParams) -> Result<Vec<LineRisk>> {
    costs.validate()?;
    if acres.is_empty() {
        return Err(Error::InvalidInput("acre table is empty".into()));
    }
    let miles_by_line: BTreeMap<u32, &SeasonRow> = miles.iter().map(|r| (r.line_id, r)).collect();
    if miles_by_line.len() != acres.len() {
        return Err(Error::InvalidInput(format!(
            "acre table has {} lines, mile table has {}",
            acres.len(),
            miles_by_line.len()
        )));
    }
    let mut records = Vec::with_capacity(acres.len());
    for a in acres {
        let m = miles_by_line.get(&a.line_id).ok_or_else(|| {
            Error::InvalidInput(format!("line {} missing from the mile table", a.line_id))
        })?;
        let line_lbe = seasonal_average(&a.seasons)? * costs.cbe;
        let line_lbl = seasonal_average(&m.seasons)? * costs.cbl;
        records.push(LineRisk {
            line_id: a.line_id,
            lbe: line_lbe,
            lbl: line_lbl,
            wfl: wfl(line_lbe, line_lbl),
            metric: 0.0,
            rank: 0,
            season_acres: a.seasons.clone(),
            season_miles: m.seasons.clone(),
        });
    }
    finish(records)
}
