//! Deterministic surface fire spread by minimum travel time.
//!
//! Cells are nodes of an 8- or 16-neighbour lattice. The time to cross an
//! edge is the center-to-center distance divided by the harmonic mean of
//! the directional rate of spread at both ends. Weather is held constant
//! within each hour; an edge whose crossing straddles an hour boundary
//! finishes the remaining fraction at the next hour's rate, which keeps
//! the problem FIFO so a single label-setting pass is exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ascii_grid::{AsciiGrid, AsciiHeader, DEFAULT_NODATA};
use crate::error::{Error, Result};
use crate::geo::GridIndex;
use crate::landscape::{FuelCatalog, FuelModel, LandscapeRaster};
use crate::weather::{WeatherSample, WeatherSeries};

pub const SLOPE_COEFF: f64 = 0.3;
pub const MOISTURE_FACTOR_RANGE: (f64, f64) = (0.1, 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Neighborhood {
    Eight,
    Sixteen,
}

impl TryFrom<u8> for Neighborhood {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            8 => Ok(Neighborhood::Eight),
            16 => Ok(Neighborhood::Sixteen),
            other => Err(format!("neighborhood must be 8 or 16, got {other}")),
        }
    }
}

impl From<Neighborhood> for u8 {
    fn from(n: Neighborhood) -> u8 {
        match n {
            Neighborhood::Eight => 8,
            Neighborhood::Sixteen => 16,
        }
    }
}

const QUEEN: [(i32, i32); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

const KNIGHT: [(i32, i32); 8] = [
    (2, 1),
    (1, 2),
    (-1, 2),
    (-2, 1),
    (-2, -1),
    (-1, -2),
    (1, -2),
    (2, -1),
];

impl Neighborhood {
    /// (row, col) offsets; rows grow northward.
    pub fn offsets(self) -> Vec<(i32, i32)> {
        match self {
            Neighborhood::Eight => QUEEN.to_vec(),
            Neighborhood::Sixteen => QUEEN.iter().chain(KNIGHT.iter()).copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpreadParams {
    pub neighborhood: Neighborhood,
    /// Relative humidity (%) at which fuels spread at their base rate.
    pub humidity_ref: f64,
    /// Edges slower than this (m/min) are impassable.
    pub min_ros: f64,
    pub max_eccentricity: f64,
}

impl Default for SpreadParams {
    fn default() -> Self {
        SpreadParams {
            neighborhood: Neighborhood::Sixteen,
            humidity_ref: 30.0,
            min_ros: 0.01,
            max_eccentricity: 0.95,
        }
    }
}

impl SpreadParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.humidity_ref.is_finite() && self.humidity_ref > 0.0) {
            return Err(Error::InvalidInput("humidity_ref must be positive".into()));
        }
        if !(self.min_ros.is_finite() && self.min_ros >= 0.0) {
            return Err(Error::InvalidInput("min_ros must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.max_eccentricity) {
            return Err(Error::InvalidInput("max_eccentricity must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IgnitionSpec {
    pub line_id: u32,
    /// 1-based.
    pub ignition_index: usize,
    /// 0-based position in the study's season list.
    pub season_index: usize,
    pub cell: GridIndex,
    pub start: DateTime<Utc>,
    pub duration_hours: f64,
}

impl IgnitionSpec {
    pub fn duration_minutes(&self) -> f64 {
        self.duration_hours * 60.0
    }

    /// Hourly weather samples the simulation consumes.
    pub fn weather_hours(&self) -> usize {
        (self.duration_hours.ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpreadWarning {
    NonBurnableIgnition,
}

/// Arrival times (minutes after ignition) and burned status per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BurnRaster {
    ncols: usize,
    nrows: usize,
    arrival: Vec<f64>,
    pub warning: Option<SpreadWarning>,
}

impl BurnRaster {
    pub fn unburned(ncols: usize, nrows: usize) -> Self {
        BurnRaster {
            ncols,
            nrows,
            arrival: vec![f64::INFINITY; ncols * nrows],
            warning: None,
        }
    }

    pub fn from_arrival(ncols: usize, nrows: usize, arrival: Vec<f64>) -> Self {
        assert_eq!(arrival.len(), ncols * nrows);
        BurnRaster {
            ncols,
            nrows,
            arrival,
            warning: None,
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn arrival(&self) -> &[f64] {
        &self.arrival
    }

    pub fn arrival_at(&self, idx: GridIndex) -> f64 {
        self.arrival[idx.row * self.ncols + idx.col]
    }

    /// Cell status S.
    pub fn is_burned(&self, idx: GridIndex) -> bool {
        self.arrival_at(idx).is_finite()
    }

    pub fn status(&self) -> impl Iterator<Item = bool> + '_ {
        self.arrival.iter().map(|a| a.is_finite())
    }

    pub fn burned_cells(&self) -> usize {
        self.status().filter(|s| *s).count()
    }

    pub fn burned_indices(&self) -> impl Iterator<Item = GridIndex> + '_ {
        let nc = self.ncols;
        self.arrival
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_finite())
            .map(move |(i, _)| GridIndex::new(i / nc, i % nc))
    }

    /// Writes arrival minutes as an ASCII grid; unburned cells are NODATA.
    pub fn write_arrival(&self, header: &AsciiHeader, path: &Path) -> Result<()> {
        let values = self
            .arrival
            .iter()
            .map(|a| if a.is_finite() { *a } else { DEFAULT_NODATA })
            .collect();
        AsciiGrid {
            header: AsciiHeader {
                nodata: DEFAULT_NODATA,
                ..header.clone()
            },
            values,
        }
        .write(path)
    }
}

pub fn burned_area_acres(burn: &BurnRaster, acres_per_cell: f64) -> f64 {
    burn.burned_cells() as f64 * acres_per_cell
}

/// Humidity multiplier, clamped to [`MOISTURE_FACTOR_RANGE`].
pub fn moisture_factor(fuel: &FuelModel, w: &WeatherSample, p: &SpreadParams) -> f64 {
    (p.humidity_ref / w.rel_humidity.max(1.0))
        .powf(fuel.moisture_exp)
        .clamp(MOISTURE_FACTOR_RANGE.0, MOISTURE_FACTOR_RANGE.1)
}

/// Upslope boost for travel along bearing `travel_dir_deg`.
pub fn slope_factor(slope_deg: f64, aspect_deg: f64, travel_dir_deg: f64) -> f64 {
    let upslope = aspect_deg + 180.0;
    1.0 + SLOPE_COEFF
        * slope_deg.to_radians().tan()
        * (travel_dir_deg - upslope).to_radians().cos().max(0.0)
}

/// Head-fire factor H and ellipse eccentricity for a fuel under wind.
pub fn wind_ellipse(fuel: &FuelModel, w: &WeatherSample, p: &SpreadParams) -> (f64, f64) {
    let head = 1.0 + fuel.wind_coeff * w.wind_speed.powf(fuel.wind_exp);
    let ecc = (1.0 - 1.0 / (head * head)).max(0.0).sqrt().min(p.max_eccentricity);
    (head, ecc)
}

pub fn wind_factor(head: f64, ecc: f64, wind_to_deg: f64, travel_dir_deg: f64) -> f64 {
    head * (1.0 - ecc) / (1.0 - ecc * (travel_dir_deg - wind_to_deg).to_radians().cos())
}

/// Directional rate of spread in m/min along compass bearing `travel_dir_deg`.
pub fn directional_ros(
    fuel: &FuelModel,
    slope_deg: f64,
    aspect_deg: f64,
    w: &WeatherSample,
    travel_dir_deg: f64,
    p: &SpreadParams,
) -> f64 {
    if !fuel.burnable {
        return 0.0;
    }
    let (head, ecc) = wind_ellipse(fuel, w, p);
    fuel.base_ros
        * moisture_factor(fuel, w, p)
        * slope_factor(slope_deg, aspect_deg, travel_dir_deg)
        * wind_factor(head, ecc, w.wind_to_dir(), travel_dir_deg)
}

/// Compass bearing (degrees) of a lattice step of `drow` north and `dcol` east.
pub fn travel_bearing(drow: i32, dcol: i32) -> f64 {
    (dcol as f64).atan2(drow as f64).to_degrees()
}

/// Minutes to cross `distance_m` between two cells spreading at `ros_a`
/// and `ros_b`; `None` when either end is below `min_ros`.
pub fn edge_minutes(distance_m: f64, ros_a: f64, ros_b: f64, min_ros: f64) -> Option<f64> {
    if !(ros_a >= min_ros && ros_b >= min_ros) || ros_a <= 0.0 || ros_b <= 0.0 {
        return None;
    }
    let harmonic = 2.0 * ros_a * ros_b / (ros_a + ros_b);
    Some(distance_m / harmonic)
}

/// Intermediate cells a knight step passes through, relative to the origin.
fn knight_gates(dr: i32, dc: i32) -> Option<[(i32, i32); 2]> {
    if dr.abs() == 2 && dc.abs() == 1 {
        Some([(dr.signum(), 0), (dr.signum(), dc)])
    } else if dr.abs() == 1 && dc.abs() == 2 {
        Some([(0, dc.signum()), (dr, dc.signum())])
    } else {
        None
    }
}

/// Lattice edges out of every cell, with crossing gates resolved up front.
struct Lattice {
    offsets: Vec<(i32, i32)>,
    bearings: Vec<f64>,
    distances: Vec<f64>,
}

impl Lattice {
    fn new(n: Neighborhood, cell_size: f64) -> Self {
        let offsets = n.offsets();
        let bearings = offsets.iter().map(|&(dr, dc)| travel_bearing(dr, dc)).collect();
        let distances = offsets
            .iter()
            .map(|&(dr, dc)| cell_size * ((dr * dr + dc * dc) as f64).sqrt())
            .collect();
        Lattice {
            offsets,
            bearings,
            distances,
        }
    }
}

/// Per-hour spread factors that depend only on fuel and weather.
struct EpochFactors {
    /// base_ros × moisture factor, by dense fuel index.
    base: Vec<f64>,
    /// Wind factor by dense fuel index, then direction.
    wind: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, PartialEq)]
struct Queued {
    time: f64,
    cell: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on time, ties broken by cell index for determinism
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Runs one scenario. `weather` must contain an hourly sample for every
/// hour of `[ig.start, ig.start + duration)`.
pub fn simulate_spread(
    ig: &IgnitionSpec,
    land: &LandscapeRaster,
    catalog: &FuelCatalog,
    weather: &WeatherSeries,
    p: &SpreadParams,
) -> Result<BurnRaster> {
    p.validate()?;
    if !(ig.duration_hours.is_finite() && ig.duration_hours > 0.0) {
        return Err(Error::InvalidInput(format!(
            "ignition duration must be positive, got {} h",
            ig.duration_hours
        )));
    }
    let g = land.geometry();
    if ig.cell.row >= g.nrows || ig.cell.col >= g.ncols {
        return Err(Error::InvalidInput(format!(
            "ignition cell ({}, {}) outside {}x{} raster",
            ig.cell.row, ig.cell.col, g.nrows, g.ncols
        )));
    }
    let epochs = weather.window(ig.start, ig.weather_hours())?;
    let epochs = epochs.samples();

    let (nc, nr) = (g.ncols, g.nrows);
    let mut burn = BurnRaster::unburned(nc, nr);

    // Dense fuel indexing for the per-epoch tables.
    let fuels: Vec<&FuelModel> = catalog.models().collect();
    let fuel_slot = |id: u32| fuels.iter().position(|f| f.id == id);
    let mut cell_fuel = Vec::with_capacity(g.len());
    for &id in &land.fuel {
        cell_fuel.push(
            fuel_slot(id).ok_or_else(|| Error::Catalog(format!("fuel id {id} is not in the catalog")))?,
        );
    }
    let burnable: Vec<bool> = cell_fuel.iter().map(|&f| fuels[f].burnable).collect();

    let start = g.flat(ig.cell);
    if !burnable[start] {
        burn.warning = Some(SpreadWarning::NonBurnableIgnition);
        return Ok(burn);
    }

    let lattice = Lattice::new(p.neighborhood, g.cell_size);
    let ndir = lattice.offsets.len();

    // Slope factor per cell and direction; weather independent.
    let mut slope_f = vec![1.0; g.len() * ndir];
    for i in 0..g.len() {
        if land.slope[i] == 0.0 {
            continue;
        }
        for d in 0..ndir {
            slope_f[i * ndir + d] = slope_factor(land.slope[i], land.aspect[i], lattice.bearings[d]);
        }
    }

    let factors: Vec<EpochFactors> = epochs
        .iter()
        .map(|w| EpochFactors {
            base: fuels
                .iter()
                .map(|f| if f.burnable { f.base_ros * moisture_factor(f, w, p) } else { 0.0 })
                .collect(),
            wind: fuels
                .iter()
                .map(|f| {
                    let (head, ecc) = wind_ellipse(f, w, p);
                    let to = w.wind_to_dir();
                    lattice
                        .bearings
                        .iter()
                        .map(|&b| wind_factor(head, ecc, to, b))
                        .collect()
                })
                .collect(),
        })
        .collect();

    let ros = |epoch: usize, cell: usize, dir: usize| -> f64 {
        let f = cell_fuel[cell];
        let e = &factors[epoch];
        e.base[f] * slope_f[cell * ndir + dir] * e.wind[f][dir]
    };
    let edge_cost = |epoch: usize, from: usize, to: usize, dir: usize| -> Option<f64> {
        edge_minutes(
            lattice.distances[dir],
            ros(epoch, from, dir),
            ros(epoch, to, dir),
            p.min_ros,
        )
    };

    let horizon = epochs.len() as f64 * 60.0;
    let duration_min = ig.duration_minutes();
    let arrival = &mut burn.arrival;
    let mut done = vec![false; g.len()];
    let mut heap = BinaryHeap::new();
    arrival[start] = 0.0;
    heap.push(Queued { time: 0.0, cell: start });

    while let Some(Queued { time, cell }) = heap.pop() {
        if done[cell] || time > arrival[cell] {
            continue;
        }
        done[cell] = true;
        let (r, c) = ((cell / nc) as i32, (cell % nc) as i32);
        for (dir, &(dr, dc)) in lattice.offsets.iter().enumerate() {
            let (r2, c2) = (r + dr, c + dc);
            if r2 < 0 || c2 < 0 || r2 >= nr as i32 || c2 >= nc as i32 {
                continue;
            }
            let next = r2 as usize * nc + c2 as usize;
            if done[next] || !burnable[next] {
                continue;
            }
            if let Some(gates) = knight_gates(dr, dc) {
                let open = gates
                    .iter()
                    .all(|&(gr, gc)| burnable[(r + gr) as usize * nc + (c + gc) as usize]);
                if !open {
                    continue;
                }
            }
            let reached = traverse_edge(time, horizon, |epoch| edge_cost(epoch, cell, next, dir));
            if let Some(t) = reached {
                if t <= duration_min && t < arrival[next] {
                    arrival[next] = t;
                    heap.push(Queued { time: t, cell: next });
                }
            }
        }
    }
    Ok(burn)
}

/// Arrival time for an edge entered at `depart` when its crossing time in
/// hour `k` is `cost(k)` (`None`: impassable that hour). Runs of hours with
/// identical cost are treated as one interval so constant weather yields
/// exactly `depart + cost`.
fn traverse_edge(depart: f64, horizon: f64, cost: impl Fn(usize) -> Option<f64>) -> Option<f64> {
    let nepochs = (horizon / 60.0).round() as usize;
    let mut k = (depart / 60.0).floor() as usize;
    let mut at = depart;
    let mut remaining = 1.0;
    while k < nepochs {
        let c = cost(k);
        let mut last = k;
        while last + 1 < nepochs && cost(last + 1) == c {
            last += 1;
        }
        let interval_end = (last + 1) as f64 * 60.0;
        if let Some(c) = c {
            let finish = at + remaining * c;
            if finish <= interval_end {
                return Some(finish);
            }
            remaining -= (interval_end - at) / c;
        }
        at = interval_end;
        k = last + 1;
    }
    None
}
