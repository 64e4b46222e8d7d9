//! Ignition placement, scenario matrix construction and batch execution.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fire::{burned_area_acres, simulate_spread, BurnRaster, IgnitionSpec, SpreadParams, SpreadWarning};
use crate::geo::{GridGeometry, GridIndex, PlanarPoint};
use crate::landscape::{FuelCatalog, LandscapeRaster};
use crate::network::{Branch, GridNetwork, LineCorridors};
use crate::risk::{affected_lines, CostParams};
use crate::weather::{default_seasons, Season, WeatherSeries, DEFAULT_IGNITION_HOUR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Arc-length fractions k/(I+1).
    Even,
    /// Uniform arc-length draws keyed by (seed, line id).
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub ignitions_per_line: usize,
    pub seasons: Vec<Season>,
    pub duration_hours: f64,
    pub placement: Placement,
    pub seed: u64,
    pub spread: SpreadParams,
    pub costs: CostParams,
    /// Chebyshev dilation applied to line corridors when detecting damage.
    pub buffer_cells: usize,
}

pub const DEFAULT_STUDY_YEAR: i32 = 2022;

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            ignitions_per_line: 3,
            seasons: default_seasons(DEFAULT_STUDY_YEAR, DEFAULT_IGNITION_HOUR).expect("valid year"),
            duration_hours: 24.0,
            placement: Placement::Even,
            seed: 0,
            spread: SpreadParams::default(),
            costs: CostParams::default(),
            buffer_cells: 0,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ignitions_per_line == 0 {
            return Err(Error::InvalidInput("ignitions_per_line must be at least 1".into()));
        }
        if self.seasons.is_empty() {
            return Err(Error::InvalidInput("at least one season is required".into()));
        }
        if !(self.duration_hours.is_finite() && self.duration_hours > 0.0) {
            return Err(Error::InvalidInput("duration must be positive".into()));
        }
        self.spread.validate()?;
        self.costs.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub line_id: u32,
    /// 1-based.
    pub ignition_index: usize,
    /// 0-based position in the season list.
    pub season_index: usize,
    pub burned_cells: usize,
    pub burned_acres: f64,
    pub affected_line_ids: BTreeSet<u32>,
    pub affected_miles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioWarning {
    pub scenario: usize,
    pub line_id: u32,
    pub season_index: usize,
    pub ignition_index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub results: Vec<ScenarioResult>,
    pub warnings: Vec<ScenarioWarning>,
}

fn planar_route(line: &Branch, grid: &GridGeometry) -> Result<Vec<PlanarPoint>> {
    line.route.iter().map(|p| grid.to_planar(*p)).collect()
}

/// Point at arc-length fraction `t` in `[0, 1]` along a planar polyline.
pub fn point_along(route: &[PlanarPoint], t: f64) -> PlanarPoint {
    let seg: Vec<f64> = route.windows(2).map(|w| w[0].distance(&w[1])).collect();
    let total: f64 = seg.iter().sum();
    let mut target = t.clamp(0.0, 1.0) * total;
    for (w, len) in route.windows(2).zip(&seg) {
        if target <= *len && *len > 0.0 {
            return w[0].lerp(&w[1], target / len);
        }
        target -= len;
    }
    *route.last().expect("route has points")
}

/// Arc-length fractions of the ignition points on a line.
pub fn ignition_fractions(line_id: u32, count: usize, placement: Placement, seed: u64) -> Vec<f64> {
    match placement {
        Placement::Even => (1..=count).map(|k| k as f64 / (count + 1) as f64).collect(),
        Placement::SeededRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(line_id as u64);
            let mut out: Vec<f64> = Vec::with_capacity(count);
            while out.len() < count {
                let t = rng.random_range(0.0..1.0);
                if !out.contains(&t) {
                    out.push(t);
                }
            }
            out
        }
    }
}

/// Cells holding the ignition points of `line`; duplicates are kept.
pub fn place_ignitions(
    line: &Branch,
    grid: &GridGeometry,
    count: usize,
    placement: Placement,
    seed: u64,
) -> Result<Vec<GridIndex>> {
    if !line.is_line() {
        return Err(Error::Geometry(format!("branch {} is a link", line.id)));
    }
    let route = planar_route(line, grid)?;
    ignition_fractions(line.id, count, placement, seed)
        .into_iter()
        .map(|t| grid.cell_of(point_along(&route, t)))
        .collect()
}

/// One scenario per (line, season, ignition), in that order.
pub fn build_matrix(network: &GridNetwork, grid: &GridGeometry, cfg: &StudyConfig) -> Result<Vec<IgnitionSpec>> {
    cfg.validate()?;
    let mut specs = Vec::new();
    for line in network.ignitable_lines() {
        let cells = place_ignitions(line, grid, cfg.ignitions_per_line, cfg.placement, cfg.seed)?;
        for (season_index, season) in cfg.seasons.iter().enumerate() {
            for (i, cell) in cells.iter().enumerate() {
                specs.push(IgnitionSpec {
                    line_id: line.id,
                    ignition_index: i + 1,
                    season_index,
                    cell: *cell,
                    start: season.start,
                    duration_hours: cfg.duration_hours,
                });
            }
        }
    }
    Ok(specs)
}

/// Everything a batch reads; shared by reference across workers.
pub struct StudyInputs<'a> {
    pub landscape: &'a LandscapeRaster,
    pub catalog: &'a FuelCatalog,
    pub weather: &'a WeatherSeries,
    pub network: &'a GridNetwork,
}

/// Called once per finished scenario (from worker threads).
pub type BurnHook<'a> = &'a (dyn Fn(usize, &IgnitionSpec, &BurnRaster) + Sync);

/// Simulates every spec and matches each burn against the line corridors.
///
/// Input problems (weather coverage, raster extent) fail the whole batch
/// before any simulation runs. Problems inside a single scenario become a
/// zeroed result plus a warning so the per-line denominators stay fixed.
pub fn run_batch(
    specs: &[IgnitionSpec],
    inputs: &StudyInputs<'_>,
    cfg: &StudyConfig,
    workers: usize,
    hook: Option<BurnHook<'_>>,
) -> Result<BatchOutput> {
    cfg.spread.validate()?;
    let grid = inputs.landscape.geometry();
    let corridors = LineCorridors::build(inputs.network, grid)?;
    for s in specs {
        inputs.weather.window(s.start, s.weather_hours())?;
        if s.cell.row >= grid.nrows || s.cell.col >= grid.ncols {
            return Err(Error::InvalidInput(format!(
                "ignition cell ({}, {}) of line {} is outside the raster",
                s.cell.row, s.cell.col, s.line_id
            )));
        }
        if inputs.network.line_length(s.line_id).is_err() {
            return Err(Error::Topology(format!("scenario references unknown line {}", s.line_id)));
        }
    }

    let alpha = inputs.landscape.cell_acreage();
    let run_one = |(n, spec): (usize, &IgnitionSpec)| -> (ScenarioResult, Option<ScenarioWarning>) {
        let warn = |message: String| ScenarioWarning {
            scenario: n,
            line_id: spec.line_id,
            season_index: spec.season_index,
            ignition_index: spec.ignition_index,
            message,
        };
        let empty = ScenarioResult {
            line_id: spec.line_id,
            ignition_index: spec.ignition_index,
            season_index: spec.season_index,
            burned_cells: 0,
            burned_acres: 0.0,
            affected_line_ids: BTreeSet::new(),
            affected_miles: 0.0,
        };
        let burn = match simulate_spread(spec, inputs.landscape, inputs.catalog, inputs.weather, &cfg.spread) {
            Ok(b) => b,
            Err(e) => return (empty, Some(warn(format!("simulation failed: {e}")))),
        };
        if let Some(h) = hook {
            h(n, spec, &burn);
        }
        let affected = affected_lines(&burn, &corridors, cfg.buffer_cells);
        let affected_miles = affected
            .iter()
            .map(|id| inputs.network.line_length(*id).unwrap_or(0.0))
            .sum();
        let warning = burn.warning.map(|w| match w {
            SpreadWarning::NonBurnableIgnition => warn(format!(
                "ignition cell ({}, {}) is non-burnable; scenario contributes no damage",
                spec.cell.row, spec.cell.col
            )),
        });
        let cells = burn.burned_cells();
        (
            ScenarioResult {
                burned_cells: cells,
                burned_acres: burned_area_acres(&burn, alpha),
                affected_line_ids: affected,
                affected_miles,
                ..empty
            },
            warning,
        )
    };

    let outcomes: Vec<(ScenarioResult, Option<ScenarioWarning>)> = if workers <= 1 {
        specs.iter().enumerate().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))?;
        pool.install(|| specs.par_iter().enumerate().map(run_one).collect())
    };

    let mut results = Vec::with_capacity(outcomes.len());
    let mut warnings = Vec::new();
    for (r, w) in outcomes {
        results.push(r);
        warnings.extend(w);
    }
    if results.len() != specs.len() {
        return Err(Error::Invariant("batch lost scenarios".into()));
    }
    Ok(BatchOutput { results, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use crate::network::{BranchInput, BranchKind, Bus};

    fn grid() -> GridGeometry {
        GridGeometry::new(40, 40, GeoPoint { lat: 37.8, lon: -120.2 }, 30.0).unwrap()
    }

    fn straight_line(g: &GridGeometry, from: (f64, f64), to: (f64, f64)) -> GridNetwork {
        let a = g.to_geo(g.from_cell_units(from.0, from.1)).unwrap();
        let b = g.to_geo(g.from_cell_units(to.0, to.1)).unwrap();
        GridNetwork::new(
            vec![Bus { id: 1, location: a }, Bus { id: 2, location: b }],
            vec![BranchInput {
                id: 5,
                kind: BranchKind::Line,
                from_bus: 1,
                to_bus: 2,
                route: vec![a, b],
            }],
        )
        .unwrap()
    }

    #[test]
    fn single_even_ignition_is_midpoint() {
        let g = grid();
        let n = straight_line(&g, (4.5, 10.5), (30.5, 10.5));
        let cells = place_ignitions(n.branch(5).unwrap(), &g, 1, Placement::Even, 0).unwrap();
        assert_eq!(cells, vec![GridIndex::new(10, 17)]);
    }

    #[test]
    fn three_even_ignitions_at_quarters() {
        let g = grid();
        let n = straight_line(&g, (2.3, 5.3), (34.3, 29.3));
        let cells = place_ignitions(n.branch(5).unwrap(), &g, 3, Placement::Even, 0).unwrap();
        // arc-length interpolation oracle in cell units
        for (cell, t) in cells.iter().zip([0.25, 0.5, 0.75]) {
            let u: f64 = 2.3 + t * 32.0;
            let v: f64 = 5.3 + t * 24.0;
            assert_eq!(*cell, GridIndex::new(v.floor() as usize, u.floor() as usize), "t={t}");
        }
    }

    #[test]
    fn seeded_placement_is_deterministic() {
        let a = ignition_fractions(7, 5, Placement::SeededRandom, 42);
        let b = ignition_fractions(7, 5, Placement::SeededRandom, 42);
        let c = ignition_fractions(8, 5, Placement::SeededRandom, 42);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|t| (0.0..1.0).contains(t)));
    }

    #[test]
    fn matrix_counts_and_order() {
        let g = grid();
        let n = straight_line(&g, (2.0, 5.0), (34.0, 29.0));
        let mut cfg = StudyConfig {
            ignitions_per_line: 2,
            ..StudyConfig::default()
        };
        cfg.seasons.truncate(2);
        let specs = build_matrix(&n, &g, &cfg).unwrap();
        assert_eq!(specs.len(), 4);
        let keys: Vec<_> = specs.iter().map(|s| (s.season_index, s.ignition_index)).collect();
        assert_eq!(keys, vec![(0, 1), (0, 2), (1, 1), (1, 2)]);

        cfg.ignitions_per_line = 1;
        cfg.seasons.truncate(1);
        assert_eq!(build_matrix(&n, &g, &cfg).unwrap().len(), 1);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = StudyConfig {
            ignitions_per_line: 0,
            ..StudyConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = StudyConfig {
            seasons: vec![],
            ..StudyConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
