//! Builders and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, Utc};
use gridfire_core::fire::{directional_ros, edge_minutes, travel_bearing};
use gridfire_core::weather::parse_timestamp;
use gridfire_core::{
    FuelCatalog, GeoPoint, GridGeometry, GridIndex, IgnitionSpec, LandscapeRaster, PlanarPoint, SpreadParams,
    WeatherSample, WeatherSeries,
};
use rand::Rng;

pub const ORIGIN: GeoPoint = GeoPoint {
    lat: 37.80,
    lon: -120.20,
};

pub fn t0() -> DateTime<Utc> {
    parse_timestamp("2022-07-01T12:00Z").unwrap()
}

pub fn grid(ncols: usize, nrows: usize, cell_size: f64) -> GridGeometry {
    GridGeometry::new(ncols, nrows, ORIGIN, cell_size).unwrap()
}

pub fn sample(at: DateTime<Utc>, wind_speed: f64, wind_dir_from: f64, rel_humidity: f64) -> WeatherSample {
    WeatherSample {
        timestamp: at,
        wind_speed,
        wind_dir_from,
        temperature: 25.0,
        rel_humidity,
    }
}

/// `hours` identical samples starting at [`t0`].
pub fn constant_weather(hours: usize, wind_speed: f64, wind_dir_from: f64, rel_humidity: f64) -> WeatherSeries {
    hourly_weather(&vec![(wind_speed, wind_dir_from, rel_humidity); hours])
}

/// One sample per (speed, from, rh) triple, hourly from [`t0`].
pub fn hourly_weather(hours: &[(f64, f64, f64)]) -> WeatherSeries {
    WeatherSeries::new(
        hours
            .iter()
            .enumerate()
            .map(|(h, &(s, d, rh))| sample(t0() + Duration::hours(h as i64), s, d, rh))
            .collect(),
    )
    .unwrap()
}

pub fn ignition(cell: GridIndex, duration_hours: f64) -> IgnitionSpec {
    IgnitionSpec {
        line_id: 1,
        ignition_index: 1,
        season_index: 0,
        cell,
        start: t0(),
        duration_hours,
    }
}

/// Landscape from explicit per-cell fuel, slope and aspect; other layers zero.
pub fn landscape(g: GridGeometry, fuel: Vec<u32>, slope: Vec<f64>, aspect: Vec<f64>) -> LandscapeRaster {
    let n = g.len();
    LandscapeRaster::new(
        g,
        vec![0.0; n],
        slope,
        aspect,
        fuel,
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        &FuelCatalog::default(),
    )
    .unwrap()
}

pub fn uniform_landscape(n: usize, cell_size: f64, fuel: u32) -> LandscapeRaster {
    let g = grid(n, n, cell_size);
    let len = g.len();
    landscape(g, vec![fuel; len], vec![0.0; len], vec![0.0; len])
}

/// Random fuels (about 15% non-burnable), slopes and aspects.
pub fn random_landscape(rng: &mut impl Rng, ncols: usize, nrows: usize) -> LandscapeRaster {
    let g = grid(ncols, nrows, 30.0);
    let len = g.len();
    let fuel = (0..len)
        .map(|_| if rng.random_bool(0.15) { 0 } else { rng.random_range(1..=3) })
        .collect();
    let slope = (0..len)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..35.0) })
        .collect();
    let aspect = (0..len).map(|_| rng.random_range(0.0..360.0)).collect();
    landscape(g, fuel, slope, aspect)
}

const QUEEN_AND_KNIGHT: [(i32, i32); 16] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (2, 1),
    (1, 2),
    (-1, 2),
    (-2, 1),
    (-2, -1),
    (-1, -2),
    (1, -2),
    (2, -1),
];

/// Arrival times by repeated relaxation of every lattice edge under one
/// constant weather sample. Knight steps need both cells they brush past
/// to be burnable.
pub fn bellman_ford(
    land: &LandscapeRaster,
    catalog: &FuelCatalog,
    w: &WeatherSample,
    p: &SpreadParams,
    start: GridIndex,
    duration_min: f64,
    sixteen: bool,
) -> Vec<f64> {
    let g = land.geometry();
    let (nc, nr) = (g.ncols as i32, g.nrows as i32);
    let idx = |r: i32, c: i32| (r * nc + c) as usize;
    let fuel = |i: usize| catalog.get(land.fuel[i]).unwrap();
    let mut t = vec![f64::INFINITY; g.len()];
    let s = idx(start.row as i32, start.col as i32);
    if !fuel(s).burnable {
        return t;
    }
    t[s] = 0.0;
    let moves = if sixteen { &QUEEN_AND_KNIGHT[..] } else { &QUEEN_AND_KNIGHT[..8] };
    loop {
        let mut changed = false;
        for r in 0..nr {
            for c in 0..nc {
                let u = idx(r, c);
                if !t[u].is_finite() {
                    continue;
                }
                for &(dr, dc) in moves {
                    let (r2, c2) = (r + dr, c + dc);
                    if r2 < 0 || c2 < 0 || r2 >= nr || c2 >= nc {
                        continue;
                    }
                    let v = idx(r2, c2);
                    if !fuel(v).burnable {
                        continue;
                    }
                    if dr.abs() + dc.abs() == 3 {
                        let gates = if dr.abs() == 2 {
                            [(r + dr.signum(), c), (r + dr.signum(), c + dc)]
                        } else {
                            [(r, c + dc.signum()), (r + dr, c + dc.signum())]
                        };
                        if gates.iter().any(|&(gr, gc)| !fuel(idx(gr, gc)).burnable) {
                            continue;
                        }
                    }
                    let bearing = travel_bearing(dr, dc);
                    let ra = directional_ros(fuel(u), land.slope[u], land.aspect[u], w, bearing, p);
                    let rb = directional_ros(fuel(v), land.slope[v], land.aspect[v], w, bearing, p);
                    let dist = g.cell_size * ((dr * dr + dc * dc) as f64).sqrt();
                    if let Some(cost) = edge_minutes(dist, ra, rb, p.min_ros) {
                        let cand = t[u] + cost;
                        if cand <= duration_min && cand < t[v] {
                            t[v] = cand;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return t;
        }
    }
}

/// Closed-box test for the segment against cell (col, row) in cell units.
pub fn segment_touches_cell(a: (f64, f64), b: (f64, f64), col: usize, row: usize) -> bool {
    // Liang-Barsky clip against [col, col+1] x [row, row+1], boundaries included.
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let checks = [
        (-dx, a.0 - col as f64),
        (dx, col as f64 + 1.0 - a.0),
        (-dy, a.1 - row as f64),
        (dy, row as f64 + 1.0 - a.1),
    ];
    for (p, q) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
    }
    lo <= hi
}

/// Cells touched by a segment given in cell units: samples every 1/100 of
/// a cell, then confirms the sampled cells' neighbours with an exact
/// closed-box test so grazing contacts are not missed.
pub fn dense_cells(a: (f64, f64), b: (f64, f64), ncols: usize, nrows: usize) -> BTreeSet<GridIndex> {
    let len = (b.0 - a.0).hypot(b.1 - a.1);
    let steps = (len * 100.0).ceil() as usize + 1;
    let mut sampled = BTreeSet::new();
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let u = a.0 + t * (b.0 - a.0);
        let v = a.1 + t * (b.1 - a.1);
        let col = (u.floor() as usize).min(ncols - 1);
        let row = (v.floor() as usize).min(nrows - 1);
        sampled.insert(GridIndex::new(row, col));
    }
    let mut out = BTreeSet::new();
    for c in &sampled {
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                let (r, col) = (c.row as i64 + dr, c.col as i64 + dc);
                if r < 0 || col < 0 || r >= nrows as i64 || col >= ncols as i64 {
                    continue;
                }
                if segment_touches_cell(a, b, col as usize, r as usize) {
                    out.insert(GridIndex::new(r as usize, col as usize));
                }
            }
        }
    }
    out
}

pub fn planar(g: &GridGeometry, uv: (f64, f64)) -> PlanarPoint {
    g.from_cell_units(uv.0, uv.1)
}

/// A small randomized study: landscape, network, weather and config.
pub struct RandomStudy {
    pub landscape: LandscapeRaster,
    pub network: gridfire_core::GridNetwork,
    pub weather: WeatherSeries,
    pub config: gridfire_core::StudyConfig,
}

/// 24 × 24 landscape, a chain of 3–6 straight lines plus one link,
/// 1–2 seasons inside an 8 hour weather window.
pub fn random_study(rng: &mut impl Rng) -> RandomStudy {
    use gridfire_core::{BranchInput, BranchKind, Bus, GridNetwork, Placement, Season, StudyConfig};

    let n = 24;
    let landscape = random_landscape(rng, n, n);
    let g = *landscape.geometry();
    let nbus = rng.random_range(4..=7);
    let mut uv: Vec<(f64, f64)> = Vec::new();
    while uv.len() < nbus {
        let p = (rng.random_range(0.5..n as f64 - 0.5), rng.random_range(0.5..n as f64 - 0.5));
        if uv.iter().all(|q| (q.0 - p.0).hypot(q.1 - p.1) > 2.0) {
            uv.push(p);
        }
    }
    let buses: Vec<Bus> = uv
        .iter()
        .enumerate()
        .map(|(i, p)| Bus {
            id: i as u32 + 1,
            location: g.to_geo(planar(&g, *p)).unwrap(),
        })
        .collect();
    let mut branches: Vec<BranchInput> = (1..nbus - 1)
        .map(|k| BranchInput {
            id: k as u32,
            kind: BranchKind::Line,
            from_bus: k as u32,
            to_bus: k as u32 + 1,
            route: vec![buses[k - 1].location, buses[k].location],
        })
        .collect();
    branches.push(BranchInput {
        id: nbus as u32 - 1,
        kind: BranchKind::Link,
        from_bus: nbus as u32 - 1,
        to_bus: nbus as u32,
        route: Vec::new(),
    });
    let network = GridNetwork::new(buses, branches).unwrap();

    let hours: Vec<(f64, f64, f64)> = (0..8)
        .map(|_| (rng.random_range(0.0..9.0), rng.random_range(0.0..360.0), rng.random_range(8.0..80.0)))
        .collect();
    let weather = hourly_weather(&hours);
    let duration_hours = rng.random_range(0.5..3.0);
    let seasons = (0..rng.random_range(1..=2))
        .map(|s| Season {
            label: format!("s{s}"),
            start: t0() + Duration::hours(s as i64 * 4),
        })
        .collect();
    let config = StudyConfig {
        ignitions_per_line: rng.random_range(1..=3),
        seasons,
        duration_hours,
        placement: if rng.random_bool(0.5) { Placement::Even } else { Placement::SeededRandom },
        seed: rng.random(),
        buffer_cells: rng.random_range(0..=1),
        ..StudyConfig::default()
    };
    RandomStudy {
        landscape,
        network,
        weather,
        config,
    }
}
