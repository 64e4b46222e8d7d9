//! Bundled study fixture: an authored geographic layout of the IEEE 30-bus
//! system and the reference season tables for it.

use crate::error::Result;
use crate::geo::{GeoPoint, GridGeometry};
use crate::network::{BranchInput, BranchKind, Bus, GridNetwork};
use crate::risk::SeasonRow;

/// (branch id, from bus, to bus, is transformer link)
pub const IEEE30_BRANCHES: [(u32, u32, u32, bool); 41] = [
    (1, 1, 2, false),
    (2, 1, 3, false),
    (3, 2, 4, false),
    (4, 3, 4, false),
    (5, 2, 5, false),
    (6, 2, 6, false),
    (7, 4, 6, false),
    (8, 5, 7, false),
    (9, 6, 7, false),
    (10, 6, 8, false),
    (11, 6, 9, true),
    (12, 6, 10, true),
    (13, 9, 11, true),
    (14, 9, 10, true),
    (15, 4, 12, true),
    (16, 12, 13, true),
    (17, 12, 14, false),
    (18, 12, 15, false),
    (19, 12, 16, false),
    (20, 14, 15, false),
    (21, 16, 17, false),
    (22, 15, 18, false),
    (23, 18, 19, false),
    (24, 19, 20, false),
    (25, 10, 20, false),
    (26, 10, 17, false),
    (27, 10, 21, false),
    (28, 10, 22, false),
    (29, 21, 22, false),
    (30, 15, 23, false),
    (31, 22, 24, false),
    (32, 23, 24, false),
    (33, 24, 25, false),
    (34, 25, 26, false),
    (35, 25, 27, false),
    (36, 28, 27, true),
    (37, 27, 29, false),
    (38, 27, 30, false),
    (39, 29, 30, false),
    (40, 8, 28, false),
    (41, 6, 28, false),
];

/// Bus positions as fractions of the study extent (east, north).
const IEEE30_LAYOUT: [(f64, f64); 30] = [
    (0.10, 0.86),
    (0.24, 0.72),
    (0.11, 0.60),
    (0.26, 0.53),
    (0.38, 0.86),
    (0.40, 0.60),
    (0.50, 0.74),
    (0.60, 0.64),
    (0.46, 0.47),
    (0.53, 0.40),
    (0.42, 0.37),
    (0.25, 0.36),
    (0.14, 0.31),
    (0.19, 0.20),
    (0.31, 0.18),
    (0.36, 0.29),
    (0.47, 0.28),
    (0.39, 0.10),
    (0.49, 0.12),
    (0.57, 0.21),
    (0.63, 0.33),
    (0.69, 0.42),
    (0.28, 0.06),
    (0.73, 0.21),
    (0.81, 0.31),
    (0.91, 0.20),
    (0.83, 0.50),
    (0.73, 0.64),
    (0.92, 0.62),
    (0.93, 0.44),
];

/// Margin, as a fraction of the extent, kept clear around the layout.
const LAYOUT_MARGIN: f64 = 0.04;

/// Sideways bend of a line's midpoint, as a fraction of its chord length.
fn bend(line_id: u32) -> f64 {
    (((line_id * 37) % 11) as f64 - 5.0) / 60.0
}

/// IEEE 30-bus network laid out over `grid`: 34 routed lines and 7
/// transformer links (branches 11–16 and 36).
pub fn ieee30_network(grid: &GridGeometry) -> Result<GridNetwork> {
    let place = |fx: f64, fy: f64| -> Result<GeoPoint> {
        let span = 1.0 - 2.0 * LAYOUT_MARGIN;
        let u = (LAYOUT_MARGIN + fx * span) * grid.ncols as f64;
        let v = (LAYOUT_MARGIN + fy * span) * grid.nrows as f64;
        grid.to_geo(grid.from_cell_units(u, v))
    };
    let buses = IEEE30_LAYOUT
        .iter()
        .enumerate()
        .map(|(i, &(fx, fy))| {
            Ok(Bus {
                id: i as u32 + 1,
                location: place(fx, fy)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let branches = IEEE30_BRANCHES
        .iter()
        .map(|&(id, from, to, link)| {
            if link {
                return Ok(BranchInput {
                    id,
                    kind: BranchKind::Link,
                    from_bus: from,
                    to_bus: to,
                    route: Vec::new(),
                });
            }
            let (ax, ay) = IEEE30_LAYOUT[from as usize - 1];
            let (bx, by) = IEEE30_LAYOUT[to as usize - 1];
            let k = bend(id);
            let (mx, my) = ((ax + bx) / 2.0 - k * (by - ay), (ay + by) / 2.0 + k * (bx - ax));
            let mut route = vec![buses[from as usize - 1].location];
            if k != 0.0 {
                route.push(place(mx.clamp(0.0, 1.0), my.clamp(0.0, 1.0))?);
            }
            route.push(buses[to as usize - 1].location);
            Ok(BranchInput {
                id,
                kind: BranchKind::Line,
                from_bus: from,
                to_bus: to,
                route,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GridNetwork::new(buses, branches)
}

/// Study extent of the bundled fixture: 128 × 128 cells of 30 m.
pub fn default_study_grid() -> GridGeometry {
    GridGeometry::new(128, 128, GeoPoint { lat: 37.80, lon: -120.20 }, 30.0).expect("valid fixture grid")
}

/// Summed route length of the 34 fixture lines on [`default_study_grid`], in miles.
pub const IEEE30_TOTAL_LINE_MILES: f64 = 12.980_739_880_919;

pub const FIXTURE_SEASON_LABELS: [&str; 4] = ["winter", "spring", "summer", "fall"];

/// Mean burned acres per ignition: winter, spring, summer, fall, annual mean.
pub const REFERENCE_BURNED_ACRES: [(u32, [f64; 5]); 34] = [
    (1, [80.7, 1267.0, 3879.4, 2163.9, 1847.8]),
    (2, [106.8, 1497.2, 4211.6, 2360.9, 2044.1]),
    (3, [78.3, 710.0, 2299.2, 1192.3, 1069.9]),
    (4, [163.7, 1375.0, 3460.6, 2206.6, 1801.5]),
    (5, [281.2, 1872.1, 4637.5, 2382.8, 2293.4]),
    (6, [322.1, 3285.0, 8230.4, 5107.3, 4236.2]),
    (7, [346.4, 1918.3, 5392.0, 3315.9, 2743.2]),
    (8, [1047.6, 2440.3, 6045.7, 4371.7, 3476.3]),
    (9, [656.1, 1837.7, 4969.7, 3620.8, 2771.0]),
    (10, [546.3, 2114.1, 6226.6, 4347.4, 3308.6]),
    (17, [61.7, 1066.5, 3293.3, 1800.9, 1555.6]),
    (18, [104.4, 1575.5, 3910.2, 2531.7, 2030.5]),
    (19, [295.4, 1195.8, 3119.5, 2153.2, 1691.0]),
    (20, [80.7, 873.2, 2680.0, 1586.2, 1305.0]),
    (21, [688.7, 1991.3, 4354.5, 3217.4, 2563.0]),
    (22, [201.7, 1265.8, 2872.2, 2057.1, 1599.2]),
    (23, [98.5, 321.5, 1111.6, 726.1, 564.4]),
    (24, [816.2, 2926.7, 7117.0, 5164.2, 4006.0]),
    (25, [264.6, 471.0, 1440.2, 952.6, 782.1]),
    (26, [277.6, 857.7, 3503.3, 2095.1, 1683.4]),
    (27, [880.3, 1216.0, 2798.6, 1719.0, 1653.5]),
    (28, [665.5, 701.1, 2195.9, 1389.8, 1238.1]),
    (29, [708.3, 498.3, 843.5, 589.0, 659.8]),
    (30, [237.3, 746.2, 1767.7, 1398.7, 1037.5]),
    (31, [119.8, 1053.5, 3097.6, 2159.2, 1607.5]),
    (32, [944.9, 1352.4, 4094.7, 2817.0, 2302.3]),
    (33, [1987.1, 1715.5, 2672.9, 1933.8, 2077.3]),
    (34, [1492.4, 1245.7, 1479.4, 716.6, 1233.5]),
    (35, [2636.1, 1842.4, 1564.8, 1016.7, 1765.0]),
    (37, [2392.9, 1641.9, 1388.0, 805.5, 1557.1]),
    (38, [2341.9, 1510.8, 1332.9, 788.3, 1493.5]),
    (39, [614.5, 333.4, 469.8, 304.9, 430.6]),
    (40, [832.8, 1110.4, 3584.0, 2056.0, 1895.8]),
    (41, [997.7, 1150.8, 2369.2, 1354.8, 1468.1]),
];

/// Mean damaged line miles per ignition: winter, spring, summer, fall, annual mean.
pub const REFERENCE_DAMAGED_MILES: [(u32, [f64; 5]); 34] = [
    (1, [81.77, 81.77, 81.77, 81.77, 81.77]),
    (2, [88.47, 88.47, 98.23, 88.47, 90.91]),
    (3, [259.90, 259.90, 259.90, 259.90, 259.90]),
    (4, [19.80, 58.33, 93.97, 93.97, 66.52]),
    (5, [171.50, 171.50, 225.75, 225.75, 198.63]),
    (6, [184.20, 225.75, 225.75, 225.75, 215.36]),
    (7, [107.97, 107.97, 135.67, 107.97, 114.89]),
    (8, [79.73, 79.73, 160.67, 93.47, 103.40]),
    (9, [100.90, 161.63, 161.63, 161.63, 146.45]),
    (10, [103.40, 103.40, 194.50, 140.25, 135.39]),
    (17, [27.30, 36.80, 43.63, 43.63, 37.84]),
    (18, [39.60, 39.60, 59.23, 39.60, 44.51]),
    (19, [24.65, 24.65, 24.65, 24.65, 24.65]),
    (20, [34.03, 39.40, 52.43, 48.30, 43.54]),
    (21, [11.50, 17.70, 47.55, 24.05, 25.20]),
    (22, [26.70, 26.70, 39.07, 26.70, 29.79]),
    (23, [5.47, 8.20, 8.20, 8.20, 7.52]),
    (24, [8.63, 8.63, 19.97, 17.23, 13.62]),
    (25, [48.70, 48.70, 48.70, 48.70, 48.70]),
    (26, [64.37, 64.37, 134.63, 134.63, 99.50]),
    (27, [53.80, 119.40, 119.90, 119.40, 103.13]),
    (28, [43.85, 43.85, 142.25, 142.25, 93.05]),
    (29, [13.20, 13.20, 13.20, 13.20, 13.20]),
    (30, [13.20, 13.20, 17.50, 17.50, 15.35]),
    (31, [8.73, 13.10, 13.10, 13.10, 12.01]),
    (32, [28.40, 28.40, 34.95, 34.95, 31.68]),
    (33, [39.00, 43.37, 32.67, 32.67, 36.93]),
    (34, [37.17, 37.17, 29.63, 29.63, 33.40]),
    (35, [95.27, 95.27, 95.27, 20.70, 76.63]),
    (37, [140.53, 98.33, 97.10, 97.10, 108.27]),
    (38, [83.40, 83.40, 83.40, 83.40, 83.40]),
    (39, [69.70, 69.70, 69.70, 69.70, 69.70]),
    (40, [133.37, 123.90, 123.90, 123.90, 126.27]),
    (41, [109.57, 109.57, 100.10, 100.10, 104.83]),
];

fn rows(table: &[(u32, [f64; 5])]) -> Vec<SeasonRow> {
    table
        .iter()
        .map(|(id, v)| SeasonRow {
            line_id: *id,
            seasons: v[..4].to_vec(),
        })
        .collect()
}

pub fn reference_acre_rows() -> Vec<SeasonRow> {
    rows(&REFERENCE_BURNED_ACRES)
}

pub fn reference_mile_rows() -> Vec<SeasonRow> {
    rows(&REFERENCE_DAMAGED_MILES)
}
