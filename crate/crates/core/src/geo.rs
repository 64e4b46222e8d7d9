//! Planar projection, polyline lengths and exact segment-to-cell traversal.
//!
//! Everything spatial in the engine lives in one local equirectangular frame
//! centred on the study raster. Raster rows count northward from the south
//! edge and columns eastward from the west edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
pub const METERS_PER_MILE: f64 = 1609.344;
/// Largest lat/lon offset from the projection origin we accept.
pub const MAX_PROJECTION_SPAN_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        let p = GeoPoint { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lat.is_finite() || !self.lon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate ({}, {})",
                self.lat, self.lon
            )));
        }
        if !(-90.0..=90.0).contains(&self.lat) || !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::InvalidInput(format!(
                "coordinate ({}, {}) out of range",
                self.lat, self.lon
            )));
        }
        Ok(())
    }
}

/// Meters east (`x`) and north (`y`) of a projection origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanarPoint { x, y }
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &PlanarPoint, t: f64) -> PlanarPoint {
        PlanarPoint {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub row: usize,
    pub col: usize,
}

impl GridIndex {
    pub fn new(row: usize, col: usize) -> Self {
        GridIndex { row, col }
    }
}

fn check_span(p: &GeoPoint, origin: &GeoPoint) -> Result<()> {
    p.validate()?;
    origin.validate()?;
    if (p.lat - origin.lat).abs() >= MAX_PROJECTION_SPAN_DEG
        || (p.lon - origin.lon).abs() >= MAX_PROJECTION_SPAN_DEG
    {
        return Err(Error::InvalidInput(format!(
            "({}, {}) is more than {MAX_PROJECTION_SPAN_DEG}° from the projection origin ({}, {})",
            p.lat, p.lon, origin.lat, origin.lon
        )));
    }
    Ok(())
}

/// Local equirectangular projection about `origin`.
pub fn project(p: GeoPoint, origin: GeoPoint) -> Result<PlanarPoint> {
    check_span(&p, &origin)?;
    let x = EARTH_RADIUS_M * origin.lat.to_radians().cos() * (p.lon - origin.lon).to_radians();
    let y = EARTH_RADIUS_M * (p.lat - origin.lat).to_radians();
    Ok(PlanarPoint { x, y })
}

/// Inverse of [`project`].
pub fn unproject(p: PlanarPoint, origin: GeoPoint) -> Result<GeoPoint> {
    origin.validate()?;
    if !p.x.is_finite() || !p.y.is_finite() {
        return Err(Error::InvalidInput("non-finite planar point".into()));
    }
    let lat = origin.lat + (p.y / EARTH_RADIUS_M).to_degrees();
    let lon = origin.lon + (p.x / (EARTH_RADIUS_M * origin.lat.to_radians().cos())).to_degrees();
    GeoPoint::new(lat, lon)
}

/// Length of a polyline in miles. Each segment is measured in a local
/// projection about its own midpoint, which keeps the result additive
/// under concatenation and independent of traversal direction.
pub fn polyline_length(points: &[GeoPoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("polyline has no points".into()));
    }
    let mut meters = 0.0;
    for w in points.windows(2) {
        meters += segment_length_m(&w[0], &w[1])?;
    }
    if let [only] = points {
        only.validate()?;
    }
    Ok(meters / METERS_PER_MILE)
}

fn segment_length_m(a: &GeoPoint, b: &GeoPoint) -> Result<f64> {
    let mid = GeoPoint {
        lat: (a.lat + b.lat) / 2.0,
        lon: (a.lon + b.lon) / 2.0,
    };
    check_span(a, &mid)?;
    check_span(b, &mid)?;
    let dx = EARTH_RADIUS_M * mid.lat.to_radians().cos() * (b.lon - a.lon).to_radians();
    let dy = EARTH_RADIUS_M * (b.lat - a.lat).to_radians();
    Ok(dx.hypot(dy))
}

/// Placement of a raster in geographic and planar space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub ncols: usize,
    pub nrows: usize,
    /// South-west corner of the raster.
    pub origin: GeoPoint,
    /// Cell edge length in meters.
    pub cell_size: f64,
}

impl GridGeometry {
    pub fn new(ncols: usize, nrows: usize, origin: GeoPoint, cell_size: f64) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(Error::InvalidInput(format!(
                "raster dimensions must be positive, got {ncols}x{nrows}"
            )));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        origin.validate()?;
        let g = GridGeometry {
            ncols,
            nrows,
            origin,
            cell_size,
        };
        // The whole raster must fit in the projection's validity window.
        check_span(&g.north_east(), &g.origin)?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width_m(&self) -> f64 {
        self.ncols as f64 * self.cell_size
    }

    pub fn height_m(&self) -> f64 {
        self.nrows as f64 * self.cell_size
    }

    /// Geographic center of the raster; the projection origin for the study frame.
    pub fn centroid(&self) -> GeoPoint {
        let lat = self.origin.lat + (self.height_m() / 2.0 / EARTH_RADIUS_M).to_degrees();
        let lon = self.origin.lon
            + (self.width_m() / 2.0 / (EARTH_RADIUS_M * lat.to_radians().cos())).to_degrees();
        GeoPoint { lat, lon }
    }

    fn north_east(&self) -> GeoPoint {
        let c = self.centroid();
        GeoPoint {
            lat: self.origin.lat + (self.height_m() / EARTH_RADIUS_M).to_degrees(),
            lon: self.origin.lon
                + (self.width_m() / (EARTH_RADIUS_M * c.lat.to_radians().cos())).to_degrees(),
        }
    }

    /// Planar coordinates of the raster's south-west corner in the study frame.
    pub fn south_west(&self) -> PlanarPoint {
        let c = self.centroid();
        PlanarPoint {
            x: EARTH_RADIUS_M * c.lat.to_radians().cos() * (self.origin.lon - c.lon).to_radians(),
            y: EARTH_RADIUS_M * (self.origin.lat - c.lat).to_radians(),
        }
    }

    pub fn to_planar(&self, p: GeoPoint) -> Result<PlanarPoint> {
        project(p, self.centroid())
    }

    pub fn to_geo(&self, p: PlanarPoint) -> Result<GeoPoint> {
        unproject(p, self.centroid())
    }

    /// Position in cell units: (column, row) measured from the south-west corner.
    pub fn to_cell_units(&self, p: PlanarPoint) -> (f64, f64) {
        let sw = self.south_west();
        ((p.x - sw.x) / self.cell_size, (p.y - sw.y) / self.cell_size)
    }

    pub fn from_cell_units(&self, u: f64, v: f64) -> PlanarPoint {
        let sw = self.south_west();
        PlanarPoint {
            x: sw.x + u * self.cell_size,
            y: sw.y + v * self.cell_size,
        }
    }

    pub fn cell_center(&self, idx: GridIndex) -> PlanarPoint {
        self.from_cell_units(idx.col as f64 + 0.5, idx.row as f64 + 0.5)
    }

    pub fn contains(&self, p: PlanarPoint) -> bool {
        let (u, v) = self.to_cell_units(p);
        let eps = 1e-9;
        u >= -eps && v >= -eps && u <= self.ncols as f64 + eps && v <= self.nrows as f64 + eps
    }

    /// The cell whose half-open square holds `p`; points on the north or
    /// east edge of the raster belong to the last row or column.
    pub fn cell_of(&self, p: PlanarPoint) -> Result<GridIndex> {
        if !self.contains(p) {
            return Err(Error::OutOfBounds { x: p.x, y: p.y });
        }
        let (u, v) = self.to_cell_units(p);
        let col = (u.floor().max(0.0) as usize).min(self.ncols - 1);
        let row = (v.floor().max(0.0) as usize).min(self.nrows - 1);
        Ok(GridIndex { row, col })
    }

    pub fn flat(&self, idx: GridIndex) -> usize {
        idx.row * self.ncols + idx.col
    }

    pub fn unflat(&self, i: usize) -> GridIndex {
        GridIndex {
            row: i / self.ncols,
            col: i % self.ncols,
        }
    }
}

/// Index range of unit cells whose closed interval `[k, k+1]` meets `[lo, hi]`.
fn touched_range(lo: f64, hi: f64, n: usize) -> Option<(usize, usize)> {
    // Round-off from the planar frame must not turn a grid-line touch into a miss.
    let snap = |x: f64| if (x - x.round()).abs() < 1e-9 { x.round() } else { x };
    let (lo, hi) = (snap(lo), snap(hi));
    let first = (lo.ceil() - 1.0).max(0.0);
    let last = hi.floor().min(n as f64 - 1.0);
    if last < first {
        return None;
    }
    Some((first as usize, last as usize))
}

/// Every cell whose closed square the segment `a`–`b` touches (supercover),
/// ordered from `a` towards `b`. Corner crossings include all cells that
/// share the corner.
pub fn traverse_cells(a: PlanarPoint, b: PlanarPoint, grid: &GridGeometry) -> Result<Vec<GridIndex>> {
    for p in [a, b] {
        if !p.x.is_finite() || !p.y.is_finite() || !grid.contains(p) {
            return Err(Error::OutOfBounds { x: p.x, y: p.y });
        }
    }
    let (u0, v0) = grid.to_cell_units(a);
    let (u1, v1) = grid.to_cell_units(b);
    let (umin, umax) = (u0.min(u1), u0.max(u1));
    let du = u1 - u0;
    let dv = v1 - v0;

    let Some((c_first, c_last)) = touched_range(umin, umax, grid.ncols) else {
        return Ok(Vec::new());
    };
    let cols: Box<dyn Iterator<Item = usize>> = if du < 0.0 {
        Box::new((c_first..=c_last).rev())
    } else {
        Box::new(c_first..=c_last)
    };

    let mut out = Vec::new();
    for col in cols {
        let s0 = umin.max(col as f64);
        let s1 = umax.min(col as f64 + 1.0);
        let (vlo, vhi) = if du == 0.0 {
            (v0.min(v1), v0.max(v1))
        } else {
            let va = v0 + (s0 - u0) * dv / du;
            let vb = v0 + (s1 - u0) * dv / du;
            (va.min(vb), va.max(vb))
        };
        let Some((r_first, r_last)) = touched_range(vlo, vhi, grid.nrows) else {
            continue;
        };
        if dv < 0.0 {
            out.extend((r_first..=r_last).rev().map(|row| GridIndex { row, col }));
        } else {
            out.extend((r_first..=r_last).map(|row| GridIndex { row, col }));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_grid(n: usize) -> GridGeometry {
        // ~1 m cells keeps cell units and meters close; only relative positions matter.
        GridGeometry::new(n, n, GeoPoint { lat: 37.8, lon: -120.0 }, 1.0).unwrap()
    }

    fn at(g: &GridGeometry, u: f64, v: f64) -> PlanarPoint {
        g.from_cell_units(u, v)
    }

    #[test]
    fn project_origin_is_zero() {
        let o = GeoPoint::new(37.8, -120.0).unwrap();
        let p = project(o, o).unwrap();
        assert_eq!(p, PlanarPoint::new(0.0, 0.0));
    }

    #[test]
    fn project_one_degree_north() {
        let o = GeoPoint::new(37.8, -120.0).unwrap();
        let p = project(GeoPoint::new(38.8, -120.0).unwrap(), o).unwrap();
        assert!(p.x.abs() < 1e-9);
        assert!((p.y - 111_194.9).abs() < 0.1, "{}", p.y);
    }

    #[test]
    fn project_one_degree_east() {
        let o = GeoPoint::new(37.8, -120.0).unwrap();
        let p = project(GeoPoint::new(37.8, -119.0).unwrap(), o).unwrap();
        // 111,194.93 m * cos(37.8°)
        assert!((p.x - 87_861.2).abs() < 1.0, "{}", p.x);
        assert!(p.y.abs() < 1e-9);
    }

    #[test]
    fn project_rejects_far_points() {
        let o = GeoPoint::new(37.8, -120.0).unwrap();
        assert!(project(GeoPoint { lat: 43.0, lon: -120.0 }, o).is_err());
        assert!(project(GeoPoint { lat: 95.0, lon: -120.0 }, o).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn polyline_single_point_is_zero() {
        let p = GeoPoint::new(37.8, -120.0).unwrap();
        assert_eq!(polyline_length(&[p]).unwrap(), 0.0);
        assert!(polyline_length(&[]).is_err());
    }

    #[test]
    fn polyline_one_degree_latitude() {
        let a = GeoPoint::new(37.8, -120.0).unwrap();
        let b = GeoPoint::new(38.8, -120.0).unwrap();
        let miles = polyline_length(&[a, b]).unwrap();
        assert!((miles - 69.09).abs() < 0.01, "{miles}");
    }

    #[test]
    fn traverse_single_cell() {
        let g = unit_grid(8);
        let cells = traverse_cells(at(&g, 2.2, 3.3), at(&g, 2.8, 3.6), &g).unwrap();
        assert_eq!(cells, vec![GridIndex::new(3, 2)]);
    }

    #[test]
    fn traverse_horizontal_three_columns() {
        let g = unit_grid(8);
        let cells = traverse_cells(at(&g, 1.5, 4.5), at(&g, 3.5, 4.5), &g).unwrap();
        assert_eq!(
            cells,
            vec![GridIndex::new(4, 1), GridIndex::new(4, 2), GridIndex::new(4, 3)]
        );
        let back = traverse_cells(at(&g, 3.5, 4.5), at(&g, 1.5, 4.5), &g).unwrap();
        assert_eq!(back, cells.iter().rev().copied().collect::<Vec<_>>());
    }

    #[test]
    fn traverse_diagonal_through_corner_takes_all_four() {
        let g = unit_grid(8);
        let cells = traverse_cells(at(&g, 0.5, 0.5), at(&g, 1.5, 1.5), &g).unwrap();
        let mut sorted = cells.clone();
        sorted.sort();
        assert_eq!(
            sorted,
            vec![
                GridIndex::new(0, 0),
                GridIndex::new(0, 1),
                GridIndex::new(1, 0),
                GridIndex::new(1, 1)
            ]
        );
    }

    #[test]
    fn traverse_rejects_outside_endpoint() {
        let g = unit_grid(4);
        let err = traverse_cells(at(&g, 0.5, 0.5), at(&g, 5.0, 0.5), &g).unwrap_err();
        assert!(matches!(err, Error::OutOfBounds { .. }));
    }

    #[test]
    fn geometry_rejects_zero_cell() {
        assert!(GridGeometry::new(4, 4, GeoPoint { lat: 37.8, lon: -120.0 }, 0.0).is_err());
        assert!(GridGeometry::new(0, 4, GeoPoint { lat: 37.8, lon: -120.0 }, 30.0).is_err());
    }

    proptest! {
        #[test]
        fn project_roundtrip(lat in -80.0f64..80.0, lon in -175.0f64..175.0,
                             dlat in -4.99f64..4.99, dlon in -4.99f64..4.99) {
            let origin = GeoPoint { lat, lon };
            let p = GeoPoint { lat: (lat + dlat).clamp(-90.0, 90.0), lon: (lon + dlon).clamp(-180.0, 180.0) };
            let back = unproject(project(p, origin).unwrap(), origin).unwrap();
            prop_assert!((back.lat - p.lat).abs() < 1e-9);
            prop_assert!((back.lon - p.lon).abs() < 1e-9);
        }

        #[test]
        fn polyline_reversal_and_concatenation(
            pts in proptest::collection::vec((37.0f64..38.0, -120.5f64..-119.5), 2..8),
            split in 0usize..8,
        ) {
            let pts: Vec<GeoPoint> = pts.into_iter().map(|(lat, lon)| GeoPoint { lat, lon }).collect();
            let fwd = polyline_length(&pts).unwrap();
            let mut rev = pts.clone();
            rev.reverse();
            prop_assert!((fwd - polyline_length(&rev).unwrap()).abs() < 1e-9 * fwd.max(1.0));
            let k = split % pts.len();
            let joined = polyline_length(&pts[..=k]).unwrap() + polyline_length(&pts[k..]).unwrap();
            prop_assert!((fwd - joined).abs() < 1e-9 * fwd.max(1.0));
        }

        #[test]
        fn traverse_is_eight_connected(u0 in 0.0f64..16.0, v0 in 0.0f64..16.0,
                                       u1 in 0.0f64..16.0, v1 in 0.0f64..16.0) {
            let g = unit_grid(16);
            let cells = traverse_cells(at(&g, u0, v0), at(&g, u1, v1), &g).unwrap();
            prop_assert!(!cells.is_empty());
            for w in cells.windows(2) {
                let dr = w[0].row.abs_diff(w[1].row);
                let dc = w[0].col.abs_diff(w[1].col);
                prop_assert!(dr <= 1 && dc <= 1, "{:?} -> {:?}", w[0], w[1]);
            }
        }
    }
}
