//! Transmission network topology with geographic line routes.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{polyline_length, traverse_cells, GeoPoint, GridGeometry, GridIndex};

/// Route endpoints must sit on their buses within this many degrees.
pub const ENDPOINT_TOLERANCE_DEG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bus {
    pub id: u32,
    pub location: GeoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    /// Overhead line with a geographic route; can ignite and burn.
    Line,
    /// Transformer or other branch without a spatial footprint.
    Link,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: u32,
    pub kind: BranchKind,
    pub from_bus: u32,
    pub to_bus: u32,
    pub route: Vec<GeoPoint>,
    /// Route length in miles; zero for links.
    pub length: f64,
}

impl Branch {
    pub fn is_line(&self) -> bool {
        self.kind == BranchKind::Line
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridNetwork {
    buses: Vec<Bus>,
    branches: Vec<Branch>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BusJson {
    id: u32,
    lat: f64,
    lon: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BranchJson {
    id: u32,
    kind: BranchKind,
    from: u32,
    to: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    route: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkJson {
    buses: Vec<BusJson>,
    branches: Vec<BranchJson>,
}

/// Branch description before validation; `route` is ignored for links.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchInput {
    pub id: u32,
    pub kind: BranchKind,
    pub from_bus: u32,
    pub to_bus: u32,
    pub route: Vec<GeoPoint>,
}

impl GridNetwork {
    pub fn new(buses: Vec<Bus>, branches: Vec<BranchInput>) -> Result<Self> {
        let mut bus_map = BTreeMap::new();
        for b in &buses {
            b.location.validate()?;
            if bus_map.insert(b.id, b.location).is_some() {
                return Err(Error::Topology(format!("duplicate bus id {}", b.id)));
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(branches.len());
        for b in branches {
            if !seen.insert(b.id) {
                return Err(Error::Topology(format!("duplicate branch id {}", b.id)));
            }
            let mut ends = [GeoPoint { lat: 0.0, lon: 0.0 }; 2];
            for (k, bus) in [b.from_bus, b.to_bus].into_iter().enumerate() {
                ends[k] = *bus_map.get(&bus).ok_or_else(|| {
                    Error::Topology(format!("branch {} references missing bus {bus}", b.id))
                })?;
            }
            let (route, length) = match b.kind {
                BranchKind::Link => (Vec::new(), 0.0),
                BranchKind::Line => {
                    if b.route.len() < 2 {
                        return Err(Error::Geometry(format!(
                            "line {} needs at least 2 route points, has {}",
                            b.id,
                            b.route.len()
                        )));
                    }
                    let close = |p: &GeoPoint, q: &GeoPoint| {
                        (p.lat - q.lat).abs() <= ENDPOINT_TOLERANCE_DEG
                            && (p.lon - q.lon).abs() <= ENDPOINT_TOLERANCE_DEG
                    };
                    if !close(&b.route[0], &ends[0]) || !close(b.route.last().unwrap(), &ends[1]) {
                        return Err(Error::Geometry(format!(
                            "line {} route does not start at bus {} and end at bus {}",
                            b.id, b.from_bus, b.to_bus
                        )));
                    }
                    let length = polyline_length(&b.route)?;
                    if length.is_nan() || length <= 0.0 {
                        return Err(Error::Geometry(format!("line {} has zero length", b.id)));
                    }
                    (b.route, length)
                }
            };
            out.push(Branch {
                id: b.id,
                kind: b.kind,
                from_bus: b.from_bus,
                to_bus: b.to_bus,
                route,
                length,
            });
        }
        let mut buses = buses;
        buses.sort_by_key(|b| b.id);
        out.sort_by_key(|b| b.id);
        Ok(GridNetwork {
            buses,
            branches: out,
        })
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, id: u32) -> Option<&Branch> {
        self.branches
            .binary_search_by_key(&id, |b| b.id)
            .ok()
            .map(|i| &self.branches[i])
    }

    /// Line length X_j in miles.
    pub fn line_length(&self, id: u32) -> Result<f64> {
        match self.branch(id) {
            Some(b) if b.is_line() => Ok(b.length),
            Some(_) => Err(Error::Topology(format!("branch {id} is a link, not a line"))),
            None => Err(Error::Topology(format!("unknown line id {id}"))),
        }
    }

    /// All lines (not links) in ascending id order.
    pub fn ignitable_lines(&self) -> Vec<&Branch> {
        self.branches.iter().filter(|b| b.is_line()).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::parse(path, msg),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: NetworkJson =
            serde_json::from_str(text).map_err(|e| Error::parse("<network>", e.to_string()))?;
        let buses = raw
            .buses
            .into_iter()
            .map(|b| {
                Ok(Bus {
                    id: b.id,
                    location: GeoPoint::new(b.lat, b.lon)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let branches = raw
            .branches
            .into_iter()
            .map(|b| BranchInput {
                id: b.id,
                kind: b.kind,
                from_bus: b.from,
                to_bus: b.to,
                route: b
                    .route
                    .into_iter()
                    .map(|[lat, lon]| GeoPoint { lat, lon })
                    .collect(),
            })
            .collect();
        GridNetwork::new(buses, branches)
    }

    pub fn to_json(&self) -> String {
        let raw = NetworkJson {
            buses: self
                .buses
                .iter()
                .map(|b| BusJson {
                    id: b.id,
                    lat: b.location.lat,
                    lon: b.location.lon,
                })
                .collect(),
            branches: self
                .branches
                .iter()
                .map(|b| BranchJson {
                    id: b.id,
                    kind: b.kind,
                    from: b.from_bus,
                    to: b.to_bus,
                    route: b.route.iter().map(|p| [p.lat, p.lon]).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("network serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

pub fn load_network(path: &Path) -> Result<GridNetwork> {
    GridNetwork::load(path)
}

/// Raster cells touched by a line's route, in route order without repeats.
pub fn line_cells(line: &Branch, grid: &GridGeometry) -> Result<Vec<GridIndex>> {
    if !line.is_line() {
        return Err(Error::Geometry(format!("branch {} is a link and has no corridor", line.id)));
    }
    let pts = line
        .route
        .iter()
        .map(|p| grid.to_planar(*p))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        for c in traverse_cells(w[0], w[1], grid)? {
            if seen.insert(c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Rasterized corridors of every ignitable line, in line id order.
#[derive(Debug, Clone, PartialEq)]
pub struct LineCorridors {
    corridors: Vec<(u32, Vec<GridIndex>)>,
}

impl LineCorridors {
    pub fn build(network: &GridNetwork, grid: &GridGeometry) -> Result<Self> {
        let corridors = network
            .ignitable_lines()
            .into_iter()
            .map(|b| Ok((b.id, line_cells(b, grid)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LineCorridors { corridors })
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &[GridIndex])> {
        self.corridors.iter().map(|(id, c)| (*id, c.as_slice()))
    }

    pub fn get(&self, line_id: u32) -> Option<&[GridIndex]> {
        self.corridors
            .iter()
            .find(|(id, _)| *id == line_id)
            .map(|(_, c)| c.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus(route: Vec<GeoPoint>) -> Result<GridNetwork> {
        GridNetwork::new(
            vec![
                Bus {
                    id: 1,
                    location: GeoPoint { lat: 37.80, lon: -120.00 },
                },
                Bus {
                    id: 2,
                    location: GeoPoint { lat: 37.81, lon: -120.00 },
                },
            ],
            vec![BranchInput {
                id: 1,
                kind: BranchKind::Line,
                from_bus: 1,
                to_bus: 2,
                route,
            }],
        )
    }

    #[test]
    fn minimal_network_length() {
        let a = GeoPoint { lat: 37.80, lon: -120.00 };
        let b = GeoPoint { lat: 37.81, lon: -120.00 };
        let n = two_bus(vec![a, b]).unwrap();
        let expected = polyline_length(&[a, b]).unwrap();
        assert_eq!(n.line_length(1).unwrap(), expected);
        // 0.01° of latitude
        assert!((expected - 0.6909).abs() < 1e-3);
        assert_eq!(n.ignitable_lines().len(), 1);
    }

    #[test]
    fn dangling_bus_is_topology_error() {
        let err = GridNetwork::new(
            vec![Bus {
                id: 1,
                location: GeoPoint { lat: 37.8, lon: -120.0 },
            }],
            vec![BranchInput {
                id: 7,
                kind: BranchKind::Link,
                from_bus: 1,
                to_bus: 99,
                route: vec![],
            }],
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Topology(_)));
        assert!(msg.contains("branch 7") && msg.contains("99"), "{msg}");
    }

    #[test]
    fn short_route_is_geometry_error() {
        let err = two_bus(vec![GeoPoint { lat: 37.80, lon: -120.00 }]).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn links_only_have_no_ignitable_lines() {
        let n = GridNetwork::from_json(
            r#"{"buses":[{"id":1,"lat":37.8,"lon":-120.0},{"id":2,"lat":37.8,"lon":-120.0}],
                "branches":[{"id":1,"kind":"link","from":1,"to":2}]}"#,
        )
        .unwrap();
        assert!(n.ignitable_lines().is_empty());
    }

    #[test]
    fn json_roundtrip() {
        let a = GeoPoint { lat: 37.80, lon: -120.00 };
        let m = GeoPoint { lat: 37.8051234567, lon: -120.0031 };
        let b = GeoPoint { lat: 37.81, lon: -120.00 };
        let n = two_bus(vec![a, m, b]).unwrap();
        assert_eq!(GridNetwork::from_json(&n.to_json()).unwrap(), n);
    }
}
