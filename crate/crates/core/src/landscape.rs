//! The eight-layer landscape raster, the fuel catalog, and fixture synthesis.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ascii_grid::{AsciiGrid, AsciiHeader, DEFAULT_NODATA};
use crate::error::{Error, Result};
use crate::geo::{GeoPoint, GridGeometry, GridIndex};

pub const ACRES_PER_SQUARE_METER: f64 = 0.000_247_105_381;
pub const DEFAULT_CELL_SIZE_M: f64 = 30.0;

/// Layer file stems, in load order.
pub const LAYER_FILES: [&str; 8] = [
    "elevation",
    "slope",
    "aspect",
    "fuel",
    "canopy_cover",
    "canopy_height",
    "canopy_base",
    "canopy_density",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuelModel {
    pub id: u32,
    pub name: String,
    pub burnable: bool,
    /// Spread rate in m/min at zero wind, zero slope and reference humidity.
    pub base_ros: f64,
    pub wind_coeff: f64,
    pub wind_exp: f64,
    pub moisture_exp: f64,
}

impl FuelModel {
    fn validate(&self) -> Result<()> {
        let finite = [self.base_ros, self.wind_coeff, self.wind_exp, self.moisture_exp]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0);
        if !finite {
            return Err(Error::Catalog(format!(
                "fuel {} has a negative or non-finite coefficient",
                self.id
            )));
        }
        if self.burnable != (self.base_ros > 0.0) {
            return Err(Error::Catalog(format!(
                "fuel {}: base_ros must be positive exactly when the fuel is burnable",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuelCatalog {
    models: BTreeMap<u32, FuelModel>,
    non_burnable_id: u32,
}

#[derive(Debug, Deserialize, Serialize)]
struct CatalogRow {
    id: u32,
    name: String,
    burnable: String,
    base_ros_m_min: f64,
    wind_coeff: f64,
    wind_exp: f64,
    moisture_exp: f64,
}

impl FuelCatalog {
    /// Builds a catalog; the designated non-burnable id is the lowest
    /// non-burnable entry.
    pub fn new(models: impl IntoIterator<Item = FuelModel>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for m in models {
            m.validate()?;
            let id = m.id;
            if map.insert(id, m).is_some() {
                return Err(Error::Catalog(format!("duplicate fuel id {id}")));
            }
        }
        let non_burnable_id = map
            .values()
            .find(|m| !m.burnable)
            .map(|m| m.id)
            .ok_or_else(|| Error::Catalog("catalog has no non-burnable entry".into()))?;
        Ok(FuelCatalog {
            models: map,
            non_burnable_id,
        })
    }

    pub fn get(&self, id: u32) -> Option<&FuelModel> {
        self.models.get(&id)
    }

    pub fn non_burnable_id(&self) -> u32 {
        self.non_burnable_id
    }

    pub fn models(&self) -> impl Iterator<Item = &FuelModel> {
        self.models.values()
    }

    pub fn burnable_ids(&self) -> Vec<u32> {
        self.models.values().filter(|m| m.burnable).map(|m| m.id).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
        let mut models = Vec::new();
        for (i, rec) in rdr.deserialize::<CatalogRow>().enumerate() {
            let row = rec.map_err(|e| Error::parse(path, format!("row {}: {e}", i + 1)))?;
            let burnable = match row.burnable.trim().to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                other => {
                    return Err(Error::parse(
                        path,
                        format!("row {}: burnable must be true/false, got `{other}`", i + 1),
                    ))
                }
            };
            models.push(FuelModel {
                id: row.id,
                name: row.name,
                burnable,
                base_ros: row.base_ros_m_min,
                wind_coeff: row.wind_coeff,
                wind_exp: row.wind_exp,
                moisture_exp: row.moisture_exp,
            });
        }
        Self::new(models)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
        for m in self.models.values() {
            w.serialize(CatalogRow {
                id: m.id,
                name: m.name.clone(),
                burnable: m.burnable.to_string(),
                base_ros_m_min: m.base_ros,
                wind_coeff: m.wind_coeff,
                wind_exp: m.wind_exp,
                moisture_exp: m.moisture_exp,
            })
            .map_err(|e| Error::parse(path, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

impl Default for FuelCatalog {
    /// Engine defaults; not calibrated against any observed fire.
    fn default() -> Self {
        let fuel = |id, name: &str, base_ros, wind_coeff, moisture_exp| FuelModel {
            id,
            name: name.to_string(),
            burnable: base_ros > 0.0,
            base_ros,
            wind_coeff,
            wind_exp: 1.0,
            moisture_exp,
        };
        FuelCatalog::new([
            fuel(0, "non-burnable", 0.0, 0.0, 0.0),
            fuel(1, "grass", 15.0, 0.4, 1.0),
            fuel(2, "shrub", 8.0, 0.3, 0.8),
            fuel(3, "timber litter", 2.0, 0.15, 0.6),
        ])
        .expect("default catalog is valid")
    }
}

pub const FUEL_NON_BURNABLE: u32 = 0;
pub const FUEL_GRASS: u32 = 1;
pub const FUEL_SHRUB: u32 = 2;
pub const FUEL_TIMBER: u32 = 3;

/// Georeferenced landscape with the eight standard layers, south row first.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeRaster {
    geometry: GridGeometry,
    pub elevation: Vec<f64>,
    /// Degrees, `[0, 90)`.
    pub slope: Vec<f64>,
    /// Downslope-facing compass bearing in degrees, `[0, 360)`.
    pub aspect: Vec<f64>,
    pub fuel: Vec<u32>,
    /// Percent.
    pub canopy_cover: Vec<f64>,
    pub canopy_height: Vec<f64>,
    pub canopy_base_height: Vec<f64>,
    /// kg/m³.
    pub canopy_bulk_density: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
impl LandscapeRaster {
    pub fn new(
        geometry: GridGeometry,
        elevation: Vec<f64>,
        slope: Vec<f64>,
        aspect: Vec<f64>,
        fuel: Vec<u32>,
        canopy_cover: Vec<f64>,
        canopy_height: Vec<f64>,
        canopy_base_height: Vec<f64>,
        canopy_bulk_density: Vec<f64>,
        catalog: &FuelCatalog,
    ) -> Result<Self> {
        let r = LandscapeRaster {
            geometry,
            elevation,
            slope,
            aspect,
            fuel,
            canopy_cover,
            canopy_height,
            canopy_base_height,
            canopy_bulk_density,
        };
        r.validate(catalog)?;
        Ok(r)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn ncols(&self) -> usize {
        self.geometry.ncols
    }

    pub fn nrows(&self) -> usize {
        self.geometry.nrows
    }

    pub fn cell_size(&self) -> f64 {
        self.geometry.cell_size
    }

    pub fn fuel_at(&self, idx: GridIndex) -> u32 {
        self.fuel[self.geometry.flat(idx)]
    }

    /// Acres per cell (α).
    pub fn cell_acreage(&self) -> f64 {
        cell_acreage(self.geometry.cell_size)
    }

    fn validate(&self, catalog: &FuelCatalog) -> Result<()> {
        let n = self.geometry.len();
        let lens = [
            ("elevation", self.elevation.len()),
            ("slope", self.slope.len()),
            ("aspect", self.aspect.len()),
            ("fuel", self.fuel.len()),
            ("canopy_cover", self.canopy_cover.len()),
            ("canopy_height", self.canopy_height.len()),
            ("canopy_base", self.canopy_base_height.len()),
            ("canopy_density", self.canopy_bulk_density.len()),
        ];
        for (name, len) in lens {
            if len != n {
                return Err(Error::InconsistentRaster(format!(
                    "layer {name} has {len} cells, expected {n}"
                )));
            }
        }
        let check = |name: &str, vals: &[f64], ok: &dyn Fn(f64) -> bool| -> Result<()> {
            if let Some(i) = vals.iter().position(|v| !v.is_finite() || !ok(*v)) {
                let idx = self.geometry.unflat(i);
                return Err(Error::InvalidInput(format!(
                    "layer {name}: value {} at row {}, col {} is out of range",
                    vals[i], idx.row, idx.col
                )));
            }
            Ok(())
        };
        check("elevation", &self.elevation, &|_| true)?;
        check("slope", &self.slope, &|v| (0.0..90.0).contains(&v))?;
        check("aspect", &self.aspect, &|v| (0.0..360.0).contains(&v))?;
        check("canopy_cover", &self.canopy_cover, &|v| (0.0..=100.0).contains(&v))?;
        check("canopy_height", &self.canopy_height, &|v| v >= 0.0)?;
        check("canopy_base", &self.canopy_base_height, &|v| v >= 0.0)?;
        check("canopy_density", &self.canopy_bulk_density, &|v| v >= 0.0)?;
        for &id in &self.fuel {
            if catalog.get(id).is_none() {
                return Err(Error::Catalog(format!("fuel id {id} is not in the catalog")));
            }
        }
        Ok(())
    }

    fn layer_values(&self, stem: &str) -> Vec<f64> {
        match stem {
            "elevation" => self.elevation.clone(),
            "slope" => self.slope.clone(),
            "aspect" => self.aspect.clone(),
            "fuel" => self.fuel.iter().map(|&f| f as f64).collect(),
            "canopy_cover" => self.canopy_cover.clone(),
            "canopy_height" => self.canopy_height.clone(),
            "canopy_base" => self.canopy_base_height.clone(),
            "canopy_density" => self.canopy_bulk_density.clone(),
            _ => unreachable!("unknown layer {stem}"),
        }
    }

    pub fn header(&self) -> AsciiHeader {
        AsciiHeader {
            ncols: self.geometry.ncols,
            nrows: self.geometry.nrows,
            xllcorner: self.geometry.origin.lon,
            yllcorner: self.geometry.origin.lat,
            cellsize: self.geometry.cell_size,
            nodata: DEFAULT_NODATA,
        }
    }

    /// Writes one `.asc` file per layer into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for stem in LAYER_FILES {
            AsciiGrid {
                header: self.header(),
                values: self.layer_values(stem),
            }
            .write(&dir.join(format!("{stem}.asc")))?;
        }
        Ok(())
    }
}

pub fn cell_acreage(cell_size_m: f64) -> f64 {
    cell_size_m * cell_size_m * ACRES_PER_SQUARE_METER
}

/// Loads the eight layer files from `dir`. Cells that are NODATA in any
/// layer become non-burnable with zeroed canopy and terrain.
pub fn load_landscape(dir: &Path, catalog: &FuelCatalog) -> Result<LandscapeRaster> {
    let mut grids = Vec::with_capacity(LAYER_FILES.len());
    for stem in LAYER_FILES {
        let path = dir.join(format!("{stem}.asc"));
        if !path.is_file() {
            return Err(Error::MissingLayer { layer: stem, path });
        }
        grids.push(AsciiGrid::read(&path)?);
    }
    let base = grids[0].header.clone();
    for (stem, g) in LAYER_FILES.iter().zip(&grids).skip(1) {
        let h = &g.header;
        let same = h.ncols == base.ncols
            && h.nrows == base.nrows
            && h.xllcorner == base.xllcorner
            && h.yllcorner == base.yllcorner
            && h.cellsize == base.cellsize;
        if !same {
            return Err(Error::InconsistentRaster(format!(
                "{stem}.asc header ({}x{}, ll {}/{}, cellsize {}) differs from elevation.asc ({}x{}, ll {}/{}, cellsize {})",
                h.ncols, h.nrows, h.xllcorner, h.yllcorner, h.cellsize,
                base.ncols, base.nrows, base.xllcorner, base.yllcorner, base.cellsize
            )));
        }
    }
    let geometry = GridGeometry::new(
        base.ncols,
        base.nrows,
        GeoPoint::new(base.yllcorner, base.xllcorner)?,
        base.cellsize,
    )?;

    let n = geometry.len();
    let nodata: Vec<bool> = (0..n)
        .map(|i| grids.iter().any(|g| g.is_nodata(g.values[i])))
        .collect();
    let mut layers: Vec<Vec<f64>> = grids
        .into_iter()
        .map(|g| {
            g.values
                .into_iter()
                .zip(&nodata)
                .map(|(v, &nd)| if nd { 0.0 } else { v })
                .collect()
        })
        .collect();

    let nb = catalog.non_burnable_id();
    let fuel = layers[3]
        .iter()
        .zip(&nodata)
        .enumerate()
        .map(|(i, (&v, &nd))| {
            if nd {
                return Ok(nb);
            }
            if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                let idx = geometry.unflat(i);
                return Err(Error::Catalog(format!(
                    "fuel value {v} at row {}, col {} is not a fuel id",
                    idx.row, idx.col
                )));
            }
            Ok(v as u32)
        })
        .collect::<Result<Vec<u32>>>()?;

    let canopy_density = layers.pop().unwrap();
    let canopy_base = layers.pop().unwrap();
    let canopy_height = layers.pop().unwrap();
    let canopy_cover = layers.pop().unwrap();
    let _fuel_raw = layers.pop();
    let aspect = layers.pop().unwrap();
    let slope = layers.pop().unwrap();
    let elevation = layers.pop().unwrap();

    LandscapeRaster::new(
        geometry,
        elevation,
        slope,
        aspect,
        fuel,
        canopy_cover,
        canopy_height,
        canopy_base,
        canopy_density,
        catalog,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElevationSpec {
    Flat {
        elevation: f64,
    },
    /// Elevation rises linearly by the given meters per meter east and north.
    Plane {
        base: f64,
        rise_east: f64,
        rise_north: f64,
    },
    /// Eastward-rising foothills with seeded ridges and hollows.
    Foothills {
        base: f64,
        relief: f64,
        bumps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FuelSpec {
    Uniform {
        fuel: u32,
    },
    /// Seeded patch mosaic; each patch takes a fuel id drawn by weight.
    Mosaic {
        weights: Vec<(u32, f64)>,
        patch_cells: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanopySpec {
    pub cover: f64,
    pub height: f64,
    pub base_height: f64,
    pub bulk_density: f64,
}

impl Default for CanopySpec {
    fn default() -> Self {
        CanopySpec {
            cover: 0.0,
            height: 0.0,
            base_height: 0.0,
            bulk_density: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub ncols: usize,
    pub nrows: usize,
    pub cell_size: f64,
    pub origin: GeoPoint,
    pub elevation: ElevationSpec,
    pub fuel: FuelSpec,
    #[serde(default)]
    pub canopy: CanopySpec,
    pub seed: u64,
}

impl SynthSpec {
    /// Flat, windless-test-friendly landscape of a single fuel.
    pub fn uniform(ncols: usize, nrows: usize, cell_size: f64, fuel: u32) -> Self {
        SynthSpec {
            ncols,
            nrows,
            cell_size,
            origin: GeoPoint {
                lat: 37.8,
                lon: -120.2,
            },
            elevation: ElevationSpec::Flat { elevation: 500.0 },
            fuel: FuelSpec::Uniform { fuel },
            canopy: CanopySpec::default(),
            seed: 0,
        }
    }

    /// Foothill landscape used by the bundled study fixture.
    pub fn foothills(ncols: usize, nrows: usize, cell_size: f64, seed: u64) -> Self {
        SynthSpec {
            ncols,
            nrows,
            cell_size,
            origin: GeoPoint {
                lat: 37.80,
                lon: -120.20,
            },
            elevation: ElevationSpec::Foothills {
                base: 450.0,
                relief: 0.08 * ncols.max(nrows) as f64 * cell_size,
                bumps: 12,
            },
            fuel: FuelSpec::Mosaic {
                weights: vec![
                    (FUEL_GRASS, 0.35),
                    (FUEL_SHRUB, 0.30),
                    (FUEL_TIMBER, 0.25),
                    (FUEL_NON_BURNABLE, 0.10),
                ],
                patch_cells: 60,
            },
            canopy: CanopySpec {
                cover: 35.0,
                height: 18.0,
                base_height: 3.0,
                bulk_density: 0.12,
            },
            seed,
        }
    }
}

/// Deterministic synthetic landscape. Slope and aspect are derived from
/// the elevation surface by finite differences.
pub fn synth_landscape(spec: &SynthSpec, catalog: &FuelCatalog) -> Result<LandscapeRaster> {
    let geometry = GridGeometry::new(spec.ncols, spec.nrows, spec.origin, spec.cell_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (nc, nr, cs) = (spec.ncols, spec.nrows, spec.cell_size);
    let center = |i: usize| ((i % nc) as f64 + 0.5, (i / nc) as f64 + 0.5);

    let elevation: Vec<f64> = match &spec.elevation {
        ElevationSpec::Flat { elevation } => vec![*elevation; nc * nr],
        ElevationSpec::Plane {
            base,
            rise_east,
            rise_north,
        } => (0..nc * nr)
            .map(|i| {
                let (u, v) = center(i);
                base + rise_east * u * cs + rise_north * v * cs
            })
            .collect(),
        ElevationSpec::Foothills {
            base,
            relief,
            bumps,
        } => {
            let hills: Vec<(f64, f64, f64, f64)> = (0..*bumps)
                .map(|_| {
                    (
                        rng.random_range(0.0..nc as f64),
                        rng.random_range(0.0..nr as f64),
                        rng.random_range(0.05..0.2) * nc.max(nr) as f64,
                        rng.random_range(-0.35..0.35) * relief,
                    )
                })
                .collect();
            (0..nc * nr)
                .map(|i| {
                    let (u, v) = center(i);
                    let tilt = relief * u / nc as f64;
                    let bump: f64 = hills
                        .iter()
                        .map(|&(hu, hv, w, h)| {
                            let d2 = (u - hu).powi(2) + (v - hv).powi(2);
                            h * (-d2 / (2.0 * w * w)).exp()
                        })
                        .sum();
                    base + tilt + bump
                })
                .collect()
        }
    };

    let (slope, aspect) = slope_aspect(&elevation, nc, nr, cs);

    let fuel: Vec<u32> = match &spec.fuel {
        FuelSpec::Uniform { fuel } => vec![*fuel; nc * nr],
        FuelSpec::Mosaic {
            weights,
            patch_cells,
        } => {
            let total: f64 = weights.iter().map(|w| w.1).sum();
            if weights.is_empty() || !(total.is_finite() && total > 0.0) || weights.iter().any(|w| w.1 < 0.0) {
                return Err(Error::InvalidInput("fuel mosaic weights must be non-negative with a positive sum".into()));
            }
            let patches = ((nc * nr) / (*patch_cells).max(1)).max(1);
            let seeds: Vec<(f64, f64, u32)> = (0..patches)
                .map(|_| {
                    let u = rng.random_range(0.0..nc as f64);
                    let v = rng.random_range(0.0..nr as f64);
                    let mut pick = rng.random_range(0.0..total);
                    let mut id = weights[weights.len() - 1].0;
                    for &(fid, w) in weights {
                        if pick < w {
                            id = fid;
                            break;
                        }
                        pick -= w;
                    }
                    (u, v, id)
                })
                .collect();
            (0..nc * nr)
                .map(|i| {
                    let (u, v) = center(i);
                    seeds
                        .iter()
                        .min_by(|a, b| {
                            let da = (a.0 - u).powi(2) + (a.1 - v).powi(2);
                            let db = (b.0 - u).powi(2) + (b.1 - v).powi(2);
                            da.total_cmp(&db)
                        })
                        .map(|s| s.2)
                        .unwrap()
                })
                .collect()
        }
    };

    let nb = catalog.non_burnable_id();
    let canopy = |value: f64| -> Vec<f64> {
        fuel.iter()
            .map(|&f| if f == nb { 0.0 } else { value })
            .collect()
    };
    let c = &spec.canopy;
    LandscapeRaster::new(
        geometry,
        elevation,
        slope,
        aspect,
        fuel.clone(),
        canopy(c.cover),
        canopy(c.height),
        canopy(c.base_height),
        canopy(c.bulk_density),
        catalog,
    )
}

/// Slope (degrees) and downslope aspect (compass degrees) by central
/// differences, one-sided at the raster edges.
fn slope_aspect(elev: &[f64], nc: usize, nr: usize, cs: f64) -> (Vec<f64>, Vec<f64>) {
    let at = |r: usize, c: usize| elev[r * nc + c];
    let mut slope = vec![0.0; nc * nr];
    let mut aspect = vec![0.0; nc * nr];
    for r in 0..nr {
        for c in 0..nc {
            let (cw, ce) = (c.saturating_sub(1), (c + 1).min(nc - 1));
            let (rs, rn) = (r.saturating_sub(1), (r + 1).min(nr - 1));
            let dzdx = if ce > cw {
                (at(r, ce) - at(r, cw)) / ((ce - cw) as f64 * cs)
            } else {
                0.0
            };
            let dzdy = if rn > rs {
                (at(rn, c) - at(rs, c)) / ((rn - rs) as f64 * cs)
            } else {
                0.0
            };
            let grad = dzdx.hypot(dzdy);
            let i = r * nc + c;
            slope[i] = grad.atan().to_degrees().min(89.9);
            if grad > 0.0 {
                aspect[i] = (-dzdx).atan2(-dzdy).to_degrees().rem_euclid(360.0);
                if aspect[i] >= 360.0 {
                    aspect[i] = 0.0;
                }
            }
        }
    }
    (slope, aspect)
}
