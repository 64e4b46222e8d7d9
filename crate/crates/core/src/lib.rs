//! Grid-ignited wildfire risk for transmission networks: landscape and
//! weather inputs, minimum-travel-time fire spread, scenario batches and
//! line risk metrics.

pub mod ascii_grid;
pub mod error;
pub mod fire;
pub mod fixtures;
pub mod geo;
pub mod landscape;
pub mod network;
pub mod report;
pub mod risk;
pub mod scenario;
pub mod weather;

pub use ascii_grid::{AsciiGrid, AsciiHeader};
pub use error::{Error, Result};
pub use fire::{simulate_spread, BurnRaster, IgnitionSpec, Neighborhood, SpreadParams, SpreadWarning};
pub use geo::{polyline_length, project, traverse_cells, unproject, GeoPoint, GridGeometry, GridIndex, PlanarPoint};
pub use landscape::{load_landscape, synth_landscape, FuelCatalog, FuelModel, LandscapeRaster, SynthSpec};
pub use network::{line_cells, load_network, Branch, BranchInput, BranchKind, Bus, GridNetwork, LineCorridors};
pub use report::{RunMetadata, StudyReport};
pub use risk::{assess_results, assess_tables, CostParams, LineRisk, SeasonRow};
pub use scenario::{
    build_matrix, place_ignitions, run_batch, BatchOutput, Placement, ScenarioResult, ScenarioWarning, StudyConfig,
    StudyInputs,
};
pub use weather::{load_weather, Season, WeatherSample, WeatherSeries};
