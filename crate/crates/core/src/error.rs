use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({x:.3}, {y:.3}) m lies outside the raster extent")]
    OutOfBounds { x: f64, y: f64 },

    #[error("missing landscape layer {layer} (expected {})", path.display())]
    MissingLayer { layer: &'static str, path: PathBuf },

    #[error("inconsistent raster: {0}")]
    InconsistentRaster(String),

    #[error("fuel catalog: {0}")]
    Catalog(String),

    #[error("malformed weather series: {0}")]
    MalformedSeries(String),

    #[error("invalid weather sample at row {row}: {reason}")]
    InvalidSample { row: usize, reason: String },

    #[error("weather coverage: {0}")]
    Coverage(String),

    #[error("topology: {0}")]
    Topology(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("degenerate normalization: every line has zero wildfire loss")]
    DegenerateNormalization,

    #[error("parse error in {}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// True for errors caused by the caller's inputs rather than a bug in the engine.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}
