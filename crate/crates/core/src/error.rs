//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: x [{x_min}, {x_max}], y [{y_min}, {y_max}] (bounds must be finite with x_max > x_min and y_max > y_min)")]
    InvalidRegion {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Triangulation input with fewer than 3 distinct sites, or all sites
    /// collinear.
    #[error("degenerate sites: {reason} ({count} distinct site(s))")]
    DegenerateSites { count: usize, reason: &'static str },

    /// A scenario draw produced too few sensors to triangulate. Reported,
    /// not fatal, in ensemble runs.
    #[error("degenerate scenario for seed {seed}: {sensors} sensor(s) drawn, at least 3 non-collinear required")]
    DegenerateScenario { seed: u64, sensors: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("grid mismatch: {expected_nx}x{expected_ny} over {expected_region} vs {got_nx}x{got_ny} over {got_region}")]
    GridMismatch {
        expected_nx: usize,
        expected_ny: usize,
        expected_region: String,
        got_nx: usize,
        got_ny: usize,
        got_region: String,
    },

    #[error("input too short: segment length {segment} requires at least {segment} samples, got {got}")]
    InputTooShort { segment: usize, got: usize },

    #[error("non-finite IQ sample at index {0}")]
    NonFiniteSample(usize),

    #[error("band [{f_lo_hz}, {f_hi_hz}] Hz does not overlap the PSD span [{span_lo_hz}, {span_hi_hz}] Hz")]
    EmptyBand {
        f_lo_hz: f64,
        f_hi_hz: f64,
        span_lo_hz: f64,
        span_hi_hz: f64,
    },

    #[error("record line {line}: {source}")]
    RecordParse {
        line: usize,
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
