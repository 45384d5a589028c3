use thiserror::Error;

use crate::lattice::Region;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("row {row} lies outside the gradient strip [-{half_height}, {half_height}]")]
    RowOutsideProfile { row: i64, half_height: u32 },

    #[error("region {inner:?} is not contained in {outer:?}")]
    RegionNotContained { inner: Region, outer: Region },

    #[error("invalid region bounds {0:?}")]
    InvalidRegion(Region),

    #[error("malformed annulus: inner half-width {n1} must be below outer half-width {n2}")]
    MalformedAnnulus { n1: u32, n2: u32 },

    #[error("unsupported arm count {0}: only 2 and 4 alternating arms are detected")]
    UnsupportedArmCount(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration has no seed column at i = 0")]
    MissingSeedColumn,

    #[error("front walk exceeded its step budget of {budget} edges")]
    StepBudgetExceeded { budget: usize },

    #[error("front has no edge inside the statistics window")]
    EmptyWindow,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("malformed configuration file: {0}")]
    Format(String),
}
