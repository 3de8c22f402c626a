//! GPS broadcast ephemerides, satellite propagation and local-frame geometry.
//!
//! The pipeline is: parse RINEX 2 navigation text into [`EphemerisRecord`]s,
//! collect them in an [`EphemerisSet`], propagate to ECEF positions and rotate
//! into the East-North-Up frame of a [`SiteLocation`]. [`TabulatedOrbits`]
//! offers the same [`OrbitSource`] interface over precomputed ECEF positions.

mod ephemeris;
mod frames;
mod rinex;
mod tabulated;
mod time;
mod visibility;

use thiserror::Error;

pub use ephemeris::{
    sat_position_ecef, solve_kepler, EphemerisRecord, EphemerisSet, KeplerSolution, DEFAULT_VALIDITY_WINDOW,
    EARTH_ROTATION_RATE, GM_EARTH, KEPLER_MAX_ITERATIONS, KEPLER_TOLERANCE,
};
pub use frames::{
    ecef_to_enu, enu_rotation, geodetic_to_ecef, EnuObservation, SiteLocation, WGS84_A, WGS84_B, WGS84_F,
};
pub use rinex::{parse_rinex_nav, NavFile, ParseDiagnostic};
pub use tabulated::TabulatedOrbits;
pub use time::{GpsTime, DEFAULT_UTC_OFFSET, SECONDS_PER_WEEK};
pub use visibility::{visible_satellites, OrbitSource, VisibleSat};

pub type Vector3 = nalgebra::Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("ephemeris for {sat_id} is {offset} s from toe, outside the {window} s validity window")]
    StaleEphemeris { sat_id: String, offset: f64, window: f64 },
    #[error(
        "Kepler iteration did not converge after {iterations} iterations (M = {mean_anomaly}, e = {eccentricity})"
    )]
    KeplerNonConvergence {
        iterations: usize,
        mean_anomaly: f64,
        eccentricity: f64,
    },
    #[error("ephemeris set is empty")]
    EmptyEphemerisSet,
    #[error("point coincides with the site")]
    ZeroRange,
    #[error("invalid site: {0}")]
    InvalidSite(String),
    #[error("invalid time: {0}")]
    InvalidTime(String),
    #[error("elevation mask must lie in [0, 90), got {0}")]
    InvalidMask(f64),
    #[error("tabulated orbit input: {0}")]
    Tabulated(String),
}
