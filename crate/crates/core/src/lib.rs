//! Upper bounds on bias errors in satellite navigation.
//!
//! Two families of bounds live here:
//!
//! - [`signal_model`]: the worst-case maximum-likelihood delay bias produced by
//!   an interference signal of bounded power, expressed through the delay
//!   magnification coefficient `M_tau`.
//! - [`track_geometry`]: bounds on along-track and cross-track position error of
//!   a receiver constrained to a known track, anchored on the receiver clock
//!   bias through the magnification coefficients `M_u`, `M_v` and `M_s`.
//!
//! [`orbits`] turns GPS broadcast ephemerides into local satellite directions
//! and [`scan`] sweeps a day of epochs to produce the `M_s` time series and its
//! relative-frequency histogram.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod orbits;
pub mod scan;
pub mod signal_model;
pub mod track_geometry;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
