//! Track-constrained positioning and clock-bias-anchored error bounds.
//!
//! A receiver confined to a track is described in the Frenet frame of the
//! track: tangent `U`, normal `V` toward the osculating centre and binormal
//! `W = U x V`. Each satellite contributes the directional cosines
//! `f = <g, U>` and `h = <g, V>` of its geometry vector `g` (minus the unit
//! line of sight). With positive unmodelled residuals `r_j` on every
//! pseudorange, the along-track and cross-track errors are bounded by the
//! clock-bias error:
//!
//! ```text
//! three satellites:  |du| <= M_u |db|,  |dv| <= M_v |db|
//! two satellites:    |ds| <= M_s |db|,  M_s = 1 / min(|f1|, |f2|)
//! ```
//!
//! The two-satellite case is the limit of a virtual third satellite that pins
//! the receiver to the track.

mod frame;
mod solve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use frame::{
    arc_project, directional_cosines, frenet_frame, ArcProjection, CurvatureSide, FrenetFrame, TrackRadius,
};
pub use solve::{
    determinant_d, inverse_forward_matrix, magnification_s, magnification_uv, sign_condition, solve_three_sat,
    solve_two_sat, MagnificationS, MagnificationUV, SolveKind, SolveResult, DEGENERACY_THRESHOLD,
};

pub type Vector3 = nalgebra::Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("osculating radius must be positive, got {0} m")]
    NonPositiveRadius(f64),
    #[error("point (u = {u}, v = {v}) lies outside the projection domain v < R = {radius}")]
    OutsideProjectionDomain { u: f64, v: f64, radius: f64 },
    #[error("direction {index} has norm {norm}, expected a unit vector")]
    NonUnitDirection { index: usize, norm: f64 },
    #[error("degenerate satellite geometry: determinant {0}")]
    Degenerate(f64),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
}

/// Directional cosines `(f, h)` of one satellite against the track frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionCosines {
    pub f: f64,
    pub h: f64,
}

impl DirectionCosines {
    pub fn new(f: f64, h: f64) -> Self {
        Self { f, h }
    }
}

/// Geometry vector of one satellite and its cosines against a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatGeometry {
    pub sat_id: String,
    /// Minus the unit line-of-sight vector, in the frame's coordinates.
    pub g: Vector3,
    pub f: f64,
    pub h: f64,
}

impl SatGeometry {
    pub fn cosines(&self) -> DirectionCosines {
        DirectionCosines::new(self.f, self.h)
    }
}

/// One pseudorange change and its modelled correction, metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudorangeDelta {
    pub sat_id: String,
    pub delta_rho: f64,
    pub epsilon: f64,
}

impl PseudorangeDelta {
    /// `r = delta_rho - epsilon`, the part of the pseudorange left unmodelled.
    pub fn residual(&self) -> f64 {
        self.delta_rho - self.epsilon
    }
}
