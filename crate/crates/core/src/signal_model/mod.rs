//! Code-spread signal model, maximum-likelihood delay estimation and the
//! worst-case delay bias under a power-bounded interference.
//!
//! Samples follow `z(kT) = w(kT - tau) + y(kT) + n(kT)` with
//! `w(t) = r e^{i phi} m(t)` and complex Gaussian noise `n`. For a small
//! interference `dy` the delay estimate moves by
//!
//! ```text
//! |d tau| = |Re<dy, w'>| / | ||w'||^2 + Re<w - z, w''> |  <=  M_tau ||dy||
//! M_tau   = ||w'|| / | ||w'||^2 + Re<w - z, w''> |
//! ```
//!
//! with equality for `dy` parallel to `w'` (see [`worst_interference`]).

mod code;
mod estimator;
mod waveform;

use thiserror::Error;

pub use code::{generate_ca_code, ChipSequence, CA_CHIPPING_RATE, CA_CODE_LENGTH};
pub use estimator::{
    generate_noise, magnification_tau, ml_delay_estimate, orthogonal_interference, perturbation_experiment,
    random_interference, stationarity_residual, worst_interference, DelayEstimate, DelayWindow, NoiseConfig,
    TauPerturbation, MAX_REFINEMENT_ITERATIONS,
};
pub use waveform::{
    sample_waveform, sample_waveform_jet, DerivativeOrder, SampledSignal, WaveformJet, WaveformSpec,
    DEFAULT_SAMPLES_PER_CHIP, DEFAULT_SMOOTHING_CHIPS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("unsupported PRN {0}: C/A codes are defined for PRN 1..=32")]
    UnsupportedPrn(u8),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid waveform: {0}")]
    InvalidSpec(String),
    #[error("pulse smoothing {0} s leaves the waveform non-differentiable at chip edges")]
    NonSmoothPulse(f64),
    #[error("derivative order {0} not supported (0, 1 or 2)")]
    InvalidDerivativeOrder(u8),
    #[error("signal lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("signal contains non-finite samples")]
    NonFinite,
    #[error("empty search window [{start}, {end}]")]
    EmptyWindow { start: f64, end: f64 },
    #[error("search window of {width_chips} chips is narrower than 2 chips")]
    NarrowWindow { width_chips: f64 },
    #[error("no stationary point of the likelihood inside [{start}, {end}]")]
    NoStationaryPoint { start: f64, end: f64 },
    #[error("delay refinement did not converge after {iterations} iterations (last tau = {last_tau} s)")]
    NonConvergence { iterations: usize, last_tau: f64 },
    #[error("likelihood curvature vanishes ({denominator}); no first-order bound exists")]
    DegenerateCurvature { denominator: f64 },
    #[error("derivative signal is identically zero")]
    ZeroDerivative,
    #[error("interference power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("noise sigma must be non-negative, got {0}")]
    NegativeSigma(f64),
}
