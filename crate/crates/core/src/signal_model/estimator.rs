//! Maximum-likelihood delay estimation and the delay magnification coefficient.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::waveform::{sample_waveform_jet, SampledSignal, WaveformJet, WaveformSpec};
use super::SignalError;

/// Upper bound on safeguarded Newton steps after the coarse grid search.
pub const MAX_REFINEMENT_ITERATIONS: usize = 50;
/// Stationarity tolerance relative to `||w'||^2`.
const STATIONARITY_TOLERANCE: f64 = 1e-9;
/// Step size, in chips, below which the refinement is converged.
const STEP_TOLERANCE_CHIPS: f64 = 1e-12;
/// Curvature magnitude, relative to `||w'||^2`, treated as zero.
const CURVATURE_FLOOR: f64 = 1e-12;

/// Closed delay interval `[start, end]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayWindow {
    pub start: f64,
    pub end: f64,
}

impl DelayWindow {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    /// Window of `half_width_chips` chips on either side of `center`.
    pub fn around(center: f64, half_width_chips: f64, spec: &WaveformSpec) -> Self {
        let half = half_width_chips * spec.chip_duration();
        Self::new(center - half, center + half)
    }
}

/// Per-sample complex Gaussian noise: independent real and imaginary parts,
/// each with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self { sigma: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayEstimate {
    pub tau0: f64,
    /// `|Re<z - w, w'>|` at `tau0`; proportional to the likelihood slope.
    pub stationarity_residual: f64,
    /// `||w'||^2` at `tau0`.
    pub derivative_energy: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauPerturbation {
    pub tau0: f64,
    pub m_tau: f64,
    pub delta_tau_bound: f64,
    pub delta_tau_empirical: Option<f64>,
}

/// Slope and curvature of the likelihood in `tau`, up to the factor `1/sigma^2`:
/// `g = Re<z - w, w'>`, `c = ||w'||^2 + Re<w - z, w''>`. The likelihood slope is
/// `-g / sigma^2` and a maximum has `g = 0`, `c > 0`.
struct LocalFit {
    slope: f64,
    curvature: f64,
    derivative_energy: f64,
}

fn local_fit(z: &SampledSignal, jet: &WaveformJet) -> LocalFit {
    let mut slope = 0.0;
    let mut cross = 0.0;
    let mut energy = 0.0;
    for (((zk, w0), w1), w2) in z
        .samples()
        .iter()
        .zip(jet.value.samples())
        .zip(jet.first.samples())
        .zip(jet.second.samples())
    {
        let resid = zk - w0;
        slope += (resid.conj() * w1).re;
        cross += (resid.conj() * w2).re;
        energy += w1.norm_sqr();
    }
    LocalFit {
        slope,
        curvature: energy - cross,
        derivative_energy: energy,
    }
}

fn fit_at(z: &SampledSignal, spec: &WaveformSpec, tau: f64) -> Result<LocalFit, SignalError> {
    Ok(local_fit(z, &sample_waveform_jet(spec, tau)?))
}

fn neg_squared_residual(z: &SampledSignal, spec: &WaveformSpec, tau: f64) -> Result<f64, SignalError> {
    let w = super::waveform::sample_waveform(spec, tau, super::DerivativeOrder::Value)?;
    Ok(-z.sub(&w)?.norm_sqr())
}

/// `|Re<z - w(. - tau), w'(. - tau)>|`, the likelihood slope times `sigma^2`.
pub fn stationarity_residual(z: &SampledSignal, spec: &WaveformSpec, tau: f64) -> Result<f64, SignalError> {
    if z.len() != spec.num_samples {
        return Err(SignalError::LengthMismatch {
            left: z.len(),
            right: spec.num_samples,
        });
    }
    Ok(fit_at(z, spec, tau)?.slope.abs())
}

/// Maximum-likelihood delay of `z` within `window`.
///
/// A quarter-chip grid locates the best cell; a Newton iteration on the
/// likelihood slope, safeguarded by bisection inside the bracketing cells,
/// refines it.
pub fn ml_delay_estimate(
    z: &SampledSignal,
    spec: &WaveformSpec,
    window: DelayWindow,
) -> Result<DelayEstimate, SignalError> {
    spec.validate()?;
    if z.len() != spec.num_samples {
        return Err(SignalError::LengthMismatch {
            left: z.len(),
            right: spec.num_samples,
        });
    }
    let DelayWindow { start, end } = window;
    if !(start.is_finite() && end.is_finite()) || end <= start {
        return Err(SignalError::EmptyWindow { start, end });
    }
    let tc = spec.chip_duration();
    let width_chips = (end - start) / tc;
    if width_chips < 2.0 - 1e-9 {
        return Err(SignalError::NarrowWindow { width_chips });
    }

    let grid_step = tc / 4.0;
    let cells = (width_chips * 4.0).floor() as usize;
    let grid: Vec<f64> = (0..=cells).map(|i| start + i as f64 * grid_step).collect();
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, &tau) in grid.iter().enumerate() {
        let value = neg_squared_residual(z, spec, tau)?;
        if value > best_value {
            best_value = value;
            best = i;
        }
    }

    // Bracket: slope negative on the left of the maximum, positive on the right.
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(grid.len() - 1)];
    let no_root = || SignalError::NoStationaryPoint { start, end };
    let fit_lo = fit_at(z, spec, lo)?;
    let fit_hi = fit_at(z, spec, hi)?;
    if fit_lo.slope > 0.0 || fit_hi.slope < 0.0 {
        return Err(no_root());
    }

    let mut tau = grid[best];
    let step_tolerance = STEP_TOLERANCE_CHIPS * tc;
    for iteration in 1..=MAX_REFINEMENT_ITERATIONS {
        let fit = fit_at(z, spec, tau)?;
        if fit.slope < 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let newton = tau - fit.slope / fit.curvature;
        let next = if fit.curvature > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - tau).abs();
        tau = next;
        if step <= step_tolerance || hi - lo <= step_tolerance {
            let final_fit = fit_at(z, spec, tau)?;
            let residual = final_fit.slope.abs();
            if residual > STATIONARITY_TOLERANCE * final_fit.derivative_energy {
                return Err(SignalError::NonConvergence {
                    iterations: iteration,
                    last_tau: tau,
                });
            }
            if tau < start || tau > end {
                return Err(no_root());
            }
            return Ok(DelayEstimate {
                tau0: tau,
                stationarity_residual: residual,
                derivative_energy: final_fit.derivative_energy,
                iterations: iteration,
            });
        }
    }
    Err(SignalError::NonConvergence {
        iterations: MAX_REFINEMENT_ITERATIONS,
        last_tau: tau,
    })
}

/// `M_tau = ||w'|| / | ||w'||^2 + Re<w - z, w''> |`, evaluated at the
/// unperturbed optimum. Units: seconds of delay per unit interference norm.
pub fn magnification_tau(
    z: &SampledSignal,
    w: &SampledSignal,
    w1: &SampledSignal,
    w2: &SampledSignal,
) -> Result<f64, SignalError> {
    let energy = w1.norm_sqr();
    let cross = w.sub(z)?.inner(w2)?.re;
    // Inner product checked the w/w2 lengths; w1 against w is left.
    if w1.len() != w.len() {
        return Err(SignalError::LengthMismatch {
            left: w1.len(),
            right: w.len(),
        });
    }
    if energy == 0.0 {
        return Err(SignalError::ZeroDerivative);
    }
    let denominator = energy + cross;
    if denominator.abs() < CURVATURE_FLOOR * energy {
        return Err(SignalError::DegenerateCurvature { denominator });
    }
    Ok(energy.sqrt() / denominator.abs())
}

/// Interference of squared norm `power` parallel to `w'`, the direction that
/// attains the delay bound to first order.
pub fn worst_interference(w1: &SampledSignal, power: f64) -> Result<SampledSignal, SignalError> {
    if !(power.is_finite() && power > 0.0) {
        return Err(SignalError::NonPositivePower(power));
    }
    let norm = w1.norm();
    if norm == 0.0 {
        return Err(SignalError::ZeroDerivative);
    }
    Ok(w1.scale(Complex64::new(power.sqrt() / norm, 0.0)))
}

/// Complex Gaussian noise realization of length `len`.
pub fn generate_noise(len: usize, sampling_period: f64, noise: NoiseConfig) -> Result<SampledSignal, SignalError> {
    if !(noise.sigma >= 0.0) {
        return Err(SignalError::NegativeSigma(noise.sigma));
    }
    if noise.sigma == 0.0 {
        return Ok(SampledSignal::zeros(len, sampling_period));
    }
    let normal = Normal::new(0.0, noise.sigma).map_err(|_| SignalError::NegativeSigma(noise.sigma))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let samples = (0..len)
        .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    SampledSignal::new(samples, sampling_period)
}

/// Interference of Euclidean norm `norm` in a uniformly random complex direction.
pub fn random_interference(
    len: usize,
    sampling_period: f64,
    norm: f64,
    seed: u64,
) -> Result<SampledSignal, SignalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let raw = SampledSignal::new(samples, sampling_period)?;
    let scale = norm / raw.norm();
    Ok(raw.scale(Complex64::new(scale, 0.0)))
}

/// Random interference of norm `norm` with `<dy, w'> = 0`.
pub fn orthogonal_interference(w1: &SampledSignal, norm: f64, seed: u64) -> Result<SampledSignal, SignalError> {
    let energy = w1.norm_sqr();
    if energy == 0.0 {
        return Err(SignalError::ZeroDerivative);
    }
    let raw = random_interference(w1.len(), w1.sampling_period(), 1.0, seed)?;
    let along = w1.inner(&raw)? / energy;
    let projected = raw.sub(&w1.scale(along))?;
    let scale = norm / projected.norm();
    Ok(projected.scale(Complex64::new(scale, 0.0)))
}

/// End-to-end check of the first-order bound: simulate `z = w + n`, estimate
/// the delay with and without `interference`, and compare the shift with
/// `M_tau ||interference||`. Deterministic for a given seed.
pub fn perturbation_experiment(
    spec: &WaveformSpec,
    tau_true: f64,
    noise: NoiseConfig,
    interference: &SampledSignal,
) -> Result<TauPerturbation, SignalError> {
    spec.validate()?;
    if interference.len() != spec.num_samples {
        return Err(SignalError::LengthMismatch {
            left: interference.len(),
            right: spec.num_samples,
        });
    }
    let window = DelayWindow::around(tau_true, 2.5, spec);
    let clean = sample_waveform_jet(spec, tau_true)?.value;
    let z = clean.add(&generate_noise(spec.num_samples, spec.sampling_period, noise)?)?;
    let tau0 = ml_delay_estimate(&z, spec, window)?.tau0;
    let jet = sample_waveform_jet(spec, tau0)?;
    let m_tau = magnification_tau(&z, &jet.value, &jet.first, &jet.second)?;

    let perturbed = z.add(interference)?;
    let tau1 = ml_delay_estimate(&perturbed, spec, window)?.tau0;
    Ok(TauPerturbation {
        tau0,
        m_tau,
        delta_tau_bound: m_tau * interference.norm(),
        delta_tau_empirical: Some(tau1 - tau0),
    })
}
