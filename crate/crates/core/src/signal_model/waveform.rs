//! Sampled signals and the smoothed chip-pulse waveform `w(kT - tau)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::code::ChipSequence;
use super::SignalError;

/// Default Gaussian smoothing width, as a fraction of one chip.
pub const DEFAULT_SMOOTHING_CHIPS: f64 = 0.1;
/// Default number of samples per chip.
pub const DEFAULT_SAMPLES_PER_CHIP: usize = 4;

/// Complex samples `x(kT)` for `k = 1..=len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    sampling_period: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, sampling_period: f64) -> Result<Self, SignalError> {
        if !(sampling_period.is_finite() && sampling_period > 0.0) {
            return Err(SignalError::InvalidSpec(format!(
                "sampling period {sampling_period} must be positive"
            )));
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(SignalError::NonFinite);
        }
        Ok(Self {
            samples,
            sampling_period,
        })
    }

    pub fn zeros(len: usize, sampling_period: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            sampling_period,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sampling_period(&self) -> f64 {
        self.sampling_period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn check_len(&self, other: &Self) -> Result<(), SignalError> {
        if self.len() != other.len() {
            return Err(SignalError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }

    /// `<self, other> = sum_k conj(self_k) * other_k`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, SignalError> {
        self.check_len(other)?;
        Ok(self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SignalError> {
        self.check_len(other)?;
        Ok(Self {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
            sampling_period: self.sampling_period,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SignalError> {
        self.check_len(other)?;
        Ok(Self {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
            sampling_period: self.sampling_period,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * factor).collect(),
            sampling_period: self.sampling_period,
        }
    }

    /// Writes `k,re,im` rows with a header, `k` starting at 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,re,im")?;
        for (k, s) in self.samples.iter().enumerate() {
            writeln!(out, "{},{},{}", k + 1, s.re, s.im)?;
        }
        Ok(())
    }
}

/// Which derivative of the waveform with respect to its time argument to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeOrder {
    Value,
    First,
    Second,
}

impl TryFrom<u8> for DerivativeOrder {
    type Error = SignalError;

    fn try_from(order: u8) -> Result<Self, Self::Error> {
        match order {
            0 => Ok(Self::Value),
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            other => Err(SignalError::InvalidDerivativeOrder(other)),
        }
    }
}

/// Parameters of the transmitted waveform `w(t) = r e^{i phi} m(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub code: ChipSequence,
    pub amplitude: f64,
    pub phase: f64,
    /// Standard deviation of the Gaussian kernel smoothing chip edges, seconds.
    pub pulse_smoothing: f64,
    pub sampling_period: f64,
    pub num_samples: usize,
}

impl WaveformSpec {
    /// One code period at four samples per chip, unit amplitude, zero phase,
    /// edges smoothed over a tenth of a chip.
    pub fn default_for(code: ChipSequence) -> Self {
        let samples_per_period = code.len() * DEFAULT_SAMPLES_PER_CHIP;
        let sampling_period = code.period() / samples_per_period as f64;
        let pulse_smoothing = DEFAULT_SMOOTHING_CHIPS * code.chip_duration();
        Self {
            code,
            amplitude: 1.0,
            phase: 0.0,
            pulse_smoothing,
            sampling_period,
            num_samples: samples_per_period,
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(SignalError::InvalidSpec(format!(
                "amplitude {} must be positive",
                self.amplitude
            )));
        }
        if !self.phase.is_finite() {
            return Err(SignalError::InvalidSpec("phase must be finite".into()));
        }
        if !(self.pulse_smoothing.is_finite() && self.pulse_smoothing > 0.0) {
            return Err(SignalError::NonSmoothPulse(self.pulse_smoothing));
        }
        if !(self.sampling_period.is_finite() && self.sampling_period > 0.0) {
            return Err(SignalError::InvalidSpec(format!(
                "sampling period {} must be positive",
                self.sampling_period
            )));
        }
        // Allow a relative rounding slack when T is derived from the period.
        let covered = self.num_samples as f64 * self.sampling_period;
        if covered < self.code.period() * (1.0 - 1e-12) {
            return Err(SignalError::InvalidSpec(format!(
                "{} samples at T = {} s cover {covered} s, less than one code period",
                self.num_samples, self.sampling_period
            )));
        }
        Ok(())
    }

    pub fn chip_duration(&self) -> f64 {
        self.code.chip_duration()
    }

    fn carrier(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// The smoothed code and its first two derivatives at one instant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PulseValue {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Evaluates `m(t)` and its derivatives, where `m` is the periodic train of
/// rectangular chips convolved with a Gaussian of standard deviation `sigma`:
///
/// `m(t) = sum_n c_n [Phi((t - n Tc)/sigma) - Phi((t - (n+1) Tc)/sigma)]`.
///
/// Written per edge, `m(t) = c_k + sum_n (c_n - c_{n-1}) [Phi(e_n) - H(e_n)]`
/// with `k` the chip containing `t`, `e_n = (t - n Tc)/sigma` and `H` the unit
/// step, so only edges within the kernel reach contribute.
pub(crate) fn smoothed_pulse(code: &ChipSequence, sigma: f64, t: f64) -> PulseValue {
    const KERNEL_REACH: f64 = 9.0;
    let tc = code.chip_duration();
    let x = (t / tc).rem_euclid(code.len() as f64);
    let base = x.floor() as i64;
    let s = sigma / tc;
    let first_edge = (x - KERNEL_REACH * s).floor() as i64;
    let last_edge = (x + KERNEL_REACH * s).ceil() as i64;

    let mut value = code.chip(base);
    let mut first = 0.0;
    let mut second = 0.0;
    for n in first_edge..=last_edge {
        let jump = code.chip(n) - code.chip(n - 1);
        if jump == 0.0 {
            continue;
        }
        let e = (x - n as f64) / s;
        let smoothed_minus_step = if n <= base {
            -0.5 * libm::erfc(e * FRAC_1_SQRT_2)
        } else {
            std_normal_cdf(e)
        };
        let pdf = std_normal_pdf(e);
        value += jump * smoothed_minus_step;
        first += jump * pdf;
        second -= jump * e * pdf;
    }
    PulseValue {
        value,
        first: first / sigma,
        second: second / (sigma * sigma),
    }
}

/// Samples `w(kT - tau)` (or its first or second derivative) for
/// `k = 1..=num_samples`. Derivatives are analytic in the time argument.
pub fn sample_waveform(spec: &WaveformSpec, delay: f64, order: DerivativeOrder) -> Result<SampledSignal, SignalError> {
    spec.validate()?;
    let carrier = spec.carrier();
    let samples = (1..=spec.num_samples)
        .map(|k| {
            let p = smoothed_pulse(
                &spec.code,
                spec.pulse_smoothing,
                k as f64 * spec.sampling_period - delay,
            );
            let m = match order {
                DerivativeOrder::Value => p.value,
                DerivativeOrder::First => p.first,
                DerivativeOrder::Second => p.second,
            };
            carrier * m
        })
        .collect();
    SampledSignal::new(samples, spec.sampling_period)
}

/// `w`, `w'` and `w''` sampled at one delay, sharing the kernel evaluations.
#[derive(Debug, Clone)]
pub struct WaveformJet {
    pub value: SampledSignal,
    pub first: SampledSignal,
    pub second: SampledSignal,
}

pub fn sample_waveform_jet(spec: &WaveformSpec, delay: f64) -> Result<WaveformJet, SignalError> {
    spec.validate()?;
    let carrier = spec.carrier();
    let n = spec.num_samples;
    let (mut w0, mut w1, mut w2) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 1..=n {
        let p = smoothed_pulse(
            &spec.code,
            spec.pulse_smoothing,
            k as f64 * spec.sampling_period - delay,
        );
        w0.push(carrier * p.value);
        w1.push(carrier * p.first);
        w2.push(carrier * p.second);
    }
    Ok(WaveformJet {
        value: SampledSignal::new(w0, spec.sampling_period)?,
        first: SampledSignal::new(w1, spec.sampling_period)?,
        second: SampledSignal::new(w2, spec.sampling_period)?,
    })
}
