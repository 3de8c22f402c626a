use navbound::signal_model::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rayon::prelude::*;

/// Second C/A implementation: G2 output delayed by a per-PRN chip count
/// instead of the two-tap phase selector.
fn ca_code_by_g2_delay(prn: usize) -> Vec<u8> {
    const G2_DELAY: [usize; 32] = [
        5, 6, 7, 8, 17, 18, 139, 140, 141, 251, 252, 254, 255, 256, 257, 258, 469, 470, 471, 472, 473, 474, 509, 512,
        513, 514, 515, 516, 859, 860, 861, 862,
    ];
    let mut r1 = [1u8; 10];
    let mut r2 = [1u8; 10];
    let mut g1 = [0u8; 1023];
    let mut g2 = [0u8; 1023];
    for i in 0..1023 {
        g1[i] = r1[9];
        g2[i] = r2[9];
        let c1 = r1[2] ^ r1[9];
        let c2 = r2[1] ^ r2[2] ^ r2[5] ^ r2[7] ^ r2[8] ^ r2[9];
        r1.rotate_right(1);
        r2.rotate_right(1);
        r1[0] = c1;
        r2[0] = c2;
    }
    let delay = G2_DELAY[prn - 1];
    (0..1023).map(|i| g1[i] ^ g2[(i + 1023 - delay) % 1023]).collect()
}

/// First ten chips of each PRN, octal, as tabulated in IS-GPS-200.
const FIRST_TEN_CHIPS_OCTAL: [u32; 32] = [
    0o1440, 0o1620, 0o1710, 0o1744, 0o1133, 0o1455, 0o1131, 0o1454, 0o1626, 0o1504, 0o1642, 0o1750, 0o1764, 0o1772,
    0o1775, 0o1776, 0o1156, 0o1467, 0o1633, 0o1715, 0o1746, 0o1763, 0o1063, 0o1706, 0o1743, 0o1761, 0o1770, 0o1774,
    0o1127, 0o1453, 0o1625, 0o1712,
];

fn bits(code: &ChipSequence) -> Vec<u8> {
    code.chips().iter().map(|&c| if c == 1 { 0 } else { 1 }).collect()
}

#[test]
fn ca_codes_match_delay_implementation() {
    for prn in 1..=32u8 {
        let code = generate_ca_code(prn).unwrap();
        assert_eq!(bits(&code), ca_code_by_g2_delay(prn as usize), "prn {prn}");
    }
}

#[test]
fn ca_first_ten_chips_match_octal_table() {
    let prn1 = bits(&generate_ca_code(1).unwrap());
    assert_eq!(&prn1[..10], &[1, 1, 0, 0, 1, 0, 0, 0, 0, 0]);
    for prn in 1..=32u8 {
        let b = bits(&generate_ca_code(prn).unwrap());
        let word = b[..10].iter().fold(0u32, |acc, &x| (acc << 1) | u32::from(x));
        assert_eq!(word, FIRST_TEN_CHIPS_OCTAL[prn as usize - 1], "prn {prn}");
    }
}

#[test]
fn ca_cross_correlation_is_bounded_at_every_lag() {
    let a = generate_ca_code(1).unwrap();
    let b = generate_ca_code(2).unwrap();
    let mut worst = 0i32;
    for lag in 0..1023 {
        let c: i32 = (0..1023)
            .map(|i| i32::from(a.chips()[i]) * i32::from(b.chips()[(i + lag) % 1023]))
            .sum();
        // Gold codes of degree 10 are three-valued: {-65, -1, 63}.
        assert!([-65, -1, 63].contains(&c), "lag {lag}: {c}");
        worst = worst.max(c.abs());
    }
    assert!(worst as f64 / 1023.0 <= 65.0 / 1023.0);
    let zero_lag: i32 = a
        .chips()
        .iter()
        .zip(b.chips())
        .map(|(&x, &y)| i32::from(x) * i32::from(y))
        .sum();
    assert!((zero_lag.abs() as f64) / 1023.0 <= 65.0 / 1023.0);
}

fn default_spec(prn: u8) -> WaveformSpec {
    WaveformSpec::default_for(generate_ca_code(prn).unwrap())
}

fn max_abs_diff(a: &SampledSignal, b: &SampledSignal) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn derivative_fixture() -> (WaveformSpec, f64) {
    let mut spec = default_spec(3);
    spec.amplitude = 1.7;
    spec.phase = 0.4;
    let tau = 12.37 * spec.chip_duration();
    (spec, tau)
}

/// Central difference in the time argument. Since
/// `d/dtau w(kT - tau) = -w'(kT - tau)`, the difference is taken reversed.
fn central_difference(spec: &WaveformSpec, tau: f64, order: DerivativeOrder, h: f64) -> SampledSignal {
    let plus = sample_waveform(spec, tau + h, order).unwrap();
    let minus = sample_waveform(spec, tau - h, order).unwrap();
    minus.sub(&plus).unwrap().scale(Complex64::new(0.5 / h, 0.0))
}

#[test]
fn analytic_derivatives_match_central_differences() {
    // Plain central-difference truncation is about h^2 / (6 sigma^2) relative;
    // h = 1e-10 s keeps it below 1e-6 for a 0.1-chip kernel.
    let (spec, tau) = derivative_fixture();
    let h = 1e-10;
    let w1 = sample_waveform(&spec, tau, DerivativeOrder::First).unwrap();
    let w2 = sample_waveform(&spec, tau, DerivativeOrder::Second).unwrap();
    let d1 = max_abs_diff(&w1, &central_difference(&spec, tau, DerivativeOrder::Value, h));
    let d2 = max_abs_diff(&w2, &central_difference(&spec, tau, DerivativeOrder::First, h));
    assert!(d1 <= 1e-6 * w1.max_abs(), "first: {d1} vs {}", w1.max_abs());
    assert!(d2 <= 1e-6 * w2.max_abs(), "second: {d2} vs {}", w2.max_abs());
}

#[test]
fn analytic_derivatives_match_extrapolated_differences_at_one_nanosecond() {
    // Richardson combination of central differences at h and 2h, O(h^4).
    let (spec, tau) = derivative_fixture();
    let h = 1e-9;
    let extrapolated = |order| {
        let fine = central_difference(&spec, tau, order, h);
        let coarse = central_difference(&spec, tau, order, 2.0 * h);
        fine.scale(Complex64::new(4.0 / 3.0, 0.0))
            .sub(&coarse.scale(Complex64::new(1.0 / 3.0, 0.0)))
            .unwrap()
    };
    let w1 = sample_waveform(&spec, tau, DerivativeOrder::First).unwrap();
    let w2 = sample_waveform(&spec, tau, DerivativeOrder::Second).unwrap();
    let d1 = max_abs_diff(&w1, &extrapolated(DerivativeOrder::Value));
    let d2 = max_abs_diff(&w2, &extrapolated(DerivativeOrder::First));
    assert!(d1 <= 1e-6 * w1.max_abs(), "first: {d1} vs {}", w1.max_abs());
    assert!(d2 <= 1e-6 * w2.max_abs(), "second: {d2} vs {}", w2.max_abs());
}

#[test]
fn plain_difference_at_one_nanosecond_is_truncation_limited() {
    let (spec, tau) = derivative_fixture();
    let h = 1e-9;
    let w1 = sample_waveform(&spec, tau, DerivativeOrder::First).unwrap();
    let d1 = max_abs_diff(&w1, &central_difference(&spec, tau, DerivativeOrder::Value, h));
    let predicted = h * h / (6.0 * spec.pulse_smoothing * spec.pulse_smoothing);
    assert!(
        d1 / w1.max_abs() <= 1.5 * predicted,
        "{} vs {predicted}",
        d1 / w1.max_abs()
    );
}

#[test]
fn waveform_is_code_periodic() {
    let spec = default_spec(5);
    let tau = 3.3e-7;
    let a = sample_waveform(&spec, tau, DerivativeOrder::Value).unwrap();
    let b = sample_waveform(&spec, tau + spec.code.period(), DerivativeOrder::Value).unwrap();
    // Equal up to rounding of the wrapped time argument.
    assert!(max_abs_diff(&a, &b) < 1e-9);
}

#[test]
fn orthogonal_interference_leaves_estimate_in_place() {
    let spec = default_spec(1);
    let tau_true = 101.4 * spec.chip_duration();
    let jet = sample_waveform_jet(&spec, tau_true).unwrap();
    let dy = orthogonal_interference(&jet.first, 1e-3 * jet.value.norm(), 11).unwrap();
    assert!(jet.first.inner(&dy).unwrap().norm() < 1e-9 * jet.first.norm() * dy.norm());

    let z = jet.value.add(&dy).unwrap();
    let est = ml_delay_estimate(&z, &spec, DelayWindow::around(tau_true, 2.5, &spec)).unwrap();
    let m_tau = magnification_tau(&jet.value, &jet.value, &jet.first, &jet.second).unwrap();
    let bound = m_tau * dy.norm();
    assert!(
        (est.tau0 - tau_true).abs() <= 1e-2 * bound,
        "{} vs {bound}",
        est.tau0 - tau_true
    );
}

#[test]
fn estimator_meets_stationarity_tolerance_with_noise() {
    let spec = default_spec(9);
    let tau_true = 500.2 * spec.chip_duration();
    let clean = sample_waveform(&spec, tau_true, DerivativeOrder::Value).unwrap();
    let noise = generate_noise(
        spec.num_samples,
        spec.sampling_period,
        NoiseConfig { sigma: 0.5, seed: 4 },
    )
    .unwrap();
    let z = clean.add(&noise).unwrap();
    let est = ml_delay_estimate(&z, &spec, DelayWindow::around(tau_true, 2.0, &spec)).unwrap();
    assert!(est.stationarity_residual <= 1e-9 * est.derivative_energy);
    assert_eq!(
        stationarity_residual(&z, &spec, est.tau0).unwrap(),
        est.stationarity_residual
    );
    assert!((est.tau0 - tau_true).abs() < 0.1 * spec.chip_duration());
}

#[test]
fn magnification_scales_inversely_with_amplitude() {
    let spec = default_spec(2);
    let tau = 7.7 * spec.chip_duration();
    let jet = sample_waveform_jet(&spec, tau).unwrap();
    let noise = generate_noise(
        spec.num_samples,
        spec.sampling_period,
        NoiseConfig { sigma: 0.2, seed: 1 },
    )
    .unwrap();
    let z = jet.value.add(&noise).unwrap();
    let base = magnification_tau(&z, &jet.value, &jet.first, &jet.second).unwrap();
    let c = Complex64::new(3.5, 0.0);
    let scaled = magnification_tau(
        &z.scale(c),
        &jet.value.scale(c),
        &jet.first.scale(c),
        &jet.second.scale(c),
    )
    .unwrap();
    assert!((scaled * 3.5 / base - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn magnification_is_phase_invariant(theta in 0.0f64..std::f64::consts::TAU, seed in 0u64..1000) {
        let spec = default_spec(4);
        let jet = sample_waveform_jet(&spec, 2.2e-7).unwrap();
        let noise = generate_noise(spec.num_samples, spec.sampling_period, NoiseConfig { sigma: 0.3, seed }).unwrap();
        let z = jet.value.add(&noise).unwrap();
        let base = magnification_tau(&z, &jet.value, &jet.first, &jet.second).unwrap();
        let rot = Complex64::from_polar(1.0, theta);
        let rotated = magnification_tau(&z.scale(rot), &jet.value.scale(rot), &jet.first.scale(rot), &jet.second.scale(rot)).unwrap();
        prop_assert!((rotated / base - 1.0).abs() < 1e-10);
    }

    #[test]
    fn worst_interference_is_normalized_and_parallel(power in 1e-8f64..1e3, prn in 1u8..=32) {
        let spec = default_spec(prn);
        let w1 = sample_waveform(&spec, 1.1e-7, DerivativeOrder::First).unwrap();
        let dy = worst_interference(&w1, power).unwrap();
        prop_assert!((dy.norm_sqr() / power - 1.0).abs() < 1e-12);
        let ip = w1.inner(&dy).unwrap().norm();
        prop_assert!((ip / (dy.norm() * w1.norm()) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn magnification_matches_reestimation_on_noisy_signal() {
    let spec = default_spec(6);
    let tau_true = 250.6 * spec.chip_duration();
    let window = DelayWindow::around(tau_true, 2.5, &spec);
    for seed in [1u64, 2, 3] {
        let clean = sample_waveform(&spec, tau_true, DerivativeOrder::Value).unwrap();
        let z = clean
            .add(&generate_noise(spec.num_samples, spec.sampling_period, NoiseConfig { sigma: 0.3, seed }).unwrap())
            .unwrap();
        let tau0 = ml_delay_estimate(&z, &spec, window).unwrap().tau0;
        let jet = sample_waveform_jet(&spec, tau0).unwrap();
        let m_tau = magnification_tau(&z, &jet.value, &jet.first, &jet.second).unwrap();
        let eps = 1e-4 * jet.value.norm();
        let dy = jet.first.scale(Complex64::new(eps / jet.first.norm(), 0.0));
        let tau1 = ml_delay_estimate(&z.add(&dy).unwrap(), &spec, window).unwrap().tau0;
        let ratio = (tau1 - tau0).abs() / eps / m_tau;
        assert!((ratio - 1.0).abs() < 0.01, "seed {seed}: ratio {ratio}");
    }
}

#[test]
fn worst_mode_bound_is_tight() {
    let spec = default_spec(1);
    let tau_true = 333.3 * spec.chip_duration();
    let w = sample_waveform_jet(&spec, tau_true).unwrap();
    let norm = 1e-4 * w.value.norm();
    let dy = worst_interference(&w.first, norm * norm).unwrap();
    let result = perturbation_experiment(&spec, tau_true, NoiseConfig::noiseless(), &dy).unwrap();
    let ratio = result.delta_tau_empirical.unwrap().abs() / result.delta_tau_bound;
    assert!((0.95..=1.05).contains(&ratio), "ratio {ratio}");
    assert!((result.delta_tau_bound - result.m_tau * dy.norm()).abs() <= 1e-15 * result.delta_tau_bound);
}

#[test]
fn zero_interference_gives_zero_shift() {
    let spec = default_spec(8);
    let tau_true = 12.0 * spec.chip_duration();
    let dy = SampledSignal::zeros(spec.num_samples, spec.sampling_period);
    let result = perturbation_experiment(&spec, tau_true, NoiseConfig { sigma: 0.1, seed: 5 }, &dy).unwrap();
    assert!(result.delta_tau_empirical.unwrap().abs() <= 1e-12 * spec.chip_duration());
    assert_eq!(result.delta_tau_bound, 0.0);
}

#[test]
fn perturbation_experiment_is_deterministic() {
    let spec = default_spec(8);
    let tau_true = 12.0 * spec.chip_duration();
    let dy = random_interference(spec.num_samples, spec.sampling_period, 0.01, 3).unwrap();
    let noise = NoiseConfig { sigma: 0.2, seed: 77 };
    assert_eq!(
        perturbation_experiment(&spec, tau_true, noise, &dy).unwrap(),
        perturbation_experiment(&spec, tau_true, noise, &dy).unwrap()
    );
}

#[test]
fn perturbation_experiment_rejects_length_mismatch() {
    let spec = default_spec(8);
    let dy = SampledSignal::zeros(10, spec.sampling_period);
    assert!(matches!(
        perturbation_experiment(&spec, 0.0, NoiseConfig::noiseless(), &dy),
        Err(SignalError::LengthMismatch { .. })
    ));
}

#[test]
fn random_directions_never_exceed_the_bound() {
    let spec = default_spec(1);
    let tau_true = 600.1 * spec.chip_duration();
    let window = DelayWindow::around(tau_true, 2.5, &spec);
    let jet = sample_waveform_jet(&spec, tau_true).unwrap();
    let z = jet.value.clone();
    let tau0 = ml_delay_estimate(&z, &spec, window).unwrap().tau0;
    let m_tau = magnification_tau(&z, &jet.value, &jet.first, &jet.second).unwrap();
    let norm = 1e-4 * jet.value.norm();
    let worst = (0..1000u64)
        .into_par_iter()
        .map(|seed| {
            let dy = random_interference(spec.num_samples, spec.sampling_period, norm, seed).unwrap();
            let tau1 = ml_delay_estimate(&z.add(&dy).unwrap(), &spec, window).unwrap().tau0;
            (tau1 - tau0).abs() / (m_tau * norm)
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst <= 1.05, "worst ratio {worst}");
}
