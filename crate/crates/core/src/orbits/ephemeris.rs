use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GpsTime, OrbitError, Vector3};

/// Earth gravitational parameter used by the GPS control segment, m^3/s^2.
pub const GM_EARTH: f64 = 3.986_005e14;
/// WGS-84 Earth rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_146_7e-5;
pub const KEPLER_TOLERANCE: f64 = 1e-12;
pub const KEPLER_MAX_ITERATIONS: usize = 30;
/// Maximum `|t - toe|` accepted by default, seconds.
pub const DEFAULT_VALIDITY_WINDOW: f64 = 4.0 * 3600.0;

/// Broadcast Keplerian elements of one satellite for one issue of data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EphemerisRecord {
    pub sat_id: String,
    pub prn: u8,
    /// Clock reference epoch.
    pub toc: GpsTime,
    pub clock_bias: f64,
    pub clock_drift: f64,
    pub clock_drift_rate: f64,
    pub iode: f64,
    pub crs: f64,
    pub delta_n: f64,
    pub m0: f64,
    pub cuc: f64,
    pub e: f64,
    pub cus: f64,
    pub sqrt_a: f64,
    pub toe: GpsTime,
    pub cic: f64,
    pub omega0: f64,
    pub cis: f64,
    pub i0: f64,
    pub crc: f64,
    /// Argument of perigee.
    pub w_arg: f64,
    pub omega_dot: f64,
    pub idot: f64,
    pub health: f64,
    pub tgd: f64,
    pub iodc: f64,
    /// Fit interval in hours, zero when not broadcast.
    pub fit_interval: f64,
    /// Maximum `|t - toe|` in seconds for which this record is used.
    pub validity_window: f64,
}

impl EphemerisRecord {
    pub fn semi_major_axis(&self) -> f64 {
        self.sqrt_a * self.sqrt_a
    }

    /// Checks the plausibility ranges enforced at ingestion.
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            self.sqrt_a,
            self.e,
            self.m0,
            self.delta_n,
            self.i0,
            self.idot,
            self.omega0,
            self.omega_dot,
            self.w_arg,
            self.cuc,
            self.cus,
            self.crc,
            self.crs,
            self.cic,
            self.cis,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err("non-finite orbital element".into());
        }
        if !(0.0..1.0).contains(&self.e) {
            return Err(format!("eccentricity {} outside [0, 1)", self.e));
        }
        if self.sqrt_a <= 0.0 {
            return Err(format!("non-positive sqrt(A) {}", self.sqrt_a));
        }
        let a = self.semi_major_axis();
        if !(2.0e7..=3.5e7).contains(&a) {
            return Err(format!("semi-major axis {a} m outside [2.0e7, 3.5e7]"));
        }
        Ok(())
    }

    pub fn is_healthy(&self) -> bool {
        self.health == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerSolution {
    pub eccentric_anomaly: f64,
    pub iterations: usize,
    /// `E - e sin E - M` at the returned anomaly.
    pub residual: f64,
}

/// Solves `M = E - e sin E` by Newton iteration until `|dE| <= 1e-12`.
pub fn solve_kepler(mean_anomaly: f64, e: f64) -> Result<KeplerSolution, OrbitError> {
    let mut ecc = if e > 0.8 { std::f64::consts::PI } else { mean_anomaly };
    for iteration in 1..=KEPLER_MAX_ITERATIONS {
        let step = (ecc - e * ecc.sin() - mean_anomaly) / (1.0 - e * ecc.cos());
        ecc -= step;
        if step.abs() <= KEPLER_TOLERANCE {
            return Ok(KeplerSolution {
                eccentric_anomaly: ecc,
                iterations: iteration,
                residual: ecc - e * ecc.sin() - mean_anomaly,
            });
        }
    }
    Err(OrbitError::KeplerNonConvergence {
        iterations: KEPLER_MAX_ITERATIONS,
        mean_anomaly,
        eccentricity: e,
    })
}

/// ECEF position of the satellite at GPS time `t`, metres.
///
/// Signal flight time and the Earth rotation during it are not modelled.
pub fn sat_position_ecef(eph: &EphemerisRecord, t: GpsTime) -> Result<Vector3, OrbitError> {
    let tk = t.seconds_since(&eph.toe);
    if tk.abs() > eph.validity_window {
        return Err(OrbitError::StaleEphemeris {
            sat_id: eph.sat_id.clone(),
            offset: tk,
            window: eph.validity_window,
        });
    }
    let a = eph.semi_major_axis();
    let n = (GM_EARTH / (a * a * a)).sqrt() + eph.delta_n;
    let mean_anomaly = eph.m0 + n * tk;
    let ecc = solve_kepler(mean_anomaly, eph.e)?.eccentric_anomaly;
    let (sin_e, cos_e) = ecc.sin_cos();
    let nu = ((1.0 - eph.e * eph.e).sqrt() * sin_e).atan2(cos_e - eph.e);
    let phi = nu + eph.w_arg;
    let (sin2, cos2) = (2.0 * phi).sin_cos();
    let u = phi + eph.cus * sin2 + eph.cuc * cos2;
    let r = a * (1.0 - eph.e * cos_e) + eph.crs * sin2 + eph.crc * cos2;
    let i = eph.i0 + eph.cis * sin2 + eph.cic * cos2 + eph.idot * tk;
    let (xp, yp) = (r * u.cos(), r * u.sin());
    let omega = eph.omega0 + (eph.omega_dot - EARTH_ROTATION_RATE) * tk - EARTH_ROTATION_RATE * eph.toe.sow;
    let (sin_o, cos_o) = omega.sin_cos();
    let (sin_i, cos_i) = i.sin_cos();
    Ok(Vector3::new(
        xp * cos_o - yp * cos_i * sin_o,
        xp * sin_o + yp * cos_i * cos_o,
        yp * sin_i,
    ))
}

/// Immutable collection of ephemeris records keyed by satellite.
#[derive(Debug, Clone, Default)]
pub struct EphemerisSet {
    by_sat: BTreeMap<String, Vec<EphemerisRecord>>,
}

impl EphemerisSet {
    /// Keeps healthy records only; each satellite's records are sorted by toe.
    pub fn new(records: impl IntoIterator<Item = EphemerisRecord>) -> Self {
        Self::build(records, true)
    }

    /// Keeps every record regardless of the broadcast health word.
    pub fn including_unhealthy(records: impl IntoIterator<Item = EphemerisRecord>) -> Self {
        Self::build(records, false)
    }

    fn build(records: impl IntoIterator<Item = EphemerisRecord>, healthy_only: bool) -> Self {
        let mut by_sat: BTreeMap<String, Vec<EphemerisRecord>> = BTreeMap::new();
        for rec in records.into_iter().filter(|r| !healthy_only || r.is_healthy()) {
            by_sat.entry(rec.sat_id.clone()).or_default().push(rec);
        }
        for recs in by_sat.values_mut() {
            recs.sort_by_key(|r| r.toe);
        }
        Self { by_sat }
    }

    /// Overrides the validity window of every record.
    pub fn with_validity_window(mut self, seconds: f64) -> Self {
        for rec in self.by_sat.values_mut().flatten() {
            rec.validity_window = seconds;
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.by_sat.is_empty()
    }

    pub fn len(&self) -> usize {
        self.by_sat.values().map(Vec::len).sum()
    }

    pub fn sat_ids(&self) -> impl Iterator<Item = &str> {
        self.by_sat.keys().map(String::as_str)
    }

    pub fn records(&self, sat_id: &str) -> &[EphemerisRecord] {
        self.by_sat.get(sat_id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Record with the toe nearest to `t` inside its validity window. On a tie
    /// the later toe wins.
    pub fn select(&self, sat_id: &str, t: GpsTime) -> Option<&EphemerisRecord> {
        let mut best: Option<(&EphemerisRecord, f64)> = None;
        for rec in self.records(sat_id) {
            let offset = t.seconds_since(&rec.toe).abs();
            if offset > rec.validity_window {
                continue;
            }
            if best.is_none_or(|(_, d)| offset <= d) {
                best = Some((rec, offset));
            }
        }
        best.map(|(rec, _)| rec)
    }

    /// Earliest and latest instants covered by some record.
    pub fn coverage(&self) -> Option<(GpsTime, GpsTime)> {
        let mut lo: Option<f64> = None;
        let mut hi: Option<f64> = None;
        for rec in self.by_sat.values().flatten() {
            let toe = rec.toe.total_seconds();
            lo = Some(lo.map_or(toe - rec.validity_window, |x: f64| x.min(toe - rec.validity_window)));
            hi = Some(hi.map_or(toe + rec.validity_window, |x: f64| x.max(toe + rec.validity_window)));
        }
        Some((
            GpsTime::from_total_seconds(lo?.max(0.0)).ok()?,
            GpsTime::from_total_seconds(hi?).ok()?,
        ))
    }
}
