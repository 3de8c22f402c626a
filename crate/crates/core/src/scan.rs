//! Day-long sweeps of the along-track magnification coefficient `M_s`.
//!
//! At every epoch the visible satellites are projected onto the tangent of a
//! straight track through the site. Every pair with directional cosines of
//! opposite sign bounds the along-track error by `M_s |db|`; the best-pair
//! policy keeps the smallest such `M_s`.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbits::{visible_satellites, GpsTime, OrbitError, OrbitSource, SiteLocation, VisibleSat};
use crate::track_geometry::{
    directional_cosines, frenet_frame, magnification_s, CurvatureSide, DirectionCosines, Vector3,
};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("invalid scan configuration: {0}")]
    InvalidConfig(String),
    #[error("orbit source does not cover the scan span")]
    NoOverlap,
    #[error("no present values to histogram")]
    NoPresentValues,
    #[error("invalid histogram binning: {0}")]
    InvalidBinning(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PairPolicy {
    /// Keep the admissible pair with the smallest `M_s`.
    #[default]
    BestPair,
    /// Also record `M_s` of every admissible pair.
    AllPairs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub site: SiteLocation,
    /// Track tangent azimuth, degrees clockwise from north.
    pub track_azimuth: f64,
    /// Elevation mask, degrees.
    pub mask: f64,
    /// Epoch spacing, seconds.
    pub step: f64,
    pub start: GpsTime,
    /// Exclusive.
    pub end: GpsTime,
    pub pair_policy: PairPolicy,
}

impl ScanConfig {
    /// One UTC day starting at midnight, with `utc_offset` = GPS - UTC seconds.
    pub fn utc_day(site: SiteLocation, date: NaiveDate, utc_offset: f64) -> Result<Self, ScanError> {
        let start = GpsTime::from_utc(date.and_hms_opt(0, 0, 0).expect("midnight"), utc_offset)?;
        Ok(Self {
            site,
            track_azimuth: 90.0,
            mask: 15.0,
            step: 60.0,
            start,
            end: start.add_seconds(86_400.0)?,
            pair_policy: PairPolicy::BestPair,
        })
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(ScanError::InvalidConfig(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if self.start >= self.end {
            return Err(ScanError::InvalidConfig("start must precede end".into()));
        }
        if !(0.0..90.0).contains(&self.mask) {
            return Err(ScanError::InvalidConfig(format!("mask {} outside [0, 90)", self.mask)));
        }
        if !self.track_azimuth.is_finite() {
            return Err(ScanError::InvalidConfig("non-finite track azimuth".into()));
        }
        Ok(())
    }

    /// `start + k step` for every `k` with the epoch before `end`.
    pub fn epochs(&self) -> Result<Vec<GpsTime>, ScanError> {
        self.validate()?;
        let span = self.end.seconds_since(&self.start);
        let count = (span / self.step).ceil() as usize;
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let offset = k as f64 * self.step;
            if offset < span {
                out.push(self.start.add_seconds(offset)?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub sat_a: String,
    pub sat_b: String,
    pub m_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochResult {
    pub t: GpsTime,
    pub n_visible: usize,
    /// Visible satellites, sorted.
    pub visible: Vec<String>,
    pub best_m_s: Option<f64>,
    pub best_pair: Option<(String, String)>,
    pub all_pair_values: Option<Vec<PairValue>>,
}

/// Directional cosines `f = <g, U>` against a straight track of the given
/// azimuth, sorted by satellite id.
pub fn along_track_cosines(
    visible: &[VisibleSat],
    track_azimuth: f64,
) -> Result<Vec<(String, DirectionCosines)>, ScanError> {
    let frame = frenet_frame(
        Vector3::zeros(),
        track_azimuth.to_radians(),
        CurvatureSide::Straight,
        f64::INFINITY,
    )
    .map_err(|e| ScanError::InvalidConfig(e.to_string()))?;
    let dirs: Vec<(String, Vector3)> = visible.iter().map(|v| (v.sat_id.clone(), v.enu_unit_dir)).collect();
    let mut out: Vec<(String, DirectionCosines)> = directional_cosines(&dirs, &frame)
        .map_err(|e| ScanError::InvalidConfig(e.to_string()))?
        .into_iter()
        .map(|s| {
            let c = s.cosines();
            (s.sat_id, c)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Evaluates one epoch from its visible satellites.
pub fn evaluate_epoch(
    t: GpsTime,
    visible: &[VisibleSat],
    track_azimuth: f64,
    policy: PairPolicy,
) -> Result<EpochResult, ScanError> {
    let cosines = along_track_cosines(visible, track_azimuth)?;
    let mut best: Option<PairValue> = None;
    let mut all = Vec::new();
    for (i, (id_a, a)) in cosines.iter().enumerate() {
        for (id_b, b) in &cosines[i + 1..] {
            let Some(m_s) = magnification_s(*a, *b).m_s else {
                continue;
            };
            let value = PairValue {
                sat_a: id_a.clone(),
                sat_b: id_b.clone(),
                m_s,
            };
            if best.as_ref().is_none_or(|p| m_s < p.m_s) {
                best = Some(value.clone());
            }
            if policy == PairPolicy::AllPairs {
                all.push(value);
            }
        }
    }
    Ok(EpochResult {
        t,
        n_visible: cosines.len(),
        visible: cosines.into_iter().map(|(id, _)| id).collect(),
        best_m_s: best.as_ref().map(|p| p.m_s),
        best_pair: best.map(|p| (p.sat_a, p.sat_b)),
        all_pair_values: (policy == PairPolicy::AllPairs).then_some(all),
    })
}

/// Sweeps the configured span, one result per epoch in time order. Epochs
/// without an admissible pair carry `best_m_s = None`.
pub fn scan_ms<S: OrbitSource + ?Sized>(config: &ScanConfig, source: &S) -> Result<Vec<EpochResult>, ScanError> {
    let epochs = config.epochs()?;
    if source.sat_ids().is_empty() {
        return Err(OrbitError::EmptyEphemerisSet.into());
    }
    let (lo, hi) = source.coverage().ok_or(ScanError::NoOverlap)?;
    if hi < config.start || lo >= config.end {
        return Err(ScanError::NoOverlap);
    }
    epochs
        .par_iter()
        .map(|&t| {
            let visible = visible_satellites(source, &config.site, t, config.mask)?;
            evaluate_epoch(t, &visible, config.track_azimuth, config.pair_policy)
        })
        .collect()
}

/// Fraction of present `best_m_s` values strictly below `threshold`.
pub fn fraction_below(results: &[EpochResult], threshold: f64) -> Option<f64> {
    let present: Vec<f64> = results.iter().filter_map(|r| r.best_m_s).collect();
    if present.is_empty() {
        return None;
    }
    Some(present.iter().filter(|&&v| v < threshold).count() as f64 / present.len() as f64)
}

/// A jump of `best_m_s` between adjacent epochs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    /// Index of the later epoch.
    pub index: usize,
    pub delta: f64,
    pub visible_set_changed: bool,
    pub best_pair_changed: bool,
}

impl Transition {
    pub fn explained(&self) -> bool {
        self.visible_set_changed || self.best_pair_changed
    }
}

/// Adjacent epochs, both present, whose `best_m_s` differ by more than `threshold`.
pub fn sharp_transitions(results: &[EpochResult], threshold: f64) -> Vec<Transition> {
    results
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let delta = w[1].best_m_s? - w[0].best_m_s?;
            (delta.abs() > threshold).then(|| Transition {
                index: i + 1,
                delta,
                visible_set_changed: w[0].visible.iter().collect::<BTreeSet<_>>() != w[1].visible.iter().collect(),
                best_pair_changed: w[0].best_pair != w[1].best_pair,
            })
        })
        .collect()
}

/// Relative frequencies over equal bins plus underflow and overflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `n + 1` strictly increasing edges; bin `k` is `[edge_k, edge_k+1)`.
    pub bin_edges: Vec<f64>,
    pub relative_frequency: Vec<f64>,
    /// Share of values below the first edge.
    pub underflow: f64,
    /// Share of values at or above the last edge.
    pub overflow: f64,
    pub count: usize,
}

impl Histogram {
    pub fn total(&self) -> f64 {
        self.underflow + self.overflow + self.relative_frequency.iter().sum::<f64>()
    }
}

pub const DEFAULT_HISTOGRAM_RANGE: (f64, f64) = (1.0, 3.0);
pub const DEFAULT_BIN_WIDTH: f64 = 0.1;

/// Histogram of present `best_m_s` values, normalized by their count.
pub fn histogram(results: &[EpochResult], bin_width: f64, range: (f64, f64)) -> Result<Histogram, ScanError> {
    let values: Vec<f64> = results.iter().filter_map(|r| r.best_m_s).collect();
    histogram_values(&values, bin_width, range)
}

/// `range` must be a whole number of `bin_width`s.
pub fn histogram_values(values: &[f64], bin_width: f64, range: (f64, f64)) -> Result<Histogram, ScanError> {
    let (lo, hi) = range;
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(ScanError::InvalidBinning(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(ScanError::InvalidBinning(format!("invalid range [{lo}, {hi}]")));
    }
    let n = ((hi - lo) / bin_width).round();
    if n < 1.0 || (n * bin_width - (hi - lo)).abs() > 1e-9 * (hi - lo) {
        return Err(ScanError::InvalidBinning(format!(
            "width {bin_width} does not divide [{lo}, {hi}]"
        )));
    }
    if values.is_empty() {
        return Err(ScanError::NoPresentValues);
    }
    let n = n as usize;
    let bin_edges: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let mut counts = vec![0usize; n];
    let (mut under, mut over) = (0usize, 0usize);
    for &v in values {
        if v < lo {
            under += 1;
        } else if v >= hi {
            over += 1;
        } else {
            counts[bin_edges.partition_point(|&e| e <= v) - 1] += 1;
        }
    }
    let total = values.len() as f64;
    Ok(Histogram {
        relative_frequency: counts.iter().map(|&c| c as f64 / total).collect(),
        bin_edges,
        underflow: under as f64 / total,
        overflow: over as f64 / total,
        count: values.len(),
    })
}

/// One row of the time-series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub week: u32,
    pub sow: f64,
    pub n_visible: usize,
    pub best_m_s: Option<f64>,
    pub sat_a: Option<String>,
    pub sat_b: Option<String>,
}

impl From<&EpochResult> for SeriesRow {
    fn from(r: &EpochResult) -> Self {
        Self {
            week: r.t.week,
            sow: r.t.sow,
            n_visible: r.n_visible,
            best_m_s: r.best_m_s,
            sat_a: r.best_pair.as_ref().map(|p| p.0.clone()),
            sat_b: r.best_pair.as_ref().map(|p| p.1.clone()),
        }
    }
}

/// Writes `week,sow,n_visible,best_m_s,sat_a,sat_b`; gaps leave the last
/// three fields empty.
pub fn write_series_csv<W: Write>(results: &[EpochResult], out: W) -> Result<(), ScanError> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(SeriesRow::from(r))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_series_csv<R: Read>(input: R) -> Result<Vec<SeriesRow>, ScanError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(ScanError::from))
        .collect()
}

/// Writes `week,sow,sat_a,sat_b,m_s` for every admissible pair of every epoch.
pub fn write_pairs_csv<W: Write>(results: &[EpochResult], out: W) -> Result<(), ScanError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["week", "sow", "sat_a", "sat_b", "m_s"])?;
    for r in results {
        for p in r.all_pair_values.iter().flatten() {
            w.write_record([
                r.t.week.to_string(),
                r.t.sow.to_string(),
                p.sat_a.clone(),
                p.sat_b.clone(),
                p.m_s.to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes `bin_low,bin_high,rel_freq`, including the underflow bin when it is
/// non-empty and always the overflow bin (upper edge `inf`).
pub fn write_histogram_csv<W: Write>(hist: &Histogram, out: W) -> Result<(), ScanError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_low", "bin_high", "rel_freq"])?;
    let first = hist.bin_edges[0];
    if hist.underflow > 0.0 {
        w.write_record([
            f64::NEG_INFINITY.to_string(),
            first.to_string(),
            hist.underflow.to_string(),
        ])?;
    }
    for (k, f) in hist.relative_frequency.iter().enumerate() {
        w.write_record([
            hist.bin_edges[k].to_string(),
            hist.bin_edges[k + 1].to_string(),
            f.to_string(),
        ])?;
    }
    let last = hist.bin_edges[hist.bin_edges.len() - 1];
    w.write_record([last.to_string(), f64::INFINITY.to_string(), hist.overflow.to_string()])?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
