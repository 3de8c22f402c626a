use serde::{Deserialize, Serialize};

use super::{ecef_to_enu, sat_position_ecef, EphemerisSet, GpsTime, OrbitError, SiteLocation, Vector3};

/// Anything that yields satellite ECEF positions over time.
pub trait OrbitSource: Sync {
    /// Satellite identifiers in a stable order.
    fn sat_ids(&self) -> Vec<String>;
    /// ECEF position at `t`, or `None` when the source does not cover `t`.
    fn position(&self, sat_id: &str, t: GpsTime) -> Result<Option<Vector3>, OrbitError>;
    /// Earliest and latest instants covered by the source.
    fn coverage(&self) -> Option<(GpsTime, GpsTime)>;
}

impl OrbitSource for EphemerisSet {
    fn sat_ids(&self) -> Vec<String> {
        EphemerisSet::sat_ids(self).map(str::to_owned).collect()
    }

    fn position(&self, sat_id: &str, t: GpsTime) -> Result<Option<Vector3>, OrbitError> {
        self.select(sat_id, t).map(|eph| sat_position_ecef(eph, t)).transpose()
    }

    fn coverage(&self) -> Option<(GpsTime, GpsTime)> {
        EphemerisSet::coverage(self)
    }
}

/// A satellite above the elevation mask at one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleSat {
    pub sat_id: String,
    /// Unit vector from the site to the satellite in East-North-Up.
    pub enu_unit_dir: Vector3,
    pub elevation: f64,
    pub azimuth: f64,
    /// `-enu_unit_dir`.
    pub g: Vector3,
}

/// Satellites at or above `mask` degrees, in the source's satellite order.
pub fn visible_satellites<S: OrbitSource + ?Sized>(
    source: &S,
    site: &SiteLocation,
    t: GpsTime,
    mask: f64,
) -> Result<Vec<VisibleSat>, OrbitError> {
    if !(0.0..90.0).contains(&mask) {
        return Err(OrbitError::InvalidMask(mask));
    }
    let ids = source.sat_ids();
    if ids.is_empty() {
        return Err(OrbitError::EmptyEphemerisSet);
    }
    let mut out = Vec::new();
    for sat_id in ids {
        let Some(pos) = source.position(&sat_id, t)? else {
            continue;
        };
        let obs = ecef_to_enu(site, &pos)?;
        if obs.elevation >= mask {
            let dir = obs.enu / obs.range;
            out.push(VisibleSat {
                sat_id,
                enu_unit_dir: dir,
                elevation: obs.elevation,
                azimuth: obs.azimuth,
                g: -dir,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::ephemeris::tests::circular;
    use super::*;

    #[test]
    fn mask_monotone_and_empty_set() {
        let t0 = GpsTime::new(1750, 345_600.0).unwrap();
        let recs = (0..8).map(|k| {
            let mut r = circular(&format!("G{:02}", k + 1), t0);
            r.m0 = k as f64 * 0.8;
            r.omega0 = k as f64 * 0.9;
            r
        });
        let set = EphemerisSet::new(recs);
        let site = SiteLocation::new(34.75, 135.43, 0.0).unwrap();
        let mut prev = usize::MAX;
        for mask in [0.0, 10.0, 30.0, 60.0, 89.9] {
            let vis = visible_satellites(&set, &site, t0, mask).unwrap();
            assert!(vis.len() <= prev);
            assert!(vis
                .iter()
                .all(|v| v.elevation >= mask && (v.enu_unit_dir.norm() - 1.0).abs() < 1e-9));
            prev = vis.len();
        }
        let empty = EphemerisSet::new([]);
        assert_eq!(
            visible_satellites(&empty, &site, t0, 15.0),
            Err(OrbitError::EmptyEphemerisSet)
        );
        assert!(visible_satellites(&set, &site, t0, 90.0).is_err());
    }
}
