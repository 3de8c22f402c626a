use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;

use super::{GpsTime, OrbitError, OrbitSource, Vector3};

/// Precomputed ECEF positions, linearly interpolated between samples.
#[derive(Debug, Clone, Default)]
pub struct TabulatedOrbits {
    by_sat: BTreeMap<String, Vec<(f64, Vector3)>>,
}

#[derive(Deserialize)]
struct Row {
    sat_id: String,
    week: u32,
    sow: f64,
    x_m: f64,
    y_m: f64,
    z_m: f64,
}

impl TabulatedOrbits {
    /// Reads CSV with header `sat_id,week,sow,x_m,y_m,z_m`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, OrbitError> {
        let mut samples = Vec::new();
        for (i, row) in csv::Reader::from_reader(reader).deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| OrbitError::Tabulated(format!("row {}: {e}", i + 1)))?;
            let t = GpsTime::new(row.week, row.sow)?;
            samples.push((row.sat_id, t, Vector3::new(row.x_m, row.y_m, row.z_m)));
        }
        Self::from_samples(samples)
    }

    pub fn from_samples(samples: impl IntoIterator<Item = (String, GpsTime, Vector3)>) -> Result<Self, OrbitError> {
        let mut by_sat: BTreeMap<String, Vec<(f64, Vector3)>> = BTreeMap::new();
        for (sat, t, p) in samples {
            if !p.iter().all(|x| x.is_finite()) {
                return Err(OrbitError::Tabulated(format!("non-finite position for {sat}")));
            }
            by_sat.entry(sat).or_default().push((t.total_seconds(), p));
        }
        for (sat, rows) in by_sat.iter_mut() {
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            if rows.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(OrbitError::Tabulated(format!("duplicate epoch for {sat}")));
            }
        }
        Ok(Self { by_sat })
    }
}

impl OrbitSource for TabulatedOrbits {
    fn sat_ids(&self) -> Vec<String> {
        self.by_sat.keys().cloned().collect()
    }

    fn position(&self, sat_id: &str, t: GpsTime) -> Result<Option<Vector3>, OrbitError> {
        let Some(rows) = self.by_sat.get(sat_id) else {
            return Ok(None);
        };
        let ts = t.total_seconds();
        let k = rows.partition_point(|r| r.0 < ts);
        if let Some(&(t1, p1)) = rows.get(k) {
            if t1 == ts {
                return Ok(Some(p1));
            }
            if k > 0 {
                let (t0, p0) = rows[k - 1];
                let w = (ts - t0) / (t1 - t0);
                return Ok(Some(p0 + (p1 - p0) * w));
            }
        }
        Ok(None)
    }

    fn coverage(&self) -> Option<(GpsTime, GpsTime)> {
        let lo = self
            .by_sat
            .values()
            .filter_map(|r| r.first())
            .map(|r| r.0)
            .min_by(f64::total_cmp)?;
        let hi = self
            .by_sat
            .values()
            .filter_map(|r| r.last())
            .map(|r| r.0)
            .max_by(f64::total_cmp)?;
        Some((
            GpsTime::from_total_seconds(lo).ok()?,
            GpsTime::from_total_seconds(hi).ok()?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_interpolated() {
        let csv = "sat_id,week,sow,x_m,y_m,z_m\nG01,1750,60,1,2,3\nG01,1750,0,0,0,0\nG02,1750,0,5,5,5\n";
        let orbits = TabulatedOrbits::from_csv(csv.as_bytes()).unwrap();
        let at = |sat: &str, sow: f64| orbits.position(sat, GpsTime::new(1750, sow).unwrap()).unwrap();
        assert_eq!(at("G01", 60.0), Some(Vector3::new(1.0, 2.0, 3.0)));
        assert_eq!(at("G01", 30.0), Some(Vector3::new(0.5, 1.0, 1.5)));
        assert_eq!(at("G01", 61.0), None);
        assert_eq!(at("G02", 0.0), Some(Vector3::new(5.0, 5.0, 5.0)));
        assert_eq!(at("G03", 0.0), None);
        assert_eq!(orbits.sat_ids(), vec!["G01", "G02"]);
    }

    #[test]
    fn malformed_rows_rejected() {
        assert!(TabulatedOrbits::from_csv("sat_id,week,sow,x_m,y_m,z_m\nG01,1750,abc,1,2,3\n".as_bytes()).is_err());
        assert!(TabulatedOrbits::from_csv(
            "sat_id,week,sow,x_m,y_m,z_m\nG01,1750,0,1,2,3\nG01,1750,0,1,2,3\n".as_bytes()
        )
        .is_err());
    }
}
