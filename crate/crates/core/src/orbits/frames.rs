use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{OrbitError, Vector3};

pub const WGS84_A: f64 = 6_378_137.0;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// Semi-minor axis `a (1 - f)`.
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);

/// WGS-84 geodetic position: degrees, degrees, metres above the ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteLocation {
    pub latitude: f64,
    pub longitude: f64,
    pub height: f64,
}

impl SiteLocation {
    /// Longitude is wrapped into (-180, 180].
    pub fn new(latitude: f64, longitude: f64, height: f64) -> Result<Self, OrbitError> {
        if !(latitude.is_finite() && longitude.is_finite() && height.is_finite()) {
            return Err(OrbitError::InvalidSite("non-finite coordinate".into()));
        }
        if latitude.abs() > 90.0 {
            return Err(OrbitError::InvalidSite(format!(
                "latitude {latitude} outside [-90, 90]"
            )));
        }
        let mut longitude = (longitude + 180.0).rem_euclid(360.0) - 180.0;
        if longitude == -180.0 {
            longitude = 180.0;
        }
        Ok(Self {
            latitude,
            longitude,
            height,
        })
    }
}

pub fn geodetic_to_ecef(site: &SiteLocation) -> Vector3 {
    let e2 = WGS84_F * (2.0 - WGS84_F);
    let (sin_lat, cos_lat) = site.latitude.to_radians().sin_cos();
    let (sin_lon, cos_lon) = site.longitude.to_radians().sin_cos();
    let n = WGS84_A / (1.0 - e2 * sin_lat * sin_lat).sqrt();
    Vector3::new(
        (n + site.height) * cos_lat * cos_lon,
        (n + site.height) * cos_lat * sin_lon,
        (n * (1.0 - e2) + site.height) * sin_lat,
    )
}

/// Rotation taking ECEF vectors to East-North-Up at the site (rows E, N, U).
#[rustfmt::skip]
pub fn enu_rotation(site: &SiteLocation) -> Matrix3<f64> {
    let (sin_lat, cos_lat) = site.latitude.to_radians().sin_cos();
    let (sin_lon, cos_lon) = site.longitude.to_radians().sin_cos();
    Matrix3::new(
        -sin_lon, cos_lon, 0.0,
        -sin_lat * cos_lon, -sin_lat * sin_lon, cos_lat,
        cos_lat * cos_lon, cos_lat * sin_lon, sin_lat,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnuObservation {
    pub enu: Vector3,
    pub range: f64,
    /// Degrees in [-90, 90].
    pub elevation: f64,
    /// Degrees clockwise from north in [0, 360).
    pub azimuth: f64,
}

pub fn ecef_to_enu(site: &SiteLocation, point: &Vector3) -> Result<EnuObservation, OrbitError> {
    let enu = enu_rotation(site) * (point - geodetic_to_ecef(site));
    let range = enu.norm();
    if range == 0.0 {
        return Err(OrbitError::ZeroRange);
    }
    let elevation = (enu.z / range).clamp(-1.0, 1.0).asin().to_degrees();
    let mut azimuth = enu.x.atan2(enu.y).to_degrees().rem_euclid(360.0);
    if azimuth >= 360.0 {
        azimuth = 0.0;
    }
    Ok(EnuObservation {
        enu,
        range,
        elevation,
        azimuth,
    })
}
