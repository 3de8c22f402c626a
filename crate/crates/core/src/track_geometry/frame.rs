use serde::{Deserialize, Serialize};

use super::{GeometryError, SatGeometry, Vector3};

/// Which side of the tangent the osculating centre lies on, looking along the
/// direction of travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureSide {
    Left,
    Right,
    Straight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrackRadius {
    Finite(f64),
    Straight,
}

/// Orthonormal track frame at a base point, in local East-North-Up metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrenetFrame {
    pub u: Vector3,
    pub v: Vector3,
    pub w: Vector3,
    pub radius: TrackRadius,
    pub base_point: Vector3,
}

impl FrenetFrame {
    /// Largest deviation of `[U V W]` from an orthonormal, right-handed triad.
    pub fn orthonormality_residual(&self) -> f64 {
        let norms = [self.u.norm(), self.v.norm(), self.w.norm()].map(|n| (n - 1.0).abs());
        let dots = [self.u.dot(&self.v), self.v.dot(&self.w), self.w.dot(&self.u)].map(f64::abs);
        let handed = (self.u.cross(&self.v) - self.w).amax();
        norms.into_iter().chain(dots).fold(handed, f64::max)
    }
}

/// Builds the frame of a horizontal track heading `track_azimuth` (radians,
/// clockwise from North). `V` points toward the osculating centre; a straight
/// track takes `V` to the left.
pub fn frenet_frame(
    base_point: Vector3,
    track_azimuth: f64,
    side: CurvatureSide,
    radius: f64,
) -> Result<FrenetFrame, GeometryError> {
    if !track_azimuth.is_finite() {
        return Err(GeometryError::NonFinite("track azimuth"));
    }
    let radius = match side {
        CurvatureSide::Straight => TrackRadius::Straight,
        _ if radius.is_nan() || radius <= 0.0 => return Err(GeometryError::NonPositiveRadius(radius)),
        _ if radius.is_infinite() => TrackRadius::Straight,
        _ => TrackRadius::Finite(radius),
    };
    let (sin_az, cos_az) = track_azimuth.sin_cos();
    let u = Vector3::new(sin_az, cos_az, 0.0);
    let left = Vector3::new(-cos_az, sin_az, 0.0);
    let v = match side {
        CurvatureSide::Right => -left,
        CurvatureSide::Left | CurvatureSide::Straight => left,
    };
    let w = u.cross(&v);
    Ok(FrenetFrame {
        u,
        v,
        w,
        radius,
        base_point,
    })
}

/// Arc length `s` of the nearest point on the osculating circle and the
/// Jacobian `(ds/du, ds/dv)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcProjection {
    pub s: f64,
    pub ds_du: f64,
    pub ds_dv: f64,
}

/// Projects an in-plane offset `(u, v)` onto the track:
/// `s = R atan(u / (R - v))`, defined for `v < R`.
pub fn arc_project(u: f64, v: f64, radius: TrackRadius) -> Result<ArcProjection, GeometryError> {
    if !(u.is_finite() && v.is_finite()) {
        return Err(GeometryError::NonFinite("arc offset"));
    }
    match radius {
        TrackRadius::Straight => Ok(ArcProjection {
            s: u,
            ds_du: 1.0,
            ds_dv: 0.0,
        }),
        TrackRadius::Finite(r) => {
            if !(r > 0.0) {
                return Err(GeometryError::NonPositiveRadius(r));
            }
            let gap = r - v;
            if !(gap > 0.0) {
                return Err(GeometryError::OutsideProjectionDomain { u, v, radius: r });
            }
            let rho2 = gap * gap + u * u;
            Ok(ArcProjection {
                s: r * u.atan2(gap),
                ds_du: r * gap / rho2,
                ds_dv: r * u / rho2,
            })
        }
    }
}

/// Directional cosines of each satellite. `directions` are unit vectors from
/// the base point toward the satellites; `g = -direction`.
pub fn directional_cosines(
    directions: &[(String, Vector3)],
    frame: &FrenetFrame,
) -> Result<Vec<SatGeometry>, GeometryError> {
    directions
        .iter()
        .enumerate()
        .map(|(index, (sat_id, dir))| {
            let norm = dir.norm();
            if !((norm - 1.0).abs() <= 1e-9) {
                return Err(GeometryError::NonUnitDirection { index, norm });
            }
            let g = -dir;
            Ok(SatGeometry {
                sat_id: sat_id.clone(),
                g,
                f: g.dot(&frame.u),
                h: g.dot(&frame.v),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Vector3, b: Vector3) -> bool {
        (a - b).amax() < 1e-15
    }

    #[test]
    fn east_bound_left_frame_is_enu() {
        let f = frenet_frame(Vector3::zeros(), FRAC_PI_2, CurvatureSide::Left, 500.0).unwrap();
        assert!(close(f.u, Vector3::x()));
        assert!(close(f.v, Vector3::y()));
        assert!(close(f.w, Vector3::z()));
    }

    #[test]
    fn north_bound_right_frame() {
        let f = frenet_frame(Vector3::zeros(), 0.0, CurvatureSide::Right, 500.0).unwrap();
        assert!(close(f.u, Vector3::y()));
        assert!(close(f.v, Vector3::x()));
        assert!(close(f.w, -Vector3::z()));
    }

    #[test]
    fn non_positive_radius_is_rejected() {
        for r in [0.0, -1.0, f64::NAN] {
            assert!(frenet_frame(Vector3::zeros(), 0.0, CurvatureSide::Left, r).is_err());
        }
        assert!(frenet_frame(Vector3::zeros(), 0.0, CurvatureSide::Straight, 0.0).is_ok());
    }

    #[test]
    fn arc_projection_closed_forms() {
        let r = 800.0;
        let p = arc_project(0.0, 0.0, TrackRadius::Finite(r)).unwrap();
        assert_eq!((p.s, p.ds_du, p.ds_dv), (0.0, 1.0, 0.0));
        let p = arc_project(r, 0.0, TrackRadius::Finite(r)).unwrap();
        assert!((p.s - PI * r / 4.0).abs() < 1e-12 * r);
        let p = arc_project(0.0, r / 2.0, TrackRadius::Finite(r)).unwrap();
        assert!((p.ds_du - 2.0).abs() < 1e-15);
        assert_eq!(p.ds_dv, 0.0);
    }

    #[test]
    fn arc_projection_domain() {
        assert!(matches!(
            arc_project(1.0, 10.0, TrackRadius::Finite(10.0)),
            Err(GeometryError::OutsideProjectionDomain { .. })
        ));
        let p = arc_project(3.0, 1e9, TrackRadius::Straight).unwrap();
        assert_eq!((p.s, p.ds_du, p.ds_dv), (3.0, 1.0, 0.0));
    }

    #[test]
    fn cosines_of_axis_satellites() {
        let frame = frenet_frame(Vector3::zeros(), FRAC_PI_2, CurvatureSide::Straight, f64::INFINITY).unwrap();
        let sats = directional_cosines(
            &[("zenith".into(), Vector3::z()), ("east".into(), Vector3::x())],
            &frame,
        )
        .unwrap();
        assert_eq!((sats[0].f, sats[0].h), (0.0, 0.0));
        assert_eq!(sats[1].f, -1.0);
        assert!(sats[1].h.abs() < 1e-15);
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        let frame = frenet_frame(Vector3::zeros(), 0.0, CurvatureSide::Straight, 1.0).unwrap();
        let err = directional_cosines(&[("a".into(), Vector3::new(0.0, 0.0, 1.1))], &frame).unwrap_err();
        assert!(matches!(err, GeometryError::NonUnitDirection { index: 0, .. }));
    }
}
