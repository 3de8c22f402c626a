//! Test-only oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use navbound::track_geometry::DirectionCosines;
use rand::Rng;

/// Cosines of a satellite at `elevation` above the horizon whose horizontal
/// bearing makes angle `bearing` with the track tangent.
pub fn sky_cosines(elevation: f64, bearing: f64) -> DirectionCosines {
    let horizontal = elevation.cos();
    DirectionCosines::new(-horizontal * bearing.cos(), -horizontal * bearing.sin())
}

pub fn random_sky_cosines<R: Rng>(rng: &mut R, min_elevation: f64) -> DirectionCosines {
    let elevation = rng.random_range(min_elevation..std::f64::consts::FRAC_PI_2);
    let bearing = rng.random_range(0.0..std::f64::consts::TAU);
    sky_cosines(elevation, bearing)
}

/// Three sky satellites satisfying the cyclic sign condition in some order.
pub fn random_admissible_triple<R: Rng>(rng: &mut R) -> [DirectionCosines; 3] {
    loop {
        let t = [0, 1, 2].map(|_| random_sky_cosines(rng, 0.0));
        if navbound::track_geometry::sign_condition(&t).is_some() {
            return t;
        }
    }
}

/// Two sky satellites on opposite sides of the track normal plane.
pub fn random_admissible_pair<R: Rng>(rng: &mut R, min_elevation: f64) -> (DirectionCosines, DirectionCosines) {
    loop {
        let a = random_sky_cosines(rng, min_elevation);
        let b = random_sky_cosines(rng, min_elevation);
        if a.f * b.f < 0.0 {
            return (a, b);
        }
    }
}

/// Strictly positive residuals in (0, scale].
pub fn positive_residuals<R: Rng, const N: usize>(rng: &mut R, scale: f64) -> [f64; N] {
    [0; N].map(|_| scale * (1.0 - rng.random::<f64>()))
}

/// 3x3 determinant by cofactor expansion along the first row.
pub fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn forward_matrix(s: &[DirectionCosines; 3]) -> [[f64; 3]; 3] {
    s.map(|c| [c.f, c.h, 1.0])
}

use navbound::orbits::{EphemerisRecord, GpsTime, NavFile};

pub const BRDC_2015_280: &str = include_str!("../data/brdc2800.15n");

pub fn real_nav() -> NavFile {
    navbound::orbits::parse_rinex_nav(BRDC_2015_280).expect("fixture parses")
}

/// Data records by counting 8-line blocks after the header.
pub fn count_record_blocks(text: &str) -> usize {
    let body: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.contains("END OF HEADER"))
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .collect();
    assert_eq!(body.len() % 8, 0, "body is not a whole number of 8-line blocks");
    body.len() / 8
}

/// Eccentric anomaly by bisection on `E - e sin E - M`, which is monotone.
pub fn kepler_bisection(m: f64, e: f64) -> f64 {
    let (mut lo, mut hi) = (m - 1.0, m + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - e * mid.sin() - m < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Broadcast-ephemeris position with the eccentric anomaly from bisection.
pub fn oracle_position(eph: &EphemerisRecord, t: GpsTime) -> [f64; 3] {
    const MU: f64 = 3.986005e14;
    const WE: f64 = 7.2921151467e-5;
    let tk = (t.week as f64 - eph.toe.week as f64) * 604800.0 + t.sow - eph.toe.sow;
    let a = eph.sqrt_a.powi(2);
    let n = (MU / a.powi(3)).sqrt() + eph.delta_n;
    let e_anom = kepler_bisection(eph.m0 + n * tk, eph.e);
    let nu = 2.0 * (((1.0 + eph.e) / (1.0 - eph.e)).sqrt() * (e_anom / 2.0).tan()).atan();
    let phi = nu + eph.w_arg;
    let u = phi + eph.cus * (2.0 * phi).sin() + eph.cuc * (2.0 * phi).cos();
    let r = a * (1.0 - eph.e * e_anom.cos()) + eph.crs * (2.0 * phi).sin() + eph.crc * (2.0 * phi).cos();
    let i = eph.i0 + eph.idot * tk + eph.cis * (2.0 * phi).sin() + eph.cic * (2.0 * phi).cos();
    let om = eph.omega0 + (eph.omega_dot - WE) * tk - WE * eph.toe.sow;
    let (x, y) = (r * u.cos(), r * u.sin());
    [
        x * om.cos() - y * i.cos() * om.sin(),
        x * om.sin() + y * i.cos() * om.cos(),
        y * i.sin(),
    ]
}

/// ECEF to geodetic latitude/longitude (degrees) and height by fixed-point
/// iteration on latitude.
pub fn ecef_to_geodetic(p: [f64; 3]) -> (f64, f64, f64) {
    let a = 6378137.0;
    let f = 1.0 / 298.257223563;
    let e2 = f * (2.0 - f);
    let rho = p[0].hypot(p[1]);
    let lon = p[1].atan2(p[0]);
    let mut lat = p[2].atan2(rho * (1.0 - e2));
    let mut h = 0.0;
    for _ in 0..50 {
        let n = a / (1.0 - e2 * lat.sin().powi(2)).sqrt();
        h = if lat.cos().abs() > 1e-3 {
            rho / lat.cos() - n
        } else {
            p[2] / lat.sin() - n * (1.0 - e2)
        };
        lat = p[2].atan2(rho * (1.0 - e2 * n / (n + h)));
    }
    (lat.to_degrees(), lon.to_degrees(), h)
}
