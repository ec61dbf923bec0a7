//! Directions on the unit viewing sphere, great circles and angular distances.
//!
//! Conventions: longitude grows counter-clockwise seen from the north pole,
//! `lon = 0` looks along `+x`, and `+z` is the north pole. Longitudes are kept
//! in `[-π, π)`; the exact poles carry `lon = 0`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cross products shorter than this are treated as coincident/antipodal input.
pub const DEGENERATE_CROSS_NORM: f64 = 1e-9;

/// `|n_z|` below this makes a circle a pair of meridians.
pub const MERIDIAN_NZ: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphereError {
    #[error("points are coincident or antipodal, no unique great circle")]
    DegenerateCircle,
    #[error("great circle passes through the poles, latitude is not a function of longitude")]
    MeridianCircle,
    #[error("latitude {0} rad outside [-π/2, π/2]")]
    InvalidLatitude(f64),
    #[error("cannot normalize a zero or non-finite vector")]
    ZeroVector,
    #[error("anchor is not on the great circle (|n·a| = {0:e})")]
    AnchorOffCircle(f64),
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = (a + PI).rem_euclid(TAU) - PI;
    // rem_euclid may round up to exactly TAU for tiny negative inputs
    if w >= PI {
        w -= TAU;
    }
    w
}

/// Longitude/latitude pair in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LonLat {
    pub lon: f64,
    pub lat: f64,
}

impl LonLat {
    /// Builds a normalized pair: `lon` is wrapped into `[-π, π)` and pole
    /// longitudes collapse to 0.
    pub fn new(lon: f64, lat: f64) -> Result<Self, SphereError> {
        if !lat.is_finite() || lat.abs() > FRAC_PI_2 || !lon.is_finite() {
            return Err(SphereError::InvalidLatitude(lat));
        }
        let lon = if lat.abs() == FRAC_PI_2 { 0.0 } else { wrap_angle(lon) };
        Ok(Self { lon, lat })
    }

    pub fn from_degrees(lon_deg: f64, lat_deg: f64) -> Result<Self, SphereError> {
        Self::new(lon_deg.to_radians(), lat_deg.to_radians())
    }

    pub fn to_dir(self) -> SphereDir {
        lonlat_to_dir(self)
    }
}

/// Unit vector on the viewing sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct SphereDir(Vector3<f64>);

impl SphereDir {
    pub const NORTH: SphereDir = SphereDir(Vector3::new(0.0, 0.0, 1.0));

    /// Normalizes `(x, y, z)` onto the sphere.
    pub fn normalize(x: f64, y: f64, z: f64) -> Result<Self, SphereError> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self, SphereError> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(SphereError::ZeroVector);
        }
        Ok(Self(v / n))
    }

    /// Caller guarantees `v` is already unit length.
    pub(crate) fn from_unit(v: Vector3<f64>) -> Self {
        Self(v)
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn dot(&self, other: &SphereDir) -> f64 {
        self.0.dot(&other.0)
    }

    /// Great-circle angle to `other`, in `[0, π]`.
    pub fn angle_to(&self, other: &SphereDir) -> f64 {
        // atan2 form stays accurate for both tiny and near-π angles
        self.0.cross(&other.0).norm().atan2(self.0.dot(&other.0))
    }

    pub fn neg(&self) -> SphereDir {
        SphereDir(-self.0)
    }

    pub fn to_lonlat(self) -> LonLat {
        dir_to_lonlat(self)
    }
}

impl From<SphereDir> for [f64; 3] {
    fn from(d: SphereDir) -> Self {
        [d.0.x, d.0.y, d.0.z]
    }
}

impl TryFrom<[f64; 3]> for SphereDir {
    type Error = SphereError;
    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        SphereDir::normalize(v[0], v[1], v[2])
    }
}

pub fn lonlat_to_dir(p: LonLat) -> SphereDir {
    let (sl, cl) = p.lat.sin_cos();
    let (so, co) = p.lon.sin_cos();
    SphereDir(Vector3::new(cl * co, cl * so, sl))
}

pub fn dir_to_lonlat(d: SphereDir) -> LonLat {
    let v = d.0;
    let rho = v.x.hypot(v.y);
    let lat = v.z.atan2(rho);
    let lon = if rho == 0.0 { 0.0 } else { wrap_angle(v.y.atan2(v.x)) };
    LonLat { lon, lat }
}

/// Plane through the sphere center, given by its unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreatCircle {
    pub normal: SphereDir,
}

impl GreatCircle {
    pub fn new(normal: SphereDir) -> Self {
        Self { normal }
    }

    /// Same point set, opposite orientation.
    pub fn flipped(&self) -> Self {
        Self { normal: self.normal.neg() }
    }

    pub fn contains(&self, p: &SphereDir, tol: f64) -> bool {
        self.normal.dot(p).abs() < tol
    }
}

/// Circle through `p1` and `p2`, oriented so that `normal = p1 × p2 / |p1 × p2|`.
pub fn great_circle_from_two(p1: SphereDir, p2: SphereDir) -> Result<GreatCircle, SphereError> {
    let (a, b) = (p1.0, p2.0);
    let raw = a.cross(&b);
    if raw.norm() < DEGENERATE_CROSS_NORM {
        return Err(SphereError::DegenerateCircle);
    }
    // (a + b) × (b − a) = 2 a × b, better conditioned for nearby points
    let n = if a.dot(&b) > 0.0 { (a + b).cross(&(b - a)) } else { raw };
    Ok(GreatCircle { normal: SphereDir(n.normalize()) })
}

/// Angle between `p` and the nearest point of the circle, in `[0, π/2]`.
pub fn angular_distance_to_circle(c: &GreatCircle, p: &SphereDir) -> f64 {
    c.normal.dot(p).abs().clamp(0.0, 1.0).asin()
}

/// Latitude of the circle at longitude `lon`.
pub fn circle_lat_at_lon(c: &GreatCircle, lon: f64) -> Result<f64, SphereError> {
    let n = c.normal.0;
    if n.z.abs() < MERIDIAN_NZ {
        return Err(SphereError::MeridianCircle);
    }
    Ok((-(n.x * lon.cos() + n.y * lon.sin()) / n.z).atan())
}

/// An oriented great circle with a start point: the pointing ray extended onto
/// the sphere, starting at the fingertip and travelling along `tangent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedPointing {
    circle: GreatCircle,
    anchor: SphereDir,
    tangent: SphereDir,
}

impl DirectedPointing {
    /// Tangent is derived as `normal × anchor`.
    pub fn new(circle: GreatCircle, anchor: SphereDir) -> Result<Self, SphereError> {
        let off = circle.normal.dot(&anchor);
        if off.abs() > 1e-9 {
            return Err(SphereError::AnchorOffCircle(off));
        }
        let tangent = SphereDir(circle.normal.0.cross(&anchor.0));
        Ok(Self { circle, anchor, tangent })
    }

    pub fn circle(&self) -> &GreatCircle {
        &self.circle
    }
    pub fn normal(&self) -> &SphereDir {
        &self.circle.normal
    }
    pub fn anchor(&self) -> &SphereDir {
        &self.anchor
    }
    pub fn tangent(&self) -> &SphereDir {
        &self.tangent
    }

    /// Signed arc angle from the anchor to the projection of `p` onto the
    /// circle, in `[-π, π)`.
    pub fn arc_position(&self, p: &SphereDir) -> f64 {
        wrap_angle(self.tangent.dot(p).atan2(self.anchor.dot(p)))
    }
}

/// Walks `theta` radians along the pointing circle from its anchor.
pub fn point_at_arc(dp: &DirectedPointing, theta: f64) -> SphereDir {
    let (s, c) = theta.sin_cos();
    let v = dp.anchor.0 * c + dp.tangent.0 * s;
    SphereDir(v.normalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: f64, y: f64, z: f64) -> SphereDir {
        SphereDir::normalize(x, y, z).unwrap()
    }

    fn close(a: &SphereDir, b: &SphereDir, tol: f64) -> bool {
        (a.0 - b.0).norm() < tol
    }

    #[test]
    fn lonlat_axes() {
        assert!(close(&lonlat_to_dir(LonLat::new(0.0, 0.0).unwrap()), &d(1.0, 0.0, 0.0), 1e-15));
        assert!(close(&lonlat_to_dir(LonLat::new(FRAC_PI_2, 0.0).unwrap()), &d(0.0, 1.0, 0.0), 1e-15));
        assert!(close(&lonlat_to_dir(LonLat::new(0.0, FRAC_PI_2).unwrap()), &d(0.0, 0.0, 1.0), 1e-15));
    }

    #[test]
    fn dir_to_lonlat_axes_and_poles() {
        assert_eq!(dir_to_lonlat(d(1.0, 0.0, 0.0)), LonLat { lon: 0.0, lat: 0.0 });
        let south = dir_to_lonlat(d(0.0, 0.0, -1.0));
        assert_eq!(south.lon, 0.0);
        assert_eq!(south.lat, -FRAC_PI_2);
        // lon = +π folds onto -π
        let back = dir_to_lonlat(d(-1.0, 0.0, 0.0));
        assert_eq!(back.lon, -PI);
    }

    #[test]
    fn lonlat_new_normalizes() {
        let p = LonLat::new(3.0 * PI, 0.1).unwrap();
        assert!((p.lon + PI).abs() < 1e-12);
        assert_eq!(LonLat::new(1.0, FRAC_PI_2).unwrap().lon, 0.0);
        assert!(LonLat::new(0.0, 2.0).is_err());
    }

    #[test]
    fn circle_examples() {
        let c = great_circle_from_two(d(1.0, 0.0, 0.0), d(0.0, 1.0, 0.0)).unwrap();
        assert!(close(&c.normal, &d(0.0, 0.0, 1.0), 1e-15));
        let c = great_circle_from_two(d(1.0, 0.0, 0.0), d(0.0, 0.0, 1.0)).unwrap();
        assert!(close(&c.normal, &d(0.0, -1.0, 0.0), 1e-15));
        assert_eq!(
            great_circle_from_two(d(1.0, 0.0, 0.0), d(-1.0, 0.0, 0.0)),
            Err(SphereError::DegenerateCircle)
        );
        assert_eq!(
            great_circle_from_two(d(0.0, 1.0, 0.0), d(0.0, 1.0, 0.0)),
            Err(SphereError::DegenerateCircle)
        );
    }

    #[test]
    fn distance_examples() {
        let eq = GreatCircle::new(d(0.0, 0.0, 1.0));
        let p30 = LonLat::new(0.7, 30f64.to_radians()).unwrap().to_dir();
        assert!((angular_distance_to_circle(&eq, &p30) - PI / 6.0).abs() < 1e-12);
        assert_eq!(angular_distance_to_circle(&eq, &d(0.3, 0.4, 0.0)), 0.0);
        assert!((angular_distance_to_circle(&eq, &SphereDir::NORTH) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn arc_examples() {
        let dp = DirectedPointing::new(GreatCircle::new(d(0.0, 0.0, 1.0)), d(1.0, 0.0, 0.0)).unwrap();
        assert!(close(dp.tangent(), &d(0.0, 1.0, 0.0), 1e-15));
        assert!(close(&point_at_arc(&dp, 0.0), dp.anchor(), 1e-15));
        assert!(close(&point_at_arc(&dp, FRAC_PI_2), dp.tangent(), 1e-15));
        assert!(close(&point_at_arc(&dp, PI), &d(-1.0, 0.0, 0.0), 1e-15));
        assert!((dp.arc_position(&d(0.0, 1.0, 0.0)) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn anchor_must_lie_on_circle() {
        let r = DirectedPointing::new(GreatCircle::new(d(0.0, 0.0, 1.0)), d(0.0, 0.0, 1.0));
        assert!(matches!(r, Err(SphereError::AnchorOffCircle(_))));
    }

    #[test]
    fn lat_at_lon_examples() {
        let eq = GreatCircle::new(d(0.0, 0.0, 1.0));
        for lon in [-3.0, -1.0, 0.0, 2.5] {
            assert_eq!(circle_lat_at_lon(&eq, lon).unwrap(), 0.0);
        }
        let tilted = GreatCircle::new(d(0.0, -1.0, 1.0));
        let lat = circle_lat_at_lon(&tilted, FRAC_PI_2).unwrap();
        assert!((lat - PI / 4.0).abs() < 1e-15);
        assert_eq!(
            circle_lat_at_lon(&GreatCircle::new(d(0.0, 1.0, 0.0)), 0.3),
            Err(SphereError::MeridianCircle)
        );
    }

    #[test]
    fn wrap_angle_edges() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!(wrap_angle(-1e-18) < PI);
        assert!((wrap_angle(5.0 * PI / 2.0) - FRAC_PI_2).abs() < 1e-12);
    }
}
