use serde::{Deserialize, Serialize};

use super::ProjectionError;
use crate::sphere::{LonLat, SphereDir};
use nalgebra::Vector3;

/// Views are only defined for centers strictly below this latitude, where the
/// north-up camera frame is well conditioned.
pub const MAX_VIEW_LAT_DEG: f64 = 89.9;

/// Directions with `forward · d` at or below this are not projected.
const MIN_FORWARD_COS: f64 = 1e-6;

/// Square perspective (gnomonic) virtual camera with zero roll.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ViewRepr", into = "ViewRepr")]
pub struct ViewSpec {
    center: LonLat,
    fov: f64,
    size: u32,
}

#[derive(Serialize, Deserialize)]
struct ViewRepr {
    center_lon: f64,
    center_lat: f64,
    fov: f64,
    size: u32,
}

impl TryFrom<ViewRepr> for ViewSpec {
    type Error = ProjectionError;
    fn try_from(r: ViewRepr) -> Result<Self, Self::Error> {
        ViewSpec::new(LonLat::new(r.center_lon, r.center_lat)?, r.fov, r.size)
    }
}

impl From<ViewSpec> for ViewRepr {
    fn from(v: ViewSpec) -> Self {
        ViewRepr { center_lon: v.center.lon, center_lat: v.center.lat, fov: v.fov, size: v.size }
    }
}

impl ViewSpec {
    pub fn new(center: LonLat, fov: f64, size: u32) -> Result<Self, ProjectionError> {
        if !(fov > 0.0 && fov < std::f64::consts::PI) {
            return Err(ProjectionError::InvalidView(format!("fov {fov} rad outside (0, π)")));
        }
        if size < 2 {
            return Err(ProjectionError::InvalidView(format!("size {size} below 2")));
        }
        if !(center.lat.abs() < MAX_VIEW_LAT_DEG.to_radians()) {
            return Err(ProjectionError::InvalidView(format!(
                "center latitude {:.4}° beyond ±{MAX_VIEW_LAT_DEG}°",
                center.lat.to_degrees()
            )));
        }
        Ok(Self { center, fov, size })
    }

    pub fn center(&self) -> LonLat {
        self.center
    }
    pub fn fov(&self) -> f64 {
        self.fov
    }
    pub fn size(&self) -> u32 {
        self.size
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        (self.size as f64 / 2.0) / (self.fov / 2.0).tan()
    }

    pub fn frame(&self) -> ViewFrame {
        ViewFrame::new(self)
    }

    /// True when both views describe the same camera within `tol`.
    pub fn approx_eq(&self, other: &ViewSpec, tol: f64) -> bool {
        self.size == other.size
            && (self.fov - other.fov).abs() <= tol
            && (self.center.lat - other.center.lat).abs() <= tol
            && crate::sphere::wrap_angle(self.center.lon - other.center.lon).abs() <= tol
    }
}

/// Precomputed orthonormal camera basis for a [`ViewSpec`].
#[derive(Debug, Clone, Copy)]
pub struct ViewFrame {
    pub forward: Vector3<f64>,
    /// Points toward increasing longitude.
    pub right: Vector3<f64>,
    /// Points toward the north pole side of the view.
    pub up: Vector3<f64>,
    pub focal: f64,
    pub half: f64,
}

impl ViewFrame {
    fn new(vs: &ViewSpec) -> Self {
        let forward = *vs.center.to_dir().as_vector();
        let right = SphereDir::NORTH.as_vector().cross(&forward).normalize();
        let up = forward.cross(&right);
        Self { forward, right, up, focal: vs.focal(), half: vs.size as f64 / 2.0 }
    }

    pub fn project(&self, d: &SphereDir) -> Result<(f64, f64), ProjectionError> {
        let v = d.as_vector();
        let c = self.forward.dot(v);
        if c <= MIN_FORWARD_COS {
            return Err(ProjectionError::BehindView);
        }
        let x = self.right.dot(v) / c;
        let y = self.up.dot(v) / c;
        Ok((self.half + self.focal * x, self.half - self.focal * y))
    }

    pub fn unproject(&self, u: f64, v: f64) -> SphereDir {
        let x = (u - self.half) / self.focal;
        let y = (self.half - v) / self.focal;
        let ray = self.forward + self.right * x + self.up * y;
        SphereDir::from_unit(ray.normalize())
    }
}

pub fn gnomonic_forward(vs: &ViewSpec, d: &SphereDir) -> Result<(f64, f64), ProjectionError> {
    vs.frame().project(d)
}

pub fn gnomonic_inverse(vs: &ViewSpec, u: f64, v: f64) -> SphereDir {
    vs.frame().unproject(u, v)
}
