//! User localization, pointing-arm selection and the pointing great circle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::projection::{
    equirect_px_to_lonlat, equirect_px_to_lonlat_wrapped, EquirectGrid, LonLatRect, PixelRect,
    ProjectionError, ViewSpec, MAX_VIEW_LAT_DEG,
};
use crate::sphere::{great_circle_from_two, DirectedPointing, GreatCircle, LonLat, SphereDir, SphereError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GestureError {
    #[error("missing or low-confidence keypoints: {0:?}")]
    MissingKeypoints(Vec<KeypointName>),
    #[error("no arm has the keypoints needed to judge pointing")]
    NoArmDetected,
    #[error("{0:?} arm keypoints coincide, elbow angle undefined")]
    DegenerateArm(Arm),
    #[error("invalid person box: {0}")]
    InvalidPersonBox(String),
    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeypointName {
    Head,
    Neck,
    LShoulder,
    RShoulder,
    LElbow,
    RElbow,
    LWrist,
    RWrist,
    LFingertip,
    RFingertip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub fn shoulder(self) -> KeypointName {
        match self {
            Arm::Left => KeypointName::LShoulder,
            Arm::Right => KeypointName::RShoulder,
        }
    }
    pub fn elbow(self) -> KeypointName {
        match self {
            Arm::Left => KeypointName::LElbow,
            Arm::Right => KeypointName::RElbow,
        }
    }
    pub fn wrist(self) -> KeypointName {
        match self {
            Arm::Left => KeypointName::LWrist,
            Arm::Right => KeypointName::RWrist,
        }
    }
    pub fn fingertip(self) -> KeypointName {
        match self {
            Arm::Left => KeypointName::LFingertip,
            Arm::Right => KeypointName::RFingertip,
        }
    }
    pub fn other(self) -> Arm {
        match self {
            Arm::Left => Arm::Right,
            Arm::Right => Arm::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub u: f64,
    pub v: f64,
    pub confidence: f64,
}

/// Coordinate frame a skeleton's pixels live in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SkeletonFrame {
    /// Perspective view rendered around the user.
    View { view: ViewSpec },
    /// Raw equirect panorama (no projection before pose estimation).
    Equirect { grid: EquirectGrid },
}

impl SkeletonFrame {
    fn bounds(&self) -> (f64, f64) {
        match self {
            SkeletonFrame::View { view } => (view.size() as f64, view.size() as f64),
            SkeletonFrame::Equirect { grid } => (grid.width() as f64, grid.height() as f64),
        }
    }

    /// Sphere direction of a pixel in this frame.
    pub fn to_dir(&self, u: f64, v: f64) -> Result<SphereDir, ProjectionError> {
        match self {
            SkeletonFrame::View { view } => Ok(view.frame().unproject(u, v)),
            SkeletonFrame::Equirect { grid } => Ok(equirect_px_to_lonlat(grid, u, v)?.to_dir()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub keypoints: BTreeMap<KeypointName, Keypoint>,
    pub frame: SkeletonFrame,
}

impl Skeleton {
    pub fn new(frame: SkeletonFrame) -> Self {
        Self { keypoints: BTreeMap::new(), frame }
    }

    pub fn with(mut self, name: KeypointName, u: f64, v: f64, confidence: f64) -> Self {
        self.keypoints.insert(name, Keypoint { u, v, confidence });
        self
    }

    /// Confidences in `[0, 1]` and coordinates inside the frame.
    pub fn validate(&self) -> Result<(), GestureError> {
        let (w, h) = self.frame.bounds();
        for (name, kp) in &self.keypoints {
            if !(0.0..=1.0).contains(&kp.confidence) {
                return Err(GestureError::InvalidSkeleton(format!(
                    "{name:?} confidence {} outside [0, 1]",
                    kp.confidence
                )));
            }
            if !(kp.u >= 0.0 && kp.u <= w && kp.v >= 0.0 && kp.v <= h) {
                return Err(GestureError::InvalidSkeleton(format!(
                    "{name:?} at ({}, {}) outside the {w}x{h} frame",
                    kp.u, kp.v
                )));
            }
        }
        Ok(())
    }

    /// Keypoint if present with at least `min_conf`.
    pub fn get(&self, name: KeypointName, min_conf: f64) -> Option<&Keypoint> {
        self.keypoints.get(&name).filter(|k| k.confidence >= min_conf)
    }

    /// Fingertip, or the wrist when the pose model has no fingertips.
    pub fn tip(&self, arm: Arm, min_conf: f64) -> Option<&Keypoint> {
        self.get(arm.fingertip(), min_conf).or_else(|| self.get(arm.wrist(), min_conf))
    }

    fn require(&self, names: &[KeypointName], min_conf: f64) -> Result<Vec<&Keypoint>, GestureError> {
        let missing: Vec<KeypointName> =
            names.iter().copied().filter(|n| self.get(*n, min_conf).is_none()).collect();
        if !missing.is_empty() {
            return Err(GestureError::MissingKeypoints(missing));
        }
        Ok(names.iter().map(|n| &self.keypoints[n]).collect())
    }
}

/// Person bounding box on the equirect image, `u_max` may pass `W` when the
/// box straddles the seam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonBox {
    pub bbox: PixelRect,
    pub confidence: f64,
}

impl PersonBox {
    pub fn new(bbox: PixelRect, confidence: f64) -> Result<Self, GestureError> {
        let pb = Self { bbox, confidence };
        pb.validate()?;
        Ok(pb)
    }

    pub fn validate(&self) -> Result<(), GestureError> {
        if self.bbox.is_degenerate() {
            return Err(GestureError::InvalidPersonBox(format!("degenerate box {:?}", self.bbox)));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(GestureError::InvalidPersonBox(format!("confidence {}", self.confidence)));
        }
        Ok(())
    }

    /// Longitude/latitude box covered on the sphere.
    pub fn lonlat_rect(&self, g: &EquirectGrid) -> LonLatRect {
        let b = &self.bbox;
        let top = equirect_px_to_lonlat_wrapped(g, b.u0, b.v0);
        let bottom = equirect_px_to_lonlat_wrapped(g, b.u0, b.v1);
        if b.width() >= g.width() as f64 {
            return LonLatRect::full_band(bottom.lat, top.lat);
        }
        let lon_min = equirect_px_to_lonlat_wrapped(g, b.u0, (b.v0 + b.v1) / 2.0).lon;
        let lon_max = crate::sphere::wrap_angle(lon_min + b.width() / g.px_per_rad());
        LonLatRect { lon_min, lon_max, lat_min: bottom.lat, lat_max: top.lat }
    }
}

/// Highest-confidence box; earliest wins ties.
pub fn primary_person(boxes: &[PersonBox]) -> Option<&PersonBox> {
    boxes.iter().fold(None, |best: Option<&PersonBox>, b| match best {
        Some(cur) if cur.confidence >= b.confidence => Some(cur),
        _ => Some(b),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureConfig {
    /// Minimum keypoint confidence.
    pub kp_min: f64,
    /// Elbow angle (degrees) at or above which an arm counts as extended.
    pub extended_deg: f64,
    /// Person view fov = clamp(margin × box angular extent, min, max).
    pub person_margin: f64,
    pub person_fov_min_deg: f64,
    pub person_fov_max_deg: f64,
    pub view_size: u32,
}

impl Default for GestureConfig {
    fn default() -> Self {
        Self {
            kp_min: 0.1,
            extended_deg: 150.0,
            person_margin: 1.5,
            person_fov_min_deg: 30.0,
            person_fov_max_deg: 120.0,
            view_size: 640,
        }
    }
}

pub fn user_lonlat_from_bbox(g: &EquirectGrid, pb: &PersonBox) -> Result<LonLat, GestureError> {
    let (u, v) = pb.bbox.center();
    let u = if u >= g.width() as f64 { u - g.width() as f64 } else { u };
    Ok(equirect_px_to_lonlat(g, u, v)?)
}

/// Perspective view framing the user for pose estimation.
pub fn person_view_spec(g: &EquirectGrid, pb: &PersonBox, cfg: &GestureConfig) -> Result<ViewSpec, GestureError> {
    let center = user_lonlat_from_bbox(g, pb)?;
    let extent = (pb.bbox.width() / g.px_per_rad()).max(pb.bbox.height() / g.px_per_rad());
    let fov = (cfg.person_margin * extent)
        .clamp(cfg.person_fov_min_deg.to_radians(), cfg.person_fov_max_deg.to_radians());
    let max_lat = MAX_VIEW_LAT_DEG.to_radians() - 1e-9;
    let center = LonLat { lon: center.lon, lat: center.lat.clamp(-max_lat, max_lat) };
    Ok(ViewSpec::new(center, fov, cfg.view_size)?)
}

/// Interior elbow angle in degrees, measured in frame pixels.
pub fn elbow_angle(s: &Skeleton, arm: Arm, cfg: &GestureConfig) -> Result<f64, GestureError> {
    let kp = s.require(&[arm.shoulder(), arm.elbow(), arm.wrist()], cfg.kp_min)?;
    let (sh, el, wr) = (kp[0], kp[1], kp[2]);
    let a = (sh.u - el.u, sh.v - el.v);
    let b = (wr.u - el.u, wr.v - el.v);
    let (na, nb) = (a.0.hypot(a.1), b.0.hypot(b.1));
    if na == 0.0 || nb == 0.0 {
        return Err(GestureError::DegenerateArm(arm));
    }
    let cross = a.0 * b.1 - a.1 * b.0;
    let dot = a.0 * b.0 + a.1 * b.1;
    Ok(cross.abs().atan2(dot).to_degrees())
}

/// Picks the pointing arm: the extended arm whose tip is highest in the
/// frame, else the more extended arm.
pub fn select_pointing_arm(s: &Skeleton, cfg: &GestureConfig) -> Result<Arm, GestureError> {
    let mut valid: Vec<(Arm, f64, f64)> = Vec::with_capacity(2);
    for arm in [Arm::Right, Arm::Left] {
        if let (Ok(angle), Some(tip)) = (elbow_angle(s, arm, cfg), s.tip(arm, cfg.kp_min)) {
            valid.push((arm, angle, tip.v));
        }
    }
    let extended: Vec<&(Arm, f64, f64)> = valid.iter().filter(|a| a.1 >= cfg.extended_deg).collect();
    let pick = if extended.is_empty() {
        valid.iter().max_by(|a, b| a.1.total_cmp(&b.1))
    } else {
        extended.into_iter().min_by(|a, b| a.2.total_cmp(&b.2))
    };
    pick.map(|a| a.0).ok_or(GestureError::NoArmDetected)
}

/// Pointing circle from the sphere directions of shoulder, head and tip.
///
/// Each origin→tip pair spans a great circle whose normal is oriented so the
/// circle runs on past the tip; the two normals are averaged.
pub fn pointing_from_dirs(
    shoulder: SphereDir,
    head: SphereDir,
    tip: SphereDir,
) -> Result<DirectedPointing, GestureError> {
    let n1 = great_circle_from_two(shoulder, tip)?.normal;
    let n2 = great_circle_from_two(head, tip)?.normal;
    let normal = SphereDir::from_vector(n1.as_vector() + n2.as_vector())
        .map_err(|_| SphereError::DegenerateCircle)?;
    let n = normal.as_vector();
    let t = tip.as_vector();
    let anchor = SphereDir::from_vector(t - n * n.dot(t)).map_err(|_| SphereError::DegenerateCircle)?;
    Ok(DirectedPointing::new(GreatCircle::new(normal), anchor)?)
}

/// Directed pointing circle of `arm`, back-projecting keypoints through the
/// skeleton's frame.
pub fn pointing_circle(s: &Skeleton, arm: Arm, cfg: &GestureConfig) -> Result<DirectedPointing, GestureError> {
    let tip_name = if s.get(arm.fingertip(), cfg.kp_min).is_some() { arm.fingertip() } else { arm.wrist() };
    let kp = s.require(&[arm.shoulder(), KeypointName::Head, tip_name], cfg.kp_min)?;
    let dir = |k: &Keypoint| s.frame.to_dir(k.u, k.v);
    pointing_from_dirs(dir(kp[0])?, dir(kp[1])?, dir(kp[2])?)
}
