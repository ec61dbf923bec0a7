//! Synthetic scenes with exact ground truth.
//!
//! A camera sits at the origin, 1.5 m above the floor. A stick figure stands
//! a few metres away and points with a straight arm: the shoulder→fingertip
//! ray passes through the target, so the target lies on the plane through
//! the camera, shoulder and fingertip. The head keypoint is moved onto that
//! plane too, which makes the estimated pointing circle exact at zero noise.
//! Objects are spherical caps; their detector boxes are the exact bounds of
//! the cap outline in each frame.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use image::{Rgb, RgbImage};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use omnipoint::gesture::{person_view_spec, pointing_circle, select_pointing_arm};
use omnipoint::projection::{gnomonic_forward, lonlat_to_equirect_px, wrapped_rect_iou};
use omnipoint::scan::scan_views;
use omnipoint::sphere::{point_at_arc, wrap_angle};
use omnipoint::{
    Arm, DirectedPointing, EquirectGrid, KeypointName, LonLat, LonLatRect, PersonBox, PixelRect, Skeleton,
    SkeletonFrame, SphereDir, ViewSpec,
};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::schema::{
    write_json, DetectionEntry, DetectionPaths, DetectionsFixture, FrameKind, GroundTruth, ImageEntry, Manifest,
    Meta, PersonFixture, SceneEntry, SkeletonFixture, SkeletonPaths, Split, SCHEMA_VERSION,
};

/// Object labels. The first two are the frequent target classes of the
/// `hard` preset.
pub const CATEGORIES: [&str; 22] = [
    "chair", "cup", "bottle", "book", "clock", "vase", "potted plant", "tv", "laptop", "bowl", "teddy bear",
    "umbrella", "backpack", "handbag", "suitcase", "couch", "bed", "dining table", "microwave", "refrigerator",
    "sink", "oven",
];

const CAMERA_HEIGHT: f64 = 1.5;
const KEYPOINT_CONF: f64 = 0.9;
const PERSON_CONF: f64 = 0.95;
const MAX_ATTEMPTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Only the target, exactly on the pointing circle.
    Clean,
    /// Five distractors 5–15° off the circle.
    Distractors,
    /// Target and distractors share the same off-circle spread; the target
    /// is larger and of a frequent category.
    Hard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub width: u32,
    pub distractors: usize,
    /// Range of |perpendicular offset| from the circle for distractors.
    pub distractor_offset_deg: (f64, f64),
    /// Target offset is uniform in `±target_offset_deg`.
    pub target_offset_deg: f64,
    pub target_radius_deg: (f64, f64),
    pub distractor_radius_deg: (f64, f64),
    pub target_categories: Vec<String>,
    pub distractor_categories: Vec<String>,
    /// Minimum arc separation between any two objects.
    pub min_separation_deg: f64,
    /// Uniform jitter added to every detector box coordinate, in pixels.
    pub noise_px: f64,
}

impl SynthParams {
    pub fn preset(p: Preset) -> Self {
        let all: Vec<String> = CATEGORIES.iter().map(|s| s.to_string()).collect();
        let base = SynthParams {
            width: 1024,
            distractors: 0,
            distractor_offset_deg: (5.0, 15.0),
            target_offset_deg: 0.0,
            target_radius_deg: (2.0, 4.5),
            distractor_radius_deg: (2.0, 4.5),
            target_categories: all.clone(),
            distractor_categories: all.clone(),
            min_separation_deg: 25.0,
            noise_px: 0.0,
        };
        match p {
            Preset::Clean => base,
            Preset::Distractors => SynthParams { distractors: 5, ..base },
            Preset::Hard => SynthParams {
                distractors: 5,
                distractor_offset_deg: (0.0, 4.0),
                target_offset_deg: 4.0,
                target_radius_deg: (6.0, 8.0),
                target_categories: all[..2].to_vec(),
                distractor_categories: all[2..].to_vec(),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(PipelineError::InvalidParams(m.to_string()));
        let range_ok = |(a, b): (f64, f64), hi: f64| a.is_finite() && b.is_finite() && 0.0 <= a && a <= b && b <= hi;
        if self.width < 64 || !self.width.is_multiple_of(2) {
            return bad("width must be even and at least 64");
        }
        if !range_ok(self.distractor_offset_deg, 30.0) {
            return bad("distractor offsets must satisfy 0 <= min <= max <= 30");
        }
        if !(0.0..=10.0).contains(&self.target_offset_deg) {
            return bad("target offset must be in [0, 10]");
        }
        if !range_ok(self.target_radius_deg, 12.0) || self.target_radius_deg.0 <= 0.0 {
            return bad("target radius must satisfy 0 < min <= max <= 12");
        }
        if !range_ok(self.distractor_radius_deg, 12.0) || self.distractor_radius_deg.0 <= 0.0 {
            return bad("distractor radius must satisfy 0 < min <= max <= 12");
        }
        if self.target_categories.is_empty() || (self.distractors > 0 && self.distractor_categories.is_empty()) {
            return bad("category lists must not be empty");
        }
        if self.target_categories.iter().chain(&self.distractor_categories).any(|c| c == "person") {
            return bad("objects cannot be persons");
        }
        if !(self.min_separation_deg >= 2.0 * 12.0 && self.min_separation_deg <= 60.0) {
            return bad("min separation must be in [24, 60]");
        }
        if (self.distractors + 1) as f64 * self.min_separation_deg > 250.0 {
            return bad("too many distractors for the available arc");
        }
        if !(self.noise_px >= 0.0 && self.noise_px <= 20.0) {
            return bad("noise must be in [0, 20] px");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthObject {
    pub category: String,
    pub center: SphereDir,
    /// Angular radius of the cap (rad).
    pub radius: f64,
    pub confidence: f64,
}

impl SynthObject {
    /// Bounding lon/lat box of the cap.
    pub fn lonlat_rect(&self) -> LonLatRect {
        let c = self.center.to_lonlat();
        let half_lon = (self.radius.sin() / c.lat.cos()).min(1.0).asin();
        LonLatRect {
            lon_min: wrap_angle(c.lon - half_lon),
            lon_max: wrap_angle(c.lon + half_lon),
            lat_min: c.lat - self.radius,
            lat_max: c.lat + self.radius,
        }
    }
}

/// One generated scene, before it is written out.
#[derive(Debug, Clone)]
pub struct SynthScene {
    pub id: String,
    pub split: Split,
    pub grid: EquirectGrid,
    pub person: PersonBox,
    pub pointing_arm: Arm,
    /// Pointing circle through camera, shoulder and fingertip.
    pub pointing: DirectedPointing,
    pub skeleton_view: Skeleton,
    pub skeleton_equirect: Skeleton,
    /// Index 0 is the target.
    pub objects: Vec<SynthObject>,
    pub views: Vec<ViewSpec>,
    pub view_detections: Vec<Vec<DetectionEntry>>,
    pub equirect_detections: Vec<DetectionEntry>,
    /// The ten keypoints in `KeypointName` order, both feet, then the top
    /// of the head.
    pub body_points: Vec<Vector3<f64>>,
}

impl SynthScene {
    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth { category: self.objects[0].category.clone(), lonlat_rect: self.objects[0].lonlat_rect() }
    }
}

fn dir(v: &Vector3<f64>) -> SphereDir {
    SphereDir::from_vector(*v).expect("synthetic point away from the camera")
}

fn deg(x: f64) -> f64 {
    x.to_radians()
}

/// Exact pixel bounds of a cap in a view, `None` unless the whole cap is in
/// front of the camera and inside the image.
///
/// The cap outline projects to a conic; its axis-aligned tangent lines come
/// from the adjugate (dual) conic.
pub fn cap_view_bbox(vs: &ViewSpec, center: &SphereDir, radius: f64) -> Option<PixelRect> {
    let f = vs.frame();
    let c = center.as_vector();
    if f.forward.dot(c).clamp(-1.0, 1.0).acos() + radius >= deg(89.0) {
        return None;
    }
    let (a1, a2, a3) = (f.right.dot(c), f.up.dot(c), f.forward.dot(c));
    let k = radius.cos().powi(2);
    // (a·x)^2 = k |x|^2 with x = (X, Y, 1) in normalized image coordinates
    let m = Matrix3::new(
        a1 * a1 - k,
        a1 * a2,
        a1 * a3,
        a1 * a2,
        a2 * a2 - k,
        a2 * a3,
        a1 * a3,
        a2 * a3,
        a3 * a3 - k,
    );
    let adj = |i: usize, j: usize| -> f64 {
        // cofactor (j, i) of m
        let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
        let cols: Vec<usize> = (0..3).filter(|&q| q != i).collect();
        let det = m[(rows[0], cols[0])] * m[(rows[1], cols[1])] - m[(rows[0], cols[1])] * m[(rows[1], cols[0])];
        if (i + j).is_multiple_of(2) {
            det
        } else {
            -det
        }
    };
    let (m11, m22, m33, m13, m23) = (adj(0, 0), adj(1, 1), adj(2, 2), adj(0, 2), adj(1, 2));
    let roots = |mii: f64, mi3: f64| -> Option<(f64, f64)> {
        let disc = mi3 * mi3 - m33 * mii;
        if !(disc >= 0.0) || m33 == 0.0 {
            return None;
        }
        let (r1, r2) = ((mi3 - disc.sqrt()) / m33, (mi3 + disc.sqrt()) / m33);
        Some((r1.min(r2), r1.max(r2)))
    };
    let (x0, x1) = roots(m11, m13)?;
    let (y0, y1) = roots(m22, m23)?;
    let r = PixelRect::new(f.half + f.focal * x0, f.half - f.focal * y1, f.half + f.focal * x1, f.half - f.focal * y0);
    let n = vs.size() as f64;
    (r.u0 >= 0.0 && r.v0 >= 0.0 && r.u1 <= n && r.v1 <= n && !r.is_degenerate()).then_some(r)
}

/// Equirect pixel box of a lon/lat box, the inverse of
/// `backproject_equirect_bbox`. `u1` passes `W` for seam-straddling boxes.
pub fn equirect_bbox_of_rect(g: &EquirectGrid, r: &LonLatRect) -> PixelRect {
    let (w, h) = (g.width() as f64, g.height() as f64);
    let mut u0 = (r.lon_min + PI) * w / TAU - 0.5;
    if u0 < 0.0 {
        u0 += w;
    }
    let u1 = u0 + r.lon_span() * g.px_per_rad();
    let v_of = |lat: f64| (FRAC_PI_2 - lat) * h / PI - 0.5;
    PixelRect::new(u0, v_of(r.lat_max), u1, v_of(r.lat_min))
}

fn jitter(r: PixelRect, noise: f64, rng: &mut ChaCha8Rng) -> PixelRect {
    if noise == 0.0 {
        return r;
    }
    let mut j = || rng.random_range(-noise..=noise);
    PixelRect::new(r.u0 + j(), r.v0 + j(), r.u1 + j(), r.v1 + j())
}

struct Body {
    keypoints: Vec<(KeypointName, Vector3<f64>)>,
    /// Every point the person box must cover.
    outline: Vec<Vector3<f64>>,
    shoulder: Vector3<f64>,
    tip: Vector3<f64>,
}

/// Stick figure pointing from `arm`'s shoulder through `target`.
fn build_body(rng: &mut ChaCha8Rng, user_lon: f64, dist: f64, arm: Arm, target: &Vector3<f64>) -> Option<Body> {
    let z = Vector3::z();
    let toward = Vector3::new(user_lon.cos(), user_lon.sin(), 0.0);
    let feet = toward * dist - z * CAMERA_HEIGHT;
    let yaw = rng.random_range(deg(-60.0)..deg(60.0));
    let facing = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), yaw) * (-toward);
    let left = z.cross(&facing);
    let neck = feet + z * 1.45;
    let head = feet + z * 1.62;
    let (ls, rs) = (neck + left * 0.19, neck - left * 0.19);
    let (s, other_s) = match arm {
        Arm::Left => (ls, rs),
        Arm::Right => (rs, ls),
    };
    let u = (target - s).try_normalize(1e-9)?;
    if (target - s).norm() < 1.0 {
        return None;
    }
    let (e, w, t) = (s + u * 0.3, s + u * 0.55, s + u * 0.65);
    // other arm: upper arm hanging, forearm level and across the line of sight
    let oe = other_s - z * 0.3;
    let mut perp = z.cross(&oe).try_normalize(1e-9)?;
    if perp.dot(&(other_s - neck)) < 0.0 {
        perp = -perp;
    }
    let (ow, ot) = (oe + perp * 0.25, oe + perp * 0.32);

    let n = s.cross(&t).try_normalize(1e-9)?;
    let head_on_plane = head - n * n.dot(&head);
    let arm_points = |a: Arm| if a == arm { [e, w, t] } else { [oe, ow, ot] };
    let [le, lw, lt] = arm_points(Arm::Left);
    let [re, rw, rt] = arm_points(Arm::Right);
    use KeypointName::*;
    let keypoints = vec![
        (Head, head_on_plane),
        (Neck, neck),
        (LShoulder, ls),
        (RShoulder, rs),
        (LElbow, le),
        (RElbow, re),
        (LWrist, lw),
        (RWrist, rw),
        (LFingertip, lt),
        (RFingertip, rt),
    ];
    let mut outline: Vec<Vector3<f64>> = keypoints.iter().map(|(_, p)| *p).collect();
    outline.extend([feet + left * 0.2, feet - left * 0.2, feet + z * 1.75]);
    Some(Body { keypoints, outline, shoulder: s, tip: t })
}

fn lonlat_bounds_around(points: &[Vector3<f64>], lon0: f64, margin: f64) -> LonLatRect {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        let ll = dir(p).to_lonlat();
        let dl = wrap_angle(ll.lon - lon0);
        lo = (lo.0.min(dl), lo.1.min(ll.lat));
        hi = (hi.0.max(dl), hi.1.max(ll.lat));
    }
    LonLatRect {
        lon_min: wrap_angle(lon0 + lo.0 - margin),
        lon_max: wrap_angle(lon0 + hi.0 + margin),
        lat_min: lo.1 - margin,
        lat_max: hi.1 + margin,
    }
}

fn view_skeleton(vs: &ViewSpec, body: &Body) -> Option<Skeleton> {
    let mut s = Skeleton::new(SkeletonFrame::View { view: *vs });
    for (name, p) in &body.keypoints {
        let (u, v) = gnomonic_forward(vs, &dir(p)).ok()?;
        s = s.with(*name, u, v, KEYPOINT_CONF);
    }
    s.validate().ok()?;
    Some(s)
}

fn equirect_skeleton(g: &EquirectGrid, body: &Body) -> Option<Skeleton> {
    let mut s = Skeleton::new(SkeletonFrame::Equirect { grid: *g });
    for (name, p) in &body.keypoints {
        let (u, v) = lonlat_to_equirect_px(g, dir(p).to_lonlat());
        s = s.with(*name, u, v, KEYPOINT_CONF);
    }
    s.validate().ok()?;
    Some(s)
}

/// Moves `p` by `offset` radians off the circle with normal `n`.
fn off_circle(p: &SphereDir, n: &SphereDir, offset: f64) -> SphereDir {
    let v = p.as_vector() * offset.cos() + n.as_vector() * offset.sin();
    dir(&v)
}

fn visible_somewhere(views: &[ViewSpec], o: &SynthObject) -> bool {
    views.iter().any(|vs| cap_view_bbox(vs, &o.center, o.radius).is_some())
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &'a [String]) -> &'a String {
    &items[rng.random_range(0..items.len())]
}

fn try_scene(rng: &mut ChaCha8Rng, params: &SynthParams, cfg: &PipelineConfig, grid: &EquirectGrid) -> Option<SynthScene> {
    let user_lon = rng.random_range(deg(-150.0)..deg(150.0));
    let dist = rng.random_range(2.0..3.2);
    let arm = if rng.random_bool(0.5) { Arm::Left } else { Arm::Right };
    let target_lon = user_lon + rng.random_range(deg(30.0)..deg(330.0));
    let target_lat = rng.random_range(deg(-40.0)..deg(40.0));
    let target_range = rng.random_range(1.5..5.0);
    let target_point = LonLat { lon: wrap_angle(target_lon), lat: target_lat }.to_dir().as_vector() * target_range;
    let body = build_body(rng, user_lon, dist, arm, &target_point)?;

    let person_rect = lonlat_bounds_around(&body.outline, user_lon, 0.02);
    let person = PersonBox::new(equirect_bbox_of_rect(grid, &person_rect), PERSON_CONF).ok()?;
    let gcfg = cfg.gesture();
    let person_view = person_view_spec(grid, &person, &gcfg).ok()?;
    let skeleton_view = view_skeleton(&person_view, &body)?;
    let skeleton_equirect = equirect_skeleton(grid, &body)?;

    // the geometry must read back as the intended gesture in both frames
    let true_normal = dir(&body.shoulder.cross(&body.tip));
    let mut pointing = None;
    for s in [&skeleton_view, &skeleton_equirect] {
        if select_pointing_arm(s, &gcfg).ok()? != arm {
            return None;
        }
        let dp = pointing_circle(s, arm, &gcfg).ok()?;
        if dp.normal().dot(&true_normal).abs() < 1.0 - 1e-9 {
            return None;
        }
        pointing.get_or_insert(dp);
    }
    let pointing = pointing?;
    let target_dir = dir(&target_point);
    let target_arc = pointing.arc_position(&target_dir);
    if !(deg(20.0)..deg(180.0)).contains(&target_arc) {
        return None;
    }
    let views = scan_views(&pointing, &cfg.scan()).ok()?;
    if views.iter().any(|v| v.center().lat.abs() > deg(85.0)) {
        return None;
    }

    let n = *pointing.normal();
    let max_lat = deg(60.0);
    let target_offset = if params.target_offset_deg > 0.0 {
        deg(rng.random_range(-params.target_offset_deg..=params.target_offset_deg))
    } else {
        0.0
    };
    let target = SynthObject {
        category: pick(rng, &params.target_categories).clone(),
        center: off_circle(&target_dir, &n, target_offset),
        radius: deg(rng.random_range(params.target_radius_deg.0..=params.target_radius_deg.1)),
        confidence: rng.random_range(0.5..0.95),
    };
    if target.center.to_lonlat().lat.abs() > max_lat || !visible_somewhere(&views, &target) {
        return None;
    }
    let mut arcs = vec![target_arc];
    let mut objects = vec![target];
    let sep = deg(params.min_separation_deg);
    while objects.len() <= params.distractors {
        let mut placed = false;
        for _ in 0..200 {
            let arc = rng.random_range(deg(15.0)..deg(290.0));
            let (lo, hi) = params.distractor_offset_deg;
            let mag = if hi > 0.0 { rng.random_range(lo..=hi) } else { 0.0 };
            let offset = deg(if rng.random_bool(0.5) { mag } else { -mag });
            let o = SynthObject {
                category: pick(rng, &params.distractor_categories).clone(),
                center: off_circle(&point_at_arc(&pointing, arc), &n, offset),
                radius: deg(rng.random_range(params.distractor_radius_deg.0..=params.distractor_radius_deg.1)),
                confidence: rng.random_range(0.5..0.95),
            };
            if arcs.iter().any(|a| (a - arc).abs() < sep)
                || o.center.to_lonlat().lat.abs() > max_lat
                || !visible_somewhere(&views, &o)
            {
                continue;
            }
            arcs.push(arc);
            objects.push(o);
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }

    let mut view_detections = Vec::with_capacity(views.len());
    for vs in &views {
        let mut dets = Vec::new();
        for o in &objects {
            if let Some(b) = cap_view_bbox(vs, &o.center, o.radius) {
                let bbox = jitter(b, params.noise_px, rng);
                dets.push(DetectionEntry { category: o.category.clone(), bbox, confidence: o.confidence });
            }
        }
        // the user shows up as a person wherever the whole figure is in front
        let proj: Option<Vec<(f64, f64)>> =
            body.outline.iter().map(|p| gnomonic_forward(vs, &dir(p)).ok()).collect();
        if let Some(pts) = proj {
            let n = vs.size() as f64;
            let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
            for (u, v) in pts {
                lo = (lo.0.min(u), lo.1.min(v));
                hi = (hi.0.max(u), hi.1.max(v));
            }
            if let Some(bbox) = PixelRect::new(lo.0, lo.1, hi.0, hi.1).clipped(n, n) {
                dets.push(DetectionEntry { category: "person".into(), bbox, confidence: PERSON_CONF });
            }
        }
        view_detections.push(dets);
    }
    let mut equirect_detections: Vec<DetectionEntry> = objects
        .iter()
        .map(|o| DetectionEntry {
            category: o.category.clone(),
            bbox: jitter(equirect_bbox_of_rect(grid, &o.lonlat_rect()), params.noise_px, rng),
            confidence: o.confidence,
        })
        .collect();
    equirect_detections.push(DetectionEntry { category: "person".into(), bbox: person.bbox, confidence: PERSON_CONF });

    // objects must not overlap each other in lon/lat, or ground-truth matching gets ambiguous
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            if wrapped_rect_iou(&a.lonlat_rect(), &b.lonlat_rect()) > 0.0 {
                return None;
            }
        }
    }

    Some(SynthScene {
        id: String::new(),
        split: Split::Test,
        grid: *grid,
        person,
        pointing_arm: arm,
        pointing,
        skeleton_view,
        skeleton_equirect,
        objects,
        views,
        view_detections,
        equirect_detections,
        body_points: body.outline,
    })
}

/// Scene `index` of the stream selected by `seed`. Each scene draws from its
/// own ChaCha stream, so scenes can be generated in any order.
pub fn synth_scene(seed: u64, index: u64, params: &SynthParams, cfg: &PipelineConfig) -> Result<SynthScene> {
    params.validate()?;
    cfg.validate()?;
    let grid = EquirectGrid::new(params.width, params.width / 2)
        .map_err(|e| PipelineError::InvalidParams(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(mut s) = try_scene(&mut rng, params, cfg, &grid) {
            s.id = format!("synth_{index:04}");
            return Ok(s);
        }
    }
    Err(PipelineError::InvalidParams(format!("no valid scene after {MAX_ATTEMPTS} attempts")))
}

fn category_color(cat: &str) -> Rgb<u8> {
    let i = CATEGORIES.iter().position(|c| *c == cat).unwrap_or(0) as f64;
    let h = i * 0.618_033_988_75 % 1.0;
    let ch = |k: f64| (((h + k) * TAU).sin() * 90.0 + 150.0) as u8;
    Rgb([ch(0.0), ch(1.0 / 3.0), ch(2.0 / 3.0)])
}

/// Limbs as (from, to, radius in metres), indexing `SynthScene::body_points`.
fn limbs(points: &[Vector3<f64>]) -> Vec<(Vector3<f64>, Vector3<f64>, f64)> {
    let p = |i: usize| points[i];
    let z = Vector3::z();
    let (hip_l, hip_r) = (p(10) + z * 0.9, p(11) + z * 0.9);
    let hip = (hip_l + hip_r) / 2.0;
    let mut out = vec![(p(1), p(12) - z * 0.1, 0.1), (p(2), p(3), 0.06), (p(1), hip, 0.12), (hip_l, hip_r, 0.08)];
    for (a, b) in [(2, 4), (4, 6), (6, 8), (3, 5), (5, 7), (7, 9)] {
        out.push((p(a), p(b), 0.045));
    }
    out.push((hip_l, p(10), 0.07));
    out.push((hip_r, p(11), 0.07));
    out
}

fn near_limb(d: &SphereDir, limbs: &[(Vector3<f64>, Vector3<f64>, f64)]) -> bool {
    let v = d.as_vector();
    limbs.iter().any(|(a, b, r)| {
        (0..=16).any(|k| {
            let q = a + (b - a) * (k as f64 / 16.0);
            let n = q.norm();
            v.dot(&q) / n > (r / n).atan().cos()
        })
    })
}

/// Flat-shaded panorama: sky/floor gradient, the stick figure and the caps.
pub fn render_scene(s: &SynthScene) -> RgbImage {
    let (w, h) = (s.grid.width(), s.grid.height());
    let person = s.person.lonlat_rect(&s.grid);
    let limbs = limbs(&s.body_points);
    let mut img = RgbImage::new(w, h);
    let rows: Vec<Vec<Rgb<u8>>> = (0..h)
        .into_par_iter()
        .map(|v| {
            (0..w)
                .map(|u| {
                    let ll = omnipoint::projection::equirect_px_to_lonlat_wrapped(&s.grid, u as f64, v as f64);
                    let d = ll.to_dir();
                    if let Some(o) = s.objects.iter().find(|o| o.center.angle_to(&d) <= o.radius) {
                        return category_color(&o.category);
                    }
                    if person.contains(ll, 0.0) && near_limb(&d, &limbs) {
                        return Rgb([70, 60, 55]);
                    }
                    let t = (ll.lat / FRAC_PI_2 + 1.0) / 2.0;
                    if ll.lat > 0.0 {
                        Rgb([(120.0 + 60.0 * t) as u8, (150.0 + 50.0 * t) as u8, 210])
                    } else {
                        Rgb([(90.0 + 60.0 * t) as u8, (80.0 + 50.0 * t) as u8, (60.0 + 40.0 * t) as u8])
                    }
                })
                .collect()
        })
        .collect();
    for (v, row) in rows.into_iter().enumerate() {
        for (u, px) in row.into_iter().enumerate() {
            img.put_pixel(u as u32, v as u32, px);
        }
    }
    img
}

fn meta(seed: u64, index: u64) -> Meta {
    let mut m = Meta::new();
    m.insert("generator".into(), "omnipoint synth".into());
    m.insert("seed".into(), seed.into());
    m.insert("index".into(), index.into());
    m
}

/// Writes one scene's fixtures under `root/<id>/` and returns its manifest entry.
pub fn write_scene(root: &Path, s: &SynthScene, seed: u64, index: u64, png: bool) -> Result<SceneEntry> {
    let rel = |name: &str| format!("{}/{name}", s.id);
    let m = meta(seed, index);
    write_json(
        &root.join(rel("person.json")),
        &PersonFixture { schema_version: SCHEMA_VERSION, boxes: vec![s.person], meta: m.clone() },
    )?;
    for (name, sk) in [("skeleton_view.json", &s.skeleton_view), ("skeleton_equirect.json", &s.skeleton_equirect)] {
        let mut f = SkeletonFixture::from_skeleton(sk);
        f.meta = m.clone();
        write_json(&root.join(rel(name)), &f)?;
    }
    write_json(
        &root.join(rel("detections_equirect.json")),
        &DetectionsFixture {
            schema_version: SCHEMA_VERSION,
            view_index: None,
            view: None,
            frame: Some(SkeletonFrame::Equirect { grid: s.grid }),
            detections: s.equirect_detections.clone(),
            meta: m.clone(),
        },
    )?;
    let mut view_files = Vec::with_capacity(s.views.len());
    for (k, (vs, dets)) in s.views.iter().zip(&s.view_detections).enumerate() {
        let name = rel(&format!("views/detections_{k:02}.json"));
        write_json(
            &root.join(&name),
            &DetectionsFixture {
                schema_version: SCHEMA_VERSION,
                view_index: Some(k),
                view: Some(*vs),
                frame: None,
                detections: dets.clone(),
                meta: m.clone(),
            },
        )?;
        view_files.push(name);
    }
    let image_path = if png {
        let name = rel("equirect.png");
        let path = root.join(&name);
        render_scene(s).save(&path).map_err(|source| PipelineError::Image { path, source })?;
        Some(name)
    } else {
        None
    };
    Ok(SceneEntry {
        id: s.id.clone(),
        split: s.split,
        image: ImageEntry { path: image_path, width: s.grid.width(), height: s.grid.height() },
        person: rel("person.json"),
        skeleton: SkeletonPaths { view: Some(rel("skeleton_view.json")), equirect: Some(rel("skeleton_equirect.json")) },
        detections: DetectionPaths {
            equirect: Some(rel("detections_equirect.json")),
            views: BTreeMap::from([(FrameKind::View, view_files)]),
        },
        ground_truth: Some(s.ground_truth()),
    })
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub params: SynthParams,
    pub seed: u64,
    pub train: usize,
    pub test: usize,
    pub png: bool,
}

/// Generates `train + test` scenes into `root` and writes `root/manifest.json`.
/// The first `train` indices form the train split.
pub fn synth_dataset(root: &Path, opts: &SynthOptions, cfg: &PipelineConfig) -> Result<Manifest> {
    let total = opts.train + opts.test;
    if total == 0 {
        return Err(PipelineError::InvalidParams("scene count must be positive".into()));
    }
    let scenes: Vec<SynthScene> = (0..total as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = synth_scene(opts.seed, i, &opts.params, cfg)?;
            s.split = if (i as usize) < opts.train { Split::Train } else { Split::Test };
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let entries = scenes
        .par_iter()
        .enumerate()
        .map(|(i, s)| write_scene(root, s, opts.seed, i as u64, opts.png))
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { schema_version: SCHEMA_VERSION, scenes: entries };
    write_json(&root.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_bbox_is_tight_around_sampled_outline() {
        let vs = ViewSpec::new(LonLat::from_degrees(20.0, 30.0).unwrap(), deg(60.0), 640).unwrap();
        let center = LonLat::from_degrees(35.0, 42.0).unwrap().to_dir();
        let rho = deg(5.0);
        let b = cap_view_bbox(&vs, &center, rho).unwrap();
        // outline samples: rotate a point at distance rho around the center
        let c = center.as_vector();
        let e1 = c.cross(&Vector3::z()).normalize();
        let e2 = c.cross(&e1);
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for i in 0..20000 {
            let t = TAU * i as f64 / 20000.0;
            let p = c * rho.cos() + (e1 * t.cos() + e2 * t.sin()) * rho.sin();
            let (u, v) = gnomonic_forward(&vs, &dir(&p)).unwrap();
            lo = (lo.0.min(u), lo.1.min(v));
            hi = (hi.0.max(u), hi.1.max(v));
        }
        for (exact, sampled) in [(b.u0, lo.0), (b.v0, lo.1), (b.u1, hi.0), (b.v1, hi.1)] {
            assert!((exact - sampled).abs() < 1e-3, "{exact} vs {sampled}");
        }
    }

    #[test]
    fn cap_outside_view_has_no_box() {
        let vs = ViewSpec::new(LonLat::from_degrees(0.0, 0.0).unwrap(), deg(60.0), 640).unwrap();
        let far = LonLat::from_degrees(29.0, 0.0).unwrap().to_dir();
        assert!(cap_view_bbox(&vs, &far, deg(3.0)).is_none());
        let behind = LonLat::from_degrees(180.0, 0.0).unwrap().to_dir();
        assert!(cap_view_bbox(&vs, &behind, deg(3.0)).is_none());
    }

    #[test]
    fn equirect_box_round_trips_the_cap_rect() {
        let g = EquirectGrid::new(1024, 512).unwrap();
        for lon in [-179.0, -20.0, 0.0, 178.5] {
            let o = SynthObject {
                category: "cup".into(),
                center: LonLat::from_degrees(lon, 25.0).unwrap().to_dir(),
                radius: deg(4.0),
                confidence: 0.5,
            };
            let r = o.lonlat_rect();
            let b = equirect_bbox_of_rect(&g, &r);
            let fp = omnipoint::projection::backproject_equirect_bbox(&g, &b, 4).unwrap();
            assert!((wrapped_rect_iou(&fp.lonlat_rect, &r) - 1.0).abs() < 1e-9);
            assert!(fp.center.angle_to(&o.center) < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_scene() {
        let cfg = PipelineConfig::default();
        let p = SynthParams::preset(Preset::Distractors);
        let a = synth_scene(7, 3, &p, &cfg).unwrap();
        let b = synth_scene(7, 3, &p, &cfg).unwrap();
        assert_eq!(a.objects, b.objects);
        assert_eq!(a.skeleton_view, b.skeleton_view);
        assert_eq!(a.view_detections, b.view_detections);
        let c = synth_scene(7, 4, &p, &cfg).unwrap();
        assert_ne!(a.objects, c.objects);
    }

    #[test]
    fn target_sits_on_the_pointing_circle() {
        let cfg = PipelineConfig::default();
        let s = synth_scene(1, 0, &SynthParams::preset(Preset::Clean), &cfg).unwrap();
        assert!(s.pointing.normal().dot(&s.objects[0].center).abs() < 1e-12);
        assert_eq!(s.objects.len(), 1);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = SynthParams::preset(Preset::Clean);
        p.target_categories = vec!["person".into()];
        assert!(matches!(p.validate(), Err(PipelineError::InvalidParams(_))));
        let p = SynthParams { distractors: 20, ..SynthParams::preset(Preset::Clean) };
        assert!(p.validate().is_err());
    }
}
