//! Perspective views along the pointing circle, candidate construction from
//! per-view detections, and the five selection features.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::projection::{
    backproject_bbox, backproject_equirect_bbox, lonlat_to_equirect_px, wrapped_rect_iou,
    EquirectGrid, LonLatRect, PixelRect, ProjectionError, SphericalFootprint, ViewSpec,
    MAX_VIEW_LAT_DEG,
};
use crate::sphere::{
    angular_distance_to_circle, point_at_arc, wrap_angle, DirectedPointing, GreatCircle, LonLat,
    SphereDir, MERIDIAN_NZ,
};

/// Category label the person-exclusion rule applies to.
pub const PERSON_CATEGORY: &str = "person";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error("detection references view {index} but only {count} views exist")]
    BadViewIndex { index: usize, count: usize },
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
    #[error("invalid scan config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepping {
    /// Equal arc-length steps along the circle.
    #[default]
    Arc,
    /// Equal longitude steps; falls back to arc steps on meridian circles.
    Longitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaUnit {
    #[default]
    Steradian,
    /// Pixel area of the footprint's lon/lat box on the equirect image.
    Pixel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub step_deg: f64,
    pub fov_deg: f64,
    pub view_size: u32,
    pub num_views: usize,
    pub stepping: Stepping,
    pub dedup_iou: f64,
    pub samples_per_edge: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            step_deg: 30.0,
            fov_deg: 60.0,
            view_size: 640,
            num_views: 11,
            stepping: Stepping::Arc,
            dedup_iou: 0.5,
            samples_per_edge: crate::projection::DEFAULT_SAMPLES_PER_EDGE,
        }
    }
}

/// One object detector output, in the pixel frame of view `view_index`
/// (or of the equirect image when detections were run without projection).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub category: String,
    pub bbox: PixelRect,
    pub confidence: f64,
    pub view_index: usize,
}

impl Detection {
    pub fn validate(&self) -> Result<(), ScanError> {
        if self.bbox.is_degenerate() {
            return Err(ScanError::InvalidDetection(format!("{}: degenerate box", self.category)));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(ScanError::InvalidDetection(format!(
                "{}: confidence {} outside [0, 1]",
                self.category, self.confidence
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Angular distance to the pointing circle (rad).
    pub d: f64,
    /// Category frequency `q / S`.
    pub l: f64,
    /// Detection confidence.
    pub c: f64,
    /// Footprint area (sr, or equirect px in pixel mode).
    pub a: f64,
    /// Longitude distance to the user (rad).
    pub h: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 5] = ["d", "l", "c", "a", "h"];

    pub fn to_array(&self) -> [f64; 5] {
        [self.d, self.l, self.c, self.a, self.h]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self { d: a[0], l: a[1], c: a[2], a: a[3], h: a[4] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: usize,
    pub category: String,
    pub center: SphereDir,
    pub footprint: SphericalFootprint,
    pub confidence: f64,
    pub features: FeatureVector,
    /// Distinct views the merged detections came from, ascending.
    pub source_views: Vec<usize>,
    /// The winning detection.
    pub detection: Detection,
}

fn arc_view_centers(dp: &DirectedPointing, step: f64, k: usize) -> Vec<SphereDir> {
    (0..k).map(|i| point_at_arc(dp, i as f64 * step)).collect()
}

fn longitude_view_centers(dp: &DirectedPointing, step: f64, k: usize) -> Vec<SphereDir> {
    let nz = dp.normal().z();
    let sign = nz.signum();
    let mut thetas = vec![0.0];
    // longitude is monotone along a non-meridian circle and advances by
    // exactly π over half a turn, so each step has a unique solution in
    // (θ, θ + π]
    for _ in 1..k {
        let prev = *thetas.last().expect("non-empty");
        let lon_prev = point_at_arc(dp, prev).to_lonlat().lon;
        let advance = |t: f64| sign * wrap_angle(point_at_arc(dp, t).to_lonlat().lon - lon_prev);
        let (mut lo, mut hi) = (prev, prev + PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let adv = advance(mid);
            // near θ + π the wrapped advance may read as -π
            if adv >= 0.0 && adv < step {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        thetas.push(0.5 * (lo + hi));
    }
    thetas.into_iter().map(|t| point_at_arc(dp, t)).collect()
}

/// Views along the pointing circle, view 0 centered on the anchor.
///
/// Centers closer to a pole than the view frame allows are moved to
/// ±89.9° latitude, keeping their longitude.
pub fn scan_views(dp: &DirectedPointing, cfg: &ScanConfig) -> Result<Vec<ViewSpec>, ScanError> {
    if !(cfg.step_deg > 0.0) || !(cfg.fov_deg > 0.0 && cfg.fov_deg < 180.0) {
        return Err(ScanError::InvalidConfig(format!(
            "step {}°, fov {}°",
            cfg.step_deg, cfg.fov_deg
        )));
    }
    let step = cfg.step_deg.to_radians();
    let centers = match cfg.stepping {
        Stepping::Longitude if dp.normal().z().abs() >= MERIDIAN_NZ => {
            if cfg.step_deg >= 180.0 {
                return Err(ScanError::InvalidConfig("longitude stepping needs step < 180°".into()));
            }
            longitude_view_centers(dp, step, cfg.num_views)
        }
        _ => arc_view_centers(dp, step, cfg.num_views),
    };
    let max_lat = MAX_VIEW_LAT_DEG.to_radians() - 1e-12;
    centers
        .into_iter()
        .map(|c| {
            let ll = c.to_lonlat();
            let ll = LonLat { lon: ll.lon, lat: ll.lat.clamp(-max_lat, max_lat) };
            Ok(ViewSpec::new(ll, cfg.fov_deg.to_radians(), cfg.view_size)?)
        })
        .collect()
}

/// Where a batch of detections lives.
#[derive(Debug, Clone, Copy)]
pub enum DetectionFrame<'a> {
    Views(&'a [ViewSpec]),
    Equirect(&'a EquirectGrid),
}

/// Back-projects detections, drops the user's own person box and merges
/// duplicates seen from overlapping views.
///
/// Boxes are clipped to their frame first. A `person` detection is dropped
/// when its lon/lat box intersects `user_rect` at all.
pub fn build_candidates(
    detections: &[Detection],
    frame: DetectionFrame<'_>,
    user_rect: Option<&LonLatRect>,
    cfg: &ScanConfig,
) -> Result<Vec<Candidate>, ScanError> {
    let mut raw = Vec::with_capacity(detections.len());
    for det in detections {
        det.validate()?;
        let (footprint, bbox) = match frame {
            DetectionFrame::Views(views) => {
                let vs = views
                    .get(det.view_index)
                    .ok_or(ScanError::BadViewIndex { index: det.view_index, count: views.len() })?;
                let n = vs.size() as f64;
                let Some(bbox) = det.bbox.clipped(n, n) else { continue };
                (backproject_bbox(vs, &bbox, cfg.samples_per_edge)?, bbox)
            }
            DetectionFrame::Equirect(g) => {
                let (w, h) = (g.width() as f64, g.height() as f64);
                let Some(bbox) = det.bbox.clipped(2.0 * w, h) else { continue };
                (backproject_equirect_bbox(g, &bbox, cfg.samples_per_edge)?, bbox)
            }
        };
        if det.category == PERSON_CATEGORY {
            if let Some(user) = user_rect {
                if wrapped_rect_iou(user, &footprint.lonlat_rect) > 0.0 {
                    continue;
                }
            }
        }
        raw.push(Candidate {
            id: 0,
            category: det.category.clone(),
            center: footprint.center,
            footprint,
            confidence: det.confidence,
            features: FeatureVector::default(),
            source_views: vec![det.view_index],
            detection: Detection { bbox, ..det.clone() },
        });
    }
    Ok(merge_duplicates(raw, cfg.dedup_iou))
}

fn detection_order(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    let (da, db) = (&a.detection, &b.detection);
    da.view_index
        .cmp(&db.view_index)
        .then(da.bbox.u0.total_cmp(&db.bbox.u0))
        .then(da.bbox.v0.total_cmp(&db.bbox.v0))
        .then(da.bbox.u1.total_cmp(&db.bbox.u1))
        .then(da.bbox.v1.total_cmp(&db.bbox.v1))
        .then(a.category.cmp(&b.category))
        .then(b.confidence.total_cmp(&a.confidence))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Category-scoped duplicate merge: candidates linked by a chain of
/// `wrapped_rect_iou >= iou` collapse to the most confident member.
/// Output is sorted by (view, box position) and ids are reassigned `0..`.
pub fn merge_duplicates(mut cands: Vec<Candidate>, iou: f64) -> Vec<Candidate> {
    cands.sort_by(detection_order);
    let n = cands.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if cands[i].category == cands[j].category
                && wrapped_rect_iou(&cands[i].footprint.lonlat_rect, &cands[j].footprint.lonlat_rect) >= iou
            {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Candidate> = groups
        .values()
        .map(|members| {
            // first maximum in sorted order wins ties
            let winner = members
                .iter()
                .copied()
                .fold(members[0], |best, i| if cands[i].confidence > cands[best].confidence { i } else { best });
            let mut views: Vec<usize> = members.iter().flat_map(|&i| cands[i].source_views.iter().copied()).collect();
            views.sort_unstable();
            views.dedup();
            Candidate { source_views: views, ..cands[winner].clone() }
        })
        .collect();
    out.sort_by(detection_order);
    for (i, c) in out.iter_mut().enumerate() {
        c.id = i;
    }
    out
}

/// Longitude separation folded into `[0, π]`.
pub fn horizontal_distance(lon_a: f64, lon_b: f64) -> f64 {
    let dl = (lon_a - lon_b).abs() % TAU;
    dl.min(TAU - dl)
}

/// Pixel distance on the equirect image from `p` to the drawn circle,
/// with horizontal wrap. Searched over `samples` points of the circle.
pub fn equirect_pixel_distance_to_circle(
    g: &EquirectGrid,
    circle: &GreatCircle,
    p: &SphereDir,
    samples: usize,
) -> f64 {
    let (w, _) = (g.width() as f64, g.height() as f64);
    let (pu, pv) = lonlat_to_equirect_px(g, p.to_lonlat());
    // orthonormal basis of the circle plane
    let n = circle.normal.as_vector();
    let seed = if n.x.abs() < 0.9 { nalgebra::Vector3::x() } else { nalgebra::Vector3::y() };
    let e1 = n.cross(&seed).normalize();
    let e2 = n.cross(&e1);
    let mut best = f64::INFINITY;
    for i in 0..samples.max(3) {
        let t = TAU * i as f64 / samples.max(3) as f64;
        let q = SphereDir::from_vector(e1 * t.cos() + e2 * t.sin()).expect("unit basis");
        let (qu, qv) = lonlat_to_equirect_px(g, q.to_lonlat());
        let du = (qu - pu).abs();
        let du = du.min(w - du);
        best = best.min(du.hypot(qv - pv));
    }
    best
}

/// Category → `q/S` table.
pub type FreqTable = BTreeMap<String, f64>;

/// Everything `compute_features` needs besides the candidates.
#[derive(Debug, Clone, Copy)]
pub struct FeatureContext<'a> {
    pub pointing: &'a DirectedPointing,
    pub user: LonLat,
    pub freq: &'a FreqTable,
    pub area_unit: AreaUnit,
    pub grid: &'a EquirectGrid,
}

pub fn compute_features(cands: &mut [Candidate], ctx: &FeatureContext<'_>) {
    for c in cands.iter_mut() {
        let center = c.center.to_lonlat();
        c.features = FeatureVector {
            d: angular_distance_to_circle(ctx.pointing.circle(), &c.center),
            l: ctx.freq.get(&c.category).copied().unwrap_or(0.0),
            c: c.confidence,
            a: match ctx.area_unit {
                AreaUnit::Steradian => c.footprint.area,
                AreaUnit::Pixel => c.footprint.lonlat_rect.equirect_pixel_area(ctx.grid),
            },
            h: horizontal_distance(center.lon, ctx.user.lon),
        };
    }
}
