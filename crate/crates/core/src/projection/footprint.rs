use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{
    equirect_px_to_lonlat_wrapped, gnomonic_forward, EquirectGrid, ProjectionError, ViewSpec,
};
use crate::sphere::{wrap_angle, LonLat, SphereDir};

pub const DEFAULT_SAMPLES_PER_EDGE: usize = 8;

/// Axis-aligned pixel box `[u0, v0, u1, v1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct PixelRect {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

impl From<[f64; 4]> for PixelRect {
    fn from(a: [f64; 4]) -> Self {
        PixelRect { u0: a[0], v0: a[1], u1: a[2], v1: a[3] }
    }
}

impl From<PixelRect> for [f64; 4] {
    fn from(r: PixelRect) -> Self {
        [r.u0, r.v0, r.u1, r.v1]
    }
}

impl PixelRect {
    pub fn new(u0: f64, v0: f64, u1: f64, v1: f64) -> Self {
        Self { u0, v0, u1, v1 }
    }

    pub fn width(&self) -> f64 {
        self.u1 - self.u0
    }
    pub fn height(&self) -> f64 {
        self.v1 - self.v0
    }
    pub fn center(&self) -> (f64, f64) {
        ((self.u0 + self.u1) / 2.0, (self.v0 + self.v1) / 2.0)
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0)
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u0 && u <= self.u1 && v >= self.v0 && v <= self.v1
    }

    /// Intersection with `[0, w] x [0, h]`; `None` when nothing remains.
    pub fn clipped(&self, w: f64, h: f64) -> Option<PixelRect> {
        let r = PixelRect {
            u0: self.u0.max(0.0),
            v0: self.v0.max(0.0),
            u1: self.u1.min(w),
            v1: self.v1.min(h),
        };
        (!r.is_degenerate()).then_some(r)
    }

    /// Perimeter points, `per_edge` per side, clockwise in image space
    /// starting at `(u0, v0)`.
    fn perimeter(&self, per_edge: usize) -> Vec<(f64, f64)> {
        let corners = [(self.u0, self.v0), (self.u1, self.v0), (self.u1, self.v1), (self.u0, self.v1)];
        let mut pts = Vec::with_capacity(4 * per_edge);
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            for s in 0..per_edge {
                let t = s as f64 / per_edge as f64;
                pts.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
            }
        }
        pts
    }
}

/// Longitude/latitude box. `lon_max < lon_min` means the box crosses the
/// ±π seam; `lon_min = -π, lon_max = π` is a full longitude band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LonLatRect {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

impl LonLatRect {
    pub fn full_band(lat_min: f64, lat_max: f64) -> Self {
        Self { lon_min: -PI, lon_max: PI, lat_min, lat_max }
    }

    pub fn crosses_seam(&self) -> bool {
        self.lon_max < self.lon_min
    }

    /// Longitude width in `[0, 2π]`.
    pub fn lon_span(&self) -> f64 {
        if self.lon_max >= self.lon_min {
            self.lon_max - self.lon_min
        } else {
            self.lon_max - self.lon_min + TAU
        }
    }

    pub fn lat_span(&self) -> f64 {
        (self.lat_max - self.lat_min).max(0.0)
    }

    /// Flat `Δlon·Δlat` measure used for overlap tests.
    pub fn flat_area(&self) -> f64 {
        self.lon_span() * self.lat_span()
    }

    /// Area of the box when drawn on an equirect image, in pixels.
    pub fn equirect_pixel_area(&self, g: &EquirectGrid) -> f64 {
        self.flat_area() * g.px_per_rad() * g.px_per_rad()
    }

    pub fn contains(&self, p: LonLat, tol: f64) -> bool {
        if p.lat < self.lat_min - tol || p.lat > self.lat_max + tol {
            return false;
        }
        let offset = (p.lon - self.lon_min).rem_euclid(TAU);
        offset <= self.lon_span() + tol || offset >= TAU - tol
    }

    pub fn center(&self) -> LonLat {
        LonLat {
            lon: wrap_angle(self.lon_min + self.lon_span() / 2.0),
            lat: (self.lat_min + self.lat_max) / 2.0,
        }
    }

    /// Tightest box around `points`: the longitude interval is the shortest
    /// arc covering every longitude (the complement of the widest gap).
    pub fn bounding(points: &[LonLat], has_north: bool, has_south: bool) -> Self {
        let lat_min = if has_south { -FRAC_PI_2 } else { points.iter().map(|p| p.lat).fold(f64::INFINITY, f64::min) };
        let lat_max = if has_north { FRAC_PI_2 } else { points.iter().map(|p| p.lat).fold(f64::NEG_INFINITY, f64::max) };
        if has_north || has_south {
            return Self::full_band(lat_min, lat_max);
        }
        // pole points carry no longitude information
        let mut lons: Vec<f64> =
            points.iter().filter(|p| p.lat.abs() < FRAC_PI_2).map(|p| p.lon).collect();
        if lons.is_empty() {
            return Self { lon_min: 0.0, lon_max: 0.0, lat_min, lat_max };
        }
        lons.sort_by(f64::total_cmp);
        let n = lons.len();
        // gap after index i; the last one wraps around the seam
        let (mut best_gap, mut best) = (lons[0] + TAU - lons[n - 1], n - 1);
        for i in 0..n - 1 {
            let gap = lons[i + 1] - lons[i];
            if gap > best_gap {
                best_gap = gap;
                best = i;
            }
        }
        let (lon_min, lon_max) = if best == n - 1 { (lons[0], lons[n - 1]) } else { (lons[best + 1], lons[best]) };
        Self { lon_min, lon_max, lat_min, lat_max }
    }
}

/// Spherical region covered by a detection box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalFootprint {
    /// Closed polygon, last vertex connects back to the first.
    pub boundary: Vec<SphereDir>,
    pub center: SphereDir,
    /// Steradians.
    pub area: f64,
    pub lonlat_rect: LonLatRect,
}

/// Back-projects a view-space box to the sphere.
pub fn backproject_bbox(
    vs: &ViewSpec,
    bbox: &PixelRect,
    samples_per_edge: usize,
) -> Result<SphericalFootprint, ProjectionError> {
    if bbox.is_degenerate() {
        return Err(ProjectionError::DegenerateBox);
    }
    let n = vs.size() as f64;
    if bbox.u0 < 0.0 || bbox.v0 < 0.0 || bbox.u1 > n || bbox.v1 > n {
        return Err(ProjectionError::BoxOutOfView(bbox.u0, bbox.v0, bbox.u1, bbox.v1));
    }
    let frame = vs.frame();
    let boundary: Vec<SphereDir> = bbox
        .perimeter(samples_per_edge.max(1))
        .into_iter()
        .map(|(u, v)| frame.unproject(u, v))
        .collect();
    let (cu, cv) = bbox.center();
    let center = frame.unproject(cu, cv);
    let area = spherical_polygon_area(&boundary)?;
    let pole_inside = |pole: SphereDir| {
        gnomonic_forward(vs, &pole).map(|(u, v)| bbox.contains(u, v)).unwrap_or(false)
    };
    let lonlats: Vec<LonLat> = boundary.iter().map(|d| d.to_lonlat()).collect();
    let lonlat_rect =
        LonLatRect::bounding(&lonlats, pole_inside(SphereDir::NORTH), pole_inside(SphereDir::NORTH.neg()));
    Ok(SphericalFootprint { boundary, center, area, lonlat_rect })
}

/// Footprint of a box drawn directly on the equirect image. `u1` may exceed
/// `W` for boxes that straddle the seam.
pub fn backproject_equirect_bbox(
    g: &EquirectGrid,
    bbox: &PixelRect,
    samples_per_edge: usize,
) -> Result<SphericalFootprint, ProjectionError> {
    if bbox.is_degenerate() {
        return Err(ProjectionError::DegenerateBox);
    }
    let (w, h) = (g.width() as f64, g.height() as f64);
    if bbox.u0 < 0.0 || bbox.v0 < 0.0 || bbox.u1 > 2.0 * w || bbox.v1 > h {
        return Err(ProjectionError::BoxOutOfView(bbox.u0, bbox.v0, bbox.u1, bbox.v1));
    }
    let to_ll = |u: f64, v: f64| equirect_px_to_lonlat_wrapped(g, u, v);
    let boundary: Vec<SphereDir> = bbox
        .perimeter(samples_per_edge.max(1))
        .into_iter()
        .map(|(u, v)| to_ll(u, v).to_dir())
        .collect();
    let (cu, cv) = bbox.center();
    let center = to_ll(cu, cv).to_dir();
    let top = to_ll(bbox.u0, bbox.v0).lat;
    let bottom = to_ll(bbox.u0, bbox.v1).lat;
    let lonlat_rect = if bbox.width() >= w {
        LonLatRect::full_band(bottom, top)
    } else {
        let lon_min = wrap_angle(std::f64::consts::TAU * (bbox.u0 + 0.5) / w - PI);
        let lon_max = wrap_angle(lon_min + bbox.width() / g.px_per_rad());
        LonLatRect { lon_min, lon_max, lat_min: bottom, lat_max: top }
    };
    // exact area of a lon/lat box
    let area = lonlat_rect.lon_span() * (top.sin() - bottom.sin());
    if !(area > 0.0) {
        return Err(ProjectionError::DegenerateBox);
    }
    Ok(SphericalFootprint { boundary, center, area, lonlat_rect })
}

/// Solid angle of a simple spherical polygon with geodesic edges.
///
/// Fans triangles out of the normalized vertex centroid and sums their
/// signed excess (Van Oosterom–Strackee form), so the result is independent
/// of the vertex winding.
pub fn spherical_polygon_area(boundary: &[SphereDir]) -> Result<f64, ProjectionError> {
    let mut verts: Vec<&SphereDir> = Vec::with_capacity(boundary.len());
    for v in boundary {
        if verts.last().is_none_or(|last| last.angle_to(v) > 1e-12) {
            verts.push(v);
        }
    }
    while verts.len() > 1 && verts[0].angle_to(verts[verts.len() - 1]) <= 1e-12 {
        verts.pop();
    }
    if verts.len() < 3 {
        return Err(ProjectionError::TooFewVertices);
    }
    let sum = verts.iter().fold(nalgebra::Vector3::zeros(), |acc, v| acc + v.as_vector());
    let c = SphereDir::from_vector(sum).map_err(|_| ProjectionError::TooFewVertices)?;
    let c = c.as_vector();
    let mut total = 0.0;
    for i in 0..verts.len() {
        let a = verts[i].as_vector();
        let b = verts[(i + 1) % verts.len()].as_vector();
        let num = c.dot(&a.cross(b));
        let den = 1.0 + c.dot(a) + a.dot(b) + b.dot(c);
        total += 2.0 * num.atan2(den);
    }
    Ok(total.abs())
}

fn interval_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// IoU of two lon/lat boxes under the flat `Δlon·Δlat` measure, with
/// longitude intervals compared on the circle.
pub fn wrapped_rect_iou(a: &LonLatRect, b: &LonLatRect) -> f64 {
    let (wa, wb) = (a.lon_span(), b.lon_span());
    let lon_inter: f64 = [-TAU, 0.0, TAU]
        .iter()
        .map(|shift| interval_overlap(a.lon_min, a.lon_min + wa, b.lon_min + shift, b.lon_min + shift + wb))
        .sum::<f64>()
        .min(wa.min(wb));
    let lat_inter = interval_overlap(a.lat_min, a.lat_max, b.lat_min, b.lat_max);
    let inter = lon_inter * lat_inter;
    let union = a.flat_area() + b.flat_area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
