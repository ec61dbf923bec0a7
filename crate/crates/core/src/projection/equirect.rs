use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::ProjectionError;
use crate::sphere::{wrap_angle, LonLat};

/// Size of a 2:1 equirectangular panorama.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct EquirectGrid {
    width: u32,
    height: u32,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    width: u32,
    height: u32,
}

impl TryFrom<GridRepr> for EquirectGrid {
    type Error = ProjectionError;
    fn try_from(r: GridRepr) -> Result<Self, Self::Error> {
        EquirectGrid::new(r.width, r.height)
    }
}

impl From<EquirectGrid> for GridRepr {
    fn from(g: EquirectGrid) -> Self {
        GridRepr { width: g.width, height: g.height }
    }
}

impl EquirectGrid {
    pub fn new(width: u32, height: u32) -> Result<Self, ProjectionError> {
        if width < 2 || width as u64 != 2 * height as u64 {
            return Err(ProjectionError::InvalidGrid { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Pixels per radian (identical horizontally and vertically).
    pub fn px_per_rad(&self) -> f64 {
        self.width as f64 / TAU
    }
}

/// Maps an in-grid pixel position to longitude/latitude.
///
/// The last half row (`v > H − 0.5`) lies past the south pole under the
/// pixel-center convention and is clamped to it.
pub fn equirect_px_to_lonlat(g: &EquirectGrid, u: f64, v: f64) -> Result<LonLat, ProjectionError> {
    let (w, h) = (g.width as f64, g.height as f64);
    if !(0.0..w).contains(&u) || !(0.0..h).contains(&v) {
        return Err(ProjectionError::OutOfGrid { u, v });
    }
    Ok(equirect_px_to_lonlat_wrapped(g, u, v))
}

/// Like [`equirect_px_to_lonlat`] but wraps `u` horizontally and clamps the
/// latitude instead of failing. Used for box edges, which may sit on `u = W`
/// or straddle the seam.
pub fn equirect_px_to_lonlat_wrapped(g: &EquirectGrid, u: f64, v: f64) -> LonLat {
    let (w, h) = (g.width as f64, g.height as f64);
    let lon = wrap_angle(TAU * (u + 0.5) / w - PI);
    let lat = (FRAC_PI_2 - PI * (v + 0.5) / h).clamp(-FRAC_PI_2, FRAC_PI_2);
    LonLat { lon: if lat.abs() == FRAC_PI_2 { 0.0 } else { lon }, lat }
}

/// Inverse of [`equirect_px_to_lonlat`]: `u` wraps into `[0, W)`, `v` clamps
/// into `[0, H − 1]`.
pub fn lonlat_to_equirect_px(g: &EquirectGrid, p: LonLat) -> (f64, f64) {
    let (w, h) = (g.width as f64, g.height as f64);
    let mut u = ((p.lon + PI) * w / TAU - 0.5).rem_euclid(w);
    if u >= w {
        u -= w;
    }
    let v = ((FRAC_PI_2 - p.lat) * h / PI - 0.5).clamp(0.0, h - 1.0);
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> EquirectGrid {
        EquirectGrid::new(1920, 960).unwrap()
    }

    #[test]
    fn grid_invariant() {
        assert!(EquirectGrid::new(1920, 961).is_err());
        assert!(EquirectGrid::new(0, 0).is_err());
        assert!(EquirectGrid::new(2, 1).is_ok());
    }

    #[test]
    fn center_pixel_maps_to_origin() {
        let p = equirect_px_to_lonlat(&grid(), 959.5, 479.5).unwrap();
        assert!(p.lon.abs() < 1e-15 && p.lat.abs() < 1e-15);
        let (u, v) = lonlat_to_equirect_px(&grid(), LonLat { lon: 0.0, lat: 0.0 });
        assert!((u - 959.5).abs() < 1e-12 && (v - 479.5).abs() < 1e-12);
    }

    #[test]
    fn corner_pixel_values() {
        let p = equirect_px_to_lonlat(&grid(), 0.0, 0.0).unwrap();
        // -π + π/1920 and π/2 - π/1920
        assert!((p.lon - (-3.139_956_4)).abs() < 1e-6, "{}", p.lon);
        assert!((p.lat - 1.569_160_1).abs() < 1e-6, "{}", p.lat);
    }

    #[test]
    fn seam_and_pole_boundary_policy() {
        let (u, v) = lonlat_to_equirect_px(&grid(), LonLat { lon: -PI, lat: FRAC_PI_2 });
        assert!((u - 1919.5).abs() < 1e-9);
        assert_eq!(v, 0.0);
        let (_, v) = lonlat_to_equirect_px(&grid(), LonLat { lon: 0.0, lat: -FRAC_PI_2 });
        assert_eq!(v, 959.0);
    }

    #[test]
    fn out_of_grid() {
        assert!(equirect_px_to_lonlat(&grid(), -0.1, 3.0).is_err());
        assert!(equirect_px_to_lonlat(&grid(), 1920.0, 3.0).is_err());
        assert!(equirect_px_to_lonlat(&grid(), 3.0, 960.0).is_err());
    }

    #[test]
    fn wrapped_accepts_edges() {
        let a = equirect_px_to_lonlat_wrapped(&grid(), 1920.0, 100.0);
        let b = equirect_px_to_lonlat_wrapped(&grid(), 0.0, 100.0);
        assert!((a.lon - b.lon).abs() < 1e-12);
    }
}
