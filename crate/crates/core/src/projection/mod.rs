//! Equirectangular pixel mapping, gnomonic views and back-projection of view
//! boxes to spherical footprints.
//!
//! Two pixel conventions are in play:
//! - equirect images use *index* coordinates: pixel `i` is centered at `u = i`,
//!   so `lon = 2π(u + 0.5)/W − π`;
//! - perspective views use *edge* coordinates in `[0, N]`: pixel `i` is
//!   centered at `u = i + 0.5` and `(N/2, N/2)` is the optical axis.

mod equirect;
mod footprint;
mod gnomonic;
mod render;

use thiserror::Error;

use crate::sphere::SphereError;

pub use equirect::{
    equirect_px_to_lonlat, equirect_px_to_lonlat_wrapped, lonlat_to_equirect_px, EquirectGrid,
};
pub use footprint::{
    backproject_bbox, backproject_equirect_bbox, spherical_polygon_area, wrapped_rect_iou,
    LonLatRect, PixelRect, SphericalFootprint, DEFAULT_SAMPLES_PER_EDGE,
};
pub use gnomonic::{gnomonic_forward, gnomonic_inverse, ViewFrame, ViewSpec, MAX_VIEW_LAT_DEG};
pub use render::{render_view, sample_bilinear, view_pixel_source};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("pixel ({u}, {v}) outside the equirect grid")]
    OutOfGrid { u: f64, v: f64 },
    #[error("invalid equirect grid {width}x{height}: width must equal 2*height and be at least 2")]
    InvalidGrid { width: u32, height: u32 },
    #[error("invalid view: {0}")]
    InvalidView(String),
    #[error("direction is behind the view plane")]
    BehindView,
    #[error("box has non-positive width or height")]
    DegenerateBox,
    #[error("box [{0}, {1}, {2}, {3}] leaves the view")]
    BoxOutOfView(f64, f64, f64, f64),
    #[error("polygon needs at least three distinct vertices")]
    TooFewVertices,
    #[error(transparent)]
    Sphere(#[from] SphereError),
}
