//! Draws a result onto its equirect image: the pointing circle, candidate
//! boxes and `<rank> <category>` labels.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use image::{Rgb, RgbImage};

use omnipoint::projection::lonlat_to_equirect_px;
use omnipoint::sphere::point_at_arc;
use omnipoint::{DirectedPointing, EquirectGrid, GreatCircle};

use crate::error::{PipelineError, Result};
use crate::font::{text_pixels, GLYPH_H};
use crate::schema::{PointingRecord, RankedCandidate, ResultRecord};
use crate::synth::equirect_bbox_of_rect;

const CIRCLE_COLOR: Rgb<u8> = Rgb([255, 220, 0]);
const TOP_COLOR: Rgb<u8> = Rgb([230, 30, 30]);
const BOX_COLOR: Rgb<u8> = Rgb([240, 240, 240]);
const LABEL_SCALE: u32 = 2;

pub fn label(c: &RankedCandidate) -> String {
    format!("{} {}", c.rank, c.category)
}

pub fn directed_pointing(p: &PointingRecord) -> Result<DirectedPointing> {
    DirectedPointing::new(GreatCircle::new(p.normal), p.anchor)
        .map_err(|e| PipelineError::InvalidConfig(format!("result pointing: {e}")))
}

/// The pointing circle in equirect pixels, starting at the anchor and
/// following the pointing direction. The curve is cut where it crosses the
/// seam, and vertices in the pole rows (where pixel rows clamp) are left
/// out, so every vertex maps back onto the circle.
pub fn circle_polyline(dp: &DirectedPointing, g: &EquirectGrid, samples: usize) -> Vec<Vec<(f64, f64)>> {
    let (w, h) = (g.width() as f64, g.height() as f64);
    let lat_top = FRAC_PI_2 - PI * 0.5 / h;
    let lat_bottom = FRAC_PI_2 - PI * (h - 0.5) / h;
    let mut segments: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for i in 0..=samples.max(8) {
        let p = point_at_arc(dp, TAU * i as f64 / samples.max(8) as f64).to_lonlat();
        if p.lat > lat_top || p.lat < lat_bottom {
            if current.len() > 1 {
                segments.push(std::mem::take(&mut current));
            }
            current.clear();
            continue;
        }
        let (u, v) = lonlat_to_equirect_px(g, p);
        if let Some(&(pu, _)) = current.last() {
            if (u - pu).abs() > w / 2.0 {
                if current.len() > 1 {
                    segments.push(std::mem::take(&mut current));
                }
                current.clear();
            }
        }
        current.push((u, v));
    }
    if current.len() > 1 {
        segments.push(current);
    }
    segments
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    if (0..h).contains(&y) {
        img.put_pixel(x.rem_euclid(w) as u32, y as u32, c);
    }
}

fn line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), c: Rgb<u8>) {
    let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let (x, y) = ((a.0 + t * (b.0 - a.0)).round() as i64, (a.1 + t * (b.1 - a.1)).round() as i64);
        put(img, x, y, c);
        put(img, x, y + 1, c);
    }
}

fn rect(img: &mut RgbImage, u0: f64, v0: f64, u1: f64, v1: f64, c: Rgb<u8>) {
    for (a, b) in [((u0, v0), (u1, v0)), ((u1, v0), (u1, v1)), ((u1, v1), (u0, v1)), ((u0, v1), (u0, v0))] {
        line(img, a, b, c);
    }
}

fn text(img: &mut RgbImage, x: i64, y: i64, s: &str, c: Rgb<u8>) {
    for (dx, dy) in text_pixels(s, LABEL_SCALE) {
        put(img, x + dx as i64, y + dy as i64, c);
    }
}

/// Annotated copy of `img`. `top_k` limits how many candidates get boxes.
pub fn annotate_image(img: &RgbImage, result: &ResultRecord, top_k: Option<usize>) -> Result<RgbImage> {
    let g = EquirectGrid::new(img.width(), img.height())
        .map_err(|e| PipelineError::InvalidConfig(format!("annotation image: {e}")))?;
    let dp = directed_pointing(&result.pointing)?;
    let mut out = img.clone();
    for seg in circle_polyline(&dp, &g, 4 * g.width() as usize) {
        for pair in seg.windows(2) {
            line(&mut out, pair[0], pair[1], CIRCLE_COLOR);
        }
    }
    let n = top_k.unwrap_or(result.ranking.len());
    // lowest ranks last so the top candidate stays on top
    for c in result.ranking.iter().take(n).rev() {
        let color = if c.rank == 1 { TOP_COLOR } else { BOX_COLOR };
        let b = equirect_bbox_of_rect(&g, &c.lonlat_rect);
        rect(&mut out, b.u0, b.v0, b.u1, b.v1, color);
        let y = (b.v0 - (GLYPH_H * LABEL_SCALE) as f64 - 3.0).max(0.0);
        text(&mut out, b.u0.round() as i64, y as i64, &label(c), color);
    }
    Ok(out)
}

pub fn annotate_file(image: &Path, result: &ResultRecord, out: &Path, top_k: Option<usize>) -> Result<()> {
    let img = image::open(image)
        .map_err(|source| PipelineError::Image { path: image.into(), source })?
        .to_rgb8();
    let annotated = annotate_image(&img, result, top_k)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    annotated.save(out).map_err(|source| PipelineError::Image { path: out.into(), source })
}
