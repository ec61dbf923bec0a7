use image::RgbImage;
use rayon::prelude::*;

use super::{lonlat_to_equirect_px, EquirectGrid, ProjectionError, ViewFrame, ViewSpec};

/// Equirect index coordinates sampled for output pixel `(i, j)` of a view.
pub fn view_pixel_source(g: &EquirectGrid, frame: &ViewFrame, i: u32, j: u32) -> (f64, f64) {
    let d = frame.unproject(i as f64 + 0.5, j as f64 + 0.5);
    lonlat_to_equirect_px(g, d.to_lonlat())
}

/// Bilinear sample at index coordinates `(u, v)`; columns wrap around the
/// seam and rows clamp at the poles.
pub fn sample_bilinear(img: &RgbImage, u: f64, v: f64) -> [f64; 3] {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let (uf, vf) = (u.floor(), v.floor());
    let (fu, fv) = (u - uf, v - vf);
    let u0 = (uf as i64).rem_euclid(w);
    let u1 = (u0 + 1).rem_euclid(w);
    let v0 = (vf as i64).clamp(0, h - 1);
    let v1 = (v0 + 1).clamp(0, h - 1);
    let px = |x: i64, y: i64| img.get_pixel(x as u32, y as u32).0;
    let (p00, p10, p01, p11) = (px(u0, v0), px(u1, v0), px(u0, v1), px(u1, v1));
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let top = p00[c] as f64 * (1.0 - fu) + p10[c] as f64 * fu;
        let bottom = p01[c] as f64 * (1.0 - fu) + p11[c] as f64 * fu;
        *o = top * (1.0 - fv) + bottom * fv;
    }
    out
}

/// Renders the perspective view `vs` out of an equirect panorama.
///
/// Rows are filled in parallel; every pixel depends only on its own
/// coordinates, so the output does not depend on the thread count.
pub fn render_view(img: &RgbImage, vs: &ViewSpec) -> Result<RgbImage, ProjectionError> {
    let grid = EquirectGrid::new(img.width(), img.height())?;
    let frame = vs.frame();
    let n = vs.size();
    let mut buf = vec![0u8; n as usize * n as usize * 3];
    buf.par_chunks_mut(n as usize * 3).enumerate().for_each(|(j, row)| {
        for i in 0..n {
            let (u, v) = view_pixel_source(&grid, &frame, i, j as u32);
            let s = sample_bilinear(img, u, v);
            for c in 0..3 {
                row[i as usize * 3 + c] = s[c].round().clamp(0.0, 255.0) as u8;
            }
        }
    });
    Ok(RgbImage::from_raw(n, n, buf).expect("buffer sized for n x n RGB"))
}
