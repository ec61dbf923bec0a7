//! Exports perspective views for the external pose and object detectors.

use std::path::Path;

use image::RgbImage;

use omnipoint::gesture::{person_view_spec, pointing_circle, primary_person, select_pointing_arm};
use omnipoint::projection::render_view;
use omnipoint::scan::scan_views;
use omnipoint::ViewSpec;

use crate::config::PipelineConfig;
use crate::dataset::Scene;
use crate::error::{PipelineError, Result};
use crate::schema::{write_json, FrameKind, PointingRecord, ViewEntry, ViewManifest, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// One view framing the user, for pose estimation.
    Person,
    /// The views along the pointing circle, for object detection.
    Scan(FrameKind),
}

pub fn load_scene_image(scene: &Scene) -> Result<RgbImage> {
    let path = scene.image.as_ref().ok_or_else(|| PipelineError::MissingFixture {
        scene: scene.id.clone(),
        what: "equirect image".into(),
    })?;
    let img = image::open(path).map_err(|source| PipelineError::Image { path: path.clone(), source })?.to_rgb8();
    if (img.width(), img.height()) != (scene.grid.width(), scene.grid.height()) {
        return Err(PipelineError::InvalidFixture {
            path: path.clone(),
            message: format!(
                "image is {}x{}, manifest says {}x{}",
                img.width(),
                img.height(),
                scene.grid.width(),
                scene.grid.height()
            ),
        });
    }
    Ok(img)
}

/// Views for `stage`, plus the pointing circle they follow for the scan stage.
pub fn stage_views(scene: &Scene, cfg: &PipelineConfig, stage: Stage) -> Result<(Vec<ViewSpec>, Option<PointingRecord>)> {
    let gesture_err = |source| PipelineError::Gesture { scene: scene.id.clone(), source };
    let gcfg = cfg.gesture();
    match stage {
        Stage::Person => {
            let person =
                primary_person(&scene.persons).ok_or_else(|| PipelineError::NoPerson { scene: scene.id.clone() })?;
            Ok((vec![person_view_spec(&scene.grid, person, &gcfg).map_err(gesture_err)?], None))
        }
        Stage::Scan(kind) => {
            let skeleton = scene.skeleton(kind).ok_or_else(|| PipelineError::MissingFixture {
                scene: scene.id.clone(),
                what: format!("{kind:?} skeleton").to_lowercase(),
            })?;
            let arm = select_pointing_arm(skeleton, &gcfg).map_err(gesture_err)?;
            let dp = pointing_circle(skeleton, arm, &gcfg).map_err(gesture_err)?;
            let views = scan_views(&dp, &cfg.scan())
                .map_err(|source| PipelineError::Scan { scene: scene.id.clone(), source })?;
            let pointing = PointingRecord { arm, normal: *dp.normal(), anchor: *dp.anchor(), tangent: *dp.tangent() };
            Ok((views, Some(pointing)))
        }
    }
}

/// Renders the stage's views into `out_dir` and writes `views.json` there.
pub fn render_views(scene: &Scene, img: &RgbImage, cfg: &PipelineConfig, stage: Stage, out_dir: &Path) -> Result<ViewManifest> {
    let (views, pointing) = stage_views(scene, cfg, stage)?;
    std::fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    let mut entries = Vec::with_capacity(views.len());
    for (k, vs) in views.iter().enumerate() {
        let file = match stage {
            Stage::Person => "person_view.png".to_string(),
            Stage::Scan(_) => format!("view_{k:02}.png"),
        };
        let path = out_dir.join(&file);
        render_view(img, vs)
            .map_err(|source| PipelineError::Projection { scene: scene.id.clone(), source })?
            .save(&path)
            .map_err(|source| PipelineError::Image { path, source })?;
        entries.push(ViewEntry { view_index: k, view: *vs, file });
    }
    let manifest = ViewManifest {
        schema_version: SCHEMA_VERSION,
        scene_id: scene.id.clone(),
        stage: match stage {
            Stage::Person => "person".into(),
            Stage::Scan(_) => "scan".into(),
        },
        grid: scene.grid,
        pointing,
        views: entries,
    };
    write_json(&out_dir.join("views.json"), &manifest)?;
    Ok(manifest)
}
