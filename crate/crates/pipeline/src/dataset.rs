use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use omnipoint::{Detection, EquirectGrid, PersonBox, Skeleton, SkeletonFrame, ViewSpec};

use crate::error::{PipelineError, Result};
use crate::schema::{
    read_json, DetectionsFixture, FrameKind, GroundTruth, Manifest, PersonFixture, SkeletonFixture, Split,
};

/// Detections of one scan view as read from its fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewDetections {
    pub view_index: usize,
    /// View the detector saw, when the fixture records it.
    pub view: Option<ViewSpec>,
    pub detections: Vec<Detection>,
}

/// A scene with all of its fixtures loaded and validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub id: String,
    pub split: Split,
    pub image: Option<PathBuf>,
    pub grid: EquirectGrid,
    pub persons: Vec<PersonBox>,
    pub skeleton_view: Option<Skeleton>,
    pub skeleton_equirect: Option<Skeleton>,
    pub detections_equirect: Option<Vec<Detection>>,
    pub detections_views: BTreeMap<FrameKind, Vec<ViewDetections>>,
    pub ground_truth: Option<GroundTruth>,
}

impl Scene {
    pub fn skeleton(&self, kind: FrameKind) -> Option<&Skeleton> {
        match kind {
            FrameKind::View => self.skeleton_view.as_ref(),
            FrameKind::Equirect => self.skeleton_equirect.as_ref(),
        }
    }
}

fn invalid(path: &Path, message: impl Into<String>) -> PipelineError {
    PipelineError::InvalidFixture { path: path.into(), message: message.into() }
}

fn load_skeleton(path: &Path, grid: &EquirectGrid, want: FrameKind) -> Result<Skeleton> {
    let f: SkeletonFixture = read_json(path)?;
    let s = f.to_skeleton().map_err(|m| invalid(path, m))?;
    match (want, &s.frame) {
        (FrameKind::View, SkeletonFrame::View { .. }) => {}
        (FrameKind::Equirect, SkeletonFrame::Equirect { grid: g }) if g == grid => {}
        (FrameKind::Equirect, SkeletonFrame::Equirect { .. }) => {
            return Err(invalid(path, "skeleton grid differs from the scene image"))
        }
        _ => return Err(invalid(path, format!("expected a {want:?}-frame skeleton"))),
    }
    Ok(s)
}

fn detections_from(fixture: &DetectionsFixture, view_index: usize) -> Vec<Detection> {
    fixture
        .detections
        .iter()
        .map(|d| Detection { category: d.category.clone(), bbox: d.bbox, confidence: d.confidence, view_index })
        .collect()
}

fn load_detections(path: &Path) -> Result<DetectionsFixture> {
    let f: DetectionsFixture = read_json(path)?;
    f.check().map_err(|m| invalid(path, m))?;
    Ok(f)
}

impl Scene {
    fn load(root: &Path, entry: &crate::schema::SceneEntry) -> Result<Scene> {
        let grid = EquirectGrid::new(entry.image.width, entry.image.height)
            .map_err(|e| invalid(&root.join(&entry.person), format!("scene {}: {e}", entry.id)))?;
        let person_path = root.join(&entry.person);
        let persons: PersonFixture = read_json(&person_path)?;
        for pb in &persons.boxes {
            pb.validate().map_err(|e| invalid(&person_path, e.to_string()))?;
        }
        let skeleton_view =
            entry.skeleton.view.as_ref().map(|p| load_skeleton(&root.join(p), &grid, FrameKind::View)).transpose()?;
        let skeleton_equirect = entry
            .skeleton
            .equirect
            .as_ref()
            .map(|p| load_skeleton(&root.join(p), &grid, FrameKind::Equirect))
            .transpose()?;
        let detections_equirect = match &entry.detections.equirect {
            Some(p) => {
                let path = root.join(p);
                let f = load_detections(&path)?;
                match f.frame {
                    Some(SkeletonFrame::Equirect { grid: g }) if g == grid => {}
                    _ => return Err(invalid(&path, "equirect detections must use the scene's grid")),
                }
                Some(detections_from(&f, 0))
            }
            None => None,
        };
        let mut detections_views = BTreeMap::new();
        for (kind, paths) in &entry.detections.views {
            let mut views: Vec<ViewDetections> = Vec::with_capacity(paths.len());
            for p in paths {
                let path = root.join(p);
                let f = load_detections(&path)?;
                let Some(view_index) = f.view_index else {
                    return Err(invalid(&path, "per-view detections need view_index"));
                };
                if views.iter().any(|v| v.view_index == view_index) {
                    return Err(invalid(&path, format!("second fixture for view {view_index}")));
                }
                views.push(ViewDetections { view_index, view: f.view, detections: detections_from(&f, view_index) });
            }
            views.sort_by_key(|v| v.view_index);
            detections_views.insert(*kind, views);
        }
        Ok(Scene {
            id: entry.id.clone(),
            split: entry.split,
            image: entry.image.path.as_ref().map(|p| root.join(p)),
            grid,
            persons: persons.boxes,
            skeleton_view,
            skeleton_equirect,
            detections_equirect,
            detections_views,
            ground_truth: entry.ground_truth.clone(),
        })
    }
}

/// All scenes of a manifest, sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub root: PathBuf,
    pub scenes: Vec<Scene>,
}

impl Dataset {
    pub fn load(manifest_path: &Path) -> Result<Dataset> {
        let manifest: Manifest = read_json(manifest_path)?;
        let root = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let mut scenes = manifest.scenes.iter().map(|e| Scene::load(&root, e)).collect::<Result<Vec<_>>>()?;
        scenes.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = scenes.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(invalid(manifest_path, format!("duplicate scene id {}", w[0].id)));
        }
        Ok(Dataset { root, scenes })
    }

    pub fn scene(&self, id: &str) -> Result<&Scene> {
        self.scenes.iter().find(|s| s.id == id).ok_or_else(|| PipelineError::UnknownScene(id.to_string()))
    }

    pub fn split(&self, split: Split) -> Vec<&Scene> {
        self.scenes.iter().filter(|s| s.split == split).collect()
    }
}
