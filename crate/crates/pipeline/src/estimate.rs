//! Per-scene pipeline: user localization, pointing circle, candidates,
//! features and ranking.

use omnipoint::gesture::{pointing_circle, primary_person, select_pointing_arm, user_lonlat_from_bbox};
use omnipoint::scan::{build_candidates, compute_features, DetectionFrame, FeatureContext};
use omnipoint::select::{build_freq_table, rank_by_distance, rank_by_svc};
use omnipoint::projection::wrapped_rect_iou;
use omnipoint::{
    AreaUnit, Arm, Candidate, DirectedPointing, FreqTable, LonLat, LonLatRect, ScanError, SvmModel, ViewSpec,
};
use omnipoint::scan::scan_views;

use crate::config::{FreqScope, PipelineConfig};
use crate::dataset::Scene;
use crate::error::{PipelineError, Result};
use crate::schema::{
    GroundTruth, Mode, ModelFile, PointingRecord, ProjectionMode, RankedCandidate, ResultRecord, Selector,
    SCHEMA_VERSION,
};

/// Everything up to (not including) feature computation.
#[derive(Debug, Clone)]
pub struct SceneCandidates {
    pub user: LonLat,
    pub user_rect: LonLatRect,
    pub arm: Arm,
    pub pointing: DirectedPointing,
    pub views: Vec<ViewSpec>,
    pub candidates: Vec<Candidate>,
}

fn gesture_err(scene: &Scene) -> impl Fn(omnipoint::GestureError) -> PipelineError + '_ {
    move |source| PipelineError::Gesture { scene: scene.id.clone(), source }
}

fn scan_err(scene: &Scene) -> impl Fn(ScanError) -> PipelineError + '_ {
    move |source| PipelineError::Scan { scene: scene.id.clone(), source }
}

/// Localizes the user, estimates the pointing circle from the skeleton the
/// mode asks for and turns the matching detections into candidates.
pub fn scene_candidates(scene: &Scene, projection: ProjectionMode, cfg: &PipelineConfig) -> Result<SceneCandidates> {
    let person = primary_person(&scene.persons).ok_or_else(|| PipelineError::NoPerson { scene: scene.id.clone() })?;
    let user = user_lonlat_from_bbox(&scene.grid, person).map_err(gesture_err(scene))?;
    let user_rect = person.lonlat_rect(&scene.grid);

    let kind = projection.skeleton_frame();
    let skeleton = scene.skeleton(kind).ok_or_else(|| PipelineError::MissingFixture {
        scene: scene.id.clone(),
        what: format!("{kind:?} skeleton").to_lowercase(),
    })?;
    let gcfg = cfg.gesture();
    let arm = select_pointing_arm(skeleton, &gcfg).map_err(gesture_err(scene))?;
    let pointing = pointing_circle(skeleton, arm, &gcfg).map_err(gesture_err(scene))?;

    let scan_cfg = cfg.scan();
    let (views, candidates) = if projection.projection_detection {
        let views = scan_views(&pointing, &scan_cfg).map_err(scan_err(scene))?;
        let fixtures = scene.detections_views.get(&kind).ok_or_else(|| PipelineError::MissingFixture {
            scene: scene.id.clone(),
            what: format!("per-view detections for the {kind:?} skeleton").to_lowercase(),
        })?;
        let mut detections = Vec::new();
        for f in fixtures {
            if let (Some(recorded), Some(computed)) = (&f.view, views.get(f.view_index)) {
                if !recorded.approx_eq(computed, 1e-9) {
                    return Err(PipelineError::ViewMismatch { scene: scene.id.clone(), view_index: f.view_index });
                }
            }
            detections.extend(f.detections.iter().cloned());
        }
        let cands = build_candidates(&detections, DetectionFrame::Views(&views), Some(&user_rect), &scan_cfg)
            .map_err(scan_err(scene))?;
        (views, cands)
    } else {
        let detections = scene.detections_equirect.as_ref().ok_or_else(|| PipelineError::MissingFixture {
            scene: scene.id.clone(),
            what: "equirect detections".into(),
        })?;
        let cands = build_candidates(detections, DetectionFrame::Equirect(&scene.grid), Some(&user_rect), &scan_cfg)
            .map_err(scan_err(scene))?;
        (Vec::new(), cands)
    };
    Ok(SceneCandidates { user, user_rect, arm, pointing, views, candidates })
}

/// Category frequencies of the candidates in one image.
pub fn image_freq_table(cands: &[Candidate]) -> FreqTable {
    build_freq_table(cands.iter().map(|c| c.category.as_str())).unwrap_or_default()
}

/// Fills in the five features.
pub fn featurize(scene: &Scene, sc: &mut SceneCandidates, freq: &FreqTable, area_unit: AreaUnit) {
    let ctx = FeatureContext { pointing: &sc.pointing, user: sc.user, freq, area_unit, grid: &scene.grid };
    compute_features(&mut sc.candidates, &ctx);
}

/// Candidate with the largest lon/lat-box IoU against the ground truth among
/// those of the right category, if that IoU reaches `min_iou`. Ties go to
/// the lower id.
pub fn match_gt(cands: &[Candidate], gt: &GroundTruth, min_iou: f64) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for c in cands.iter().filter(|c| c.category == gt.category) {
        let iou = wrapped_rect_iou(&c.footprint.lonlat_rect, &gt.lonlat_rect);
        if iou >= min_iou && best.is_none_or(|(b, id)| iou > b || (iou == b && c.id < id)) {
            best = Some((iou, c.id));
        }
    }
    best.map(|(_, id)| id)
}

/// Runs the full pipeline on one scene.
///
/// With the SVC selector the features are computed the way the model was
/// trained (its area unit and frequency scope), not from `cfg`.
pub fn estimate(scene: &Scene, cfg: &PipelineConfig, mode: Mode, model: Option<&ModelFile>) -> Result<ResultRecord> {
    let model = match (mode.selector, model) {
        (Selector::Svc, None) => return Err(PipelineError::MissingModel),
        (_, m) => m,
    };
    let mut sc = scene_candidates(scene, mode.projection(), cfg)?;
    let (area_unit, scope) = match (mode.selector, model) {
        (Selector::Svc, Some(m)) => (m.metadata.area_unit, m.metadata.freq_scope),
        _ => (cfg.area_unit, cfg.freq_scope),
    };
    let freq = match (scope, model) {
        (FreqScope::Corpus, Some(m)) => m.freq_table.clone(),
        _ => image_freq_table(&sc.candidates),
    };
    featurize(scene, &mut sc, &freq, area_unit);
    let svm: Option<SvmModel> = model.map(ModelFile::to_model);
    let ranking = match (mode.selector, &svm) {
        (Selector::Svc, Some(m)) => rank_by_svc(m, &sc.candidates),
        _ => rank_by_distance(&sc.candidates),
    };
    let matched_gt = scene.ground_truth.as_ref().and_then(|gt| match_gt(&sc.candidates, gt, cfg.gt_iou));
    let ranked = ranking
        .entries
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let c = &sc.candidates[e.id];
            debug_assert_eq!(c.id, e.id);
            RankedCandidate {
                rank: k + 1,
                id: c.id,
                category: c.category.clone(),
                confidence: c.confidence,
                center: c.center.to_lonlat(),
                lonlat_rect: c.footprint.lonlat_rect,
                features: c.features,
                score: e.score,
                source_views: c.source_views.clone(),
            }
        })
        .collect();
    Ok(ResultRecord {
        schema_version: SCHEMA_VERSION,
        scene_id: scene.id.clone(),
        mode,
        user: sc.user,
        pointing: PointingRecord {
            arm: sc.arm,
            normal: *sc.pointing.normal(),
            anchor: *sc.pointing.anchor(),
            tangent: *sc.pointing.tangent(),
        },
        views: sc.views,
        ranking: ranked,
        matched_gt,
    })
}
