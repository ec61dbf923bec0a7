mod common;

use omnipoint_pipeline::schema::{to_json_bytes, ModelMetadata, SCHEMA_VERSION};
use omnipoint_pipeline::synth::Preset;
use omnipoint_pipeline::train::FEATURE_NAMES;
use omnipoint_pipeline::{
    estimate, FreqScope, Mode, ModelFile, PipelineConfig, PipelineError, ProjectionMode, Selector,
};
use omnipoint::{AreaUnit, FreqTable};

fn distance(p: ProjectionMode) -> Mode {
    Mode::new(p, Selector::Distance)
}

fn negative_distance_model() -> ModelFile {
    ModelFile {
        schema_version: SCHEMA_VERSION,
        weights: [-1.0, 0.0, 0.0, 0.0, 0.0],
        bias: 0.0,
        means: [0.0; 5],
        stds: [1.0; 5],
        constant: [false; 5],
        freq_table: FreqTable::new(),
        metadata: ModelMetadata {
            c: 0.0,
            seed: 0,
            tol: 0.0,
            training_size: 0,
            positives: 0,
            iterations: 0,
            objective: 0.0,
            projection: ProjectionMode::TABLE[2],
            area_unit: AreaUnit::Steradian,
            freq_scope: FreqScope::Image,
            scenes_used: 0,
            scenes_skipped: 0,
            features: FEATURE_NAMES.map(String::from),
        },
    }
}

#[test]
fn on_circle_target_ranks_first_in_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Clean, 0, 5, 3);
    let cfg = PipelineConfig::default();
    for scene in &ds.scenes {
        for p in ProjectionMode::TABLE {
            let r = estimate(scene, &cfg, distance(p), None).unwrap();
            assert!(r.correct(), "{} {}", scene.id, p.label());
            assert!(r.ranking[0].features.d < 1e-6, "d = {}", r.ranking[0].features.d);
            assert_eq!(r.views.is_empty(), !p.projection_detection);
        }
    }
}

#[test]
fn ranking_is_ordered_and_numbered() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Distractors, 0, 3, 4);
    for scene in &ds.scenes {
        let r = estimate(scene, &PipelineConfig::default(), distance(ProjectionMode::TABLE[2]), None).unwrap();
        assert!(r.ranking.len() >= 6);
        for (k, c) in r.ranking.iter().enumerate() {
            assert_eq!(c.rank, k + 1);
            assert_eq!(c.score, -c.features.d);
        }
        for pair in r.ranking.windows(2) {
            assert!(pair[0].score > pair[1].score || (pair[0].score == pair[1].score && pair[0].id < pair[1].id));
        }
    }
}

#[test]
fn negative_distance_weights_reproduce_the_distance_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Hard, 0, 6, 5);
    let cfg = PipelineConfig::default();
    let model = negative_distance_model();
    for scene in &ds.scenes {
        for p in ProjectionMode::TABLE {
            let d = estimate(scene, &cfg, distance(p), None).unwrap();
            let s = estimate(scene, &cfg, Mode::new(p, Selector::Svc), Some(&model)).unwrap();
            let ids = |r: &omnipoint_pipeline::ResultRecord| r.ranking.iter().map(|c| c.id).collect::<Vec<_>>();
            assert_eq!(ids(&d), ids(&s));
        }
    }
}

#[test]
fn user_is_never_a_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Distractors, 0, 4, 6);
    for scene in &ds.scenes {
        for p in ProjectionMode::TABLE {
            let r = estimate(scene, &PipelineConfig::default(), distance(p), None).unwrap();
            assert!(r.ranking.iter().all(|c| c.category != "person"));
        }
    }
}

#[test]
fn missing_skeleton_names_the_scene() {
    let dir = tempfile::tempdir().unwrap();
    common::synth(dir.path(), Preset::Clean, 0, 2, 7);
    common::edit_manifest(dir.path(), |m| m.scenes[1].skeleton.view = None);
    let ds = common::load(dir.path());
    let scene = &ds.scenes[1];
    let err = estimate(scene, &PipelineConfig::default(), distance(ProjectionMode::TABLE[1]), None).unwrap_err();
    assert!(matches!(err, PipelineError::MissingFixture { .. }));
    assert!(err.to_string().contains(&scene.id), "{err}");
    // the equirect skeleton still serves the first column
    estimate(scene, &PipelineConfig::default(), distance(ProjectionMode::TABLE[0]), None).unwrap();
}

#[test]
fn missing_view_detections_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    common::synth(dir.path(), Preset::Clean, 0, 1, 8);
    common::edit_manifest(dir.path(), |m| m.scenes[0].detections.views.clear());
    let ds = common::load(dir.path());
    let err = estimate(&ds.scenes[0], &PipelineConfig::default(), distance(ProjectionMode::TABLE[2]), None).unwrap_err();
    assert!(err.to_string().contains("per-view detections"), "{err}");
}

#[test]
fn svc_needs_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Clean, 0, 1, 9);
    let err = estimate(&ds.scenes[0], &PipelineConfig::default(), Mode::new(ProjectionMode::TABLE[0], Selector::Svc), None)
        .unwrap_err();
    assert!(matches!(err, PipelineError::MissingModel));
}

#[test]
fn fixtures_for_other_views_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Clean, 0, 1, 10);
    let cfg = PipelineConfig { step_deg: 25.0, ..Default::default() };
    let err = estimate(&ds.scenes[0], &cfg, distance(ProjectionMode::TABLE[2]), None).unwrap_err();
    assert!(matches!(err, PipelineError::ViewMismatch { .. }), "{err}");
    // equirect detections do not depend on the scan views
    estimate(&ds.scenes[0], &cfg, distance(ProjectionMode::TABLE[0]), None).unwrap();
}

#[test]
fn estimate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Distractors, 0, 2, 11);
    let cfg = PipelineConfig::default();
    for scene in &ds.scenes {
        let mode = distance(ProjectionMode::TABLE[2]);
        let a = to_json_bytes(&estimate(scene, &cfg, mode, None).unwrap()).unwrap();
        let b = to_json_bytes(&estimate(scene, &cfg, mode, None).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn scene_without_ground_truth_is_never_correct() {
    let dir = tempfile::tempdir().unwrap();
    common::synth(dir.path(), Preset::Clean, 0, 1, 12);
    common::edit_manifest(dir.path(), |m| m.scenes[0].ground_truth = None);
    let ds = common::load(dir.path());
    let r = estimate(&ds.scenes[0], &PipelineConfig::default(), distance(ProjectionMode::TABLE[0]), None).unwrap();
    assert_eq!(r.matched_gt, None);
    assert!(!r.correct());
}
