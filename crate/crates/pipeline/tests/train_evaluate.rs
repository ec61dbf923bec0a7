mod common;

use omnipoint_pipeline::schema::{read_json, to_json_bytes, write_json};
use omnipoint_pipeline::synth::Preset;
use omnipoint_pipeline::train::FEATURE_NAMES;
use omnipoint_pipeline::{
    all_modes, estimate, evaluate, train, Mode, ModelFile, PipelineConfig, PipelineError, ProjectionMode, Selector,
    Split,
};

#[test]
fn trained_model_ranks_its_training_targets_first() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Hard, 12, 0, 21);
    let cfg = PipelineConfig::default();
    for p in ProjectionMode::TABLE {
        let out = train(&ds, &cfg, p).unwrap();
        assert!(out.skipped.is_empty(), "{:?}", out.skipped);
        let m = &out.model;
        assert_eq!(m.metadata.projection, p);
        assert_eq!(m.metadata.scenes_used, 12);
        assert_eq!(m.metadata.features, FEATURE_NAMES.map(String::from));
        assert!(m.metadata.positives == 12 && m.metadata.training_size > 12);
        m.check().unwrap();
        for scene in ds.split(Split::Train) {
            let r = estimate(scene, &cfg, Mode::new(p, Selector::Svc), Some(m)).unwrap();
            assert!(r.correct(), "{} {}", scene.id, p.label());
        }
    }
}

#[test]
fn retraining_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Hard, 8, 0, 22);
    let cfg = PipelineConfig::default();
    let a = train(&ds, &cfg, ProjectionMode::TABLE[2]).unwrap().model;
    let b = train(&ds, &cfg, ProjectionMode::TABLE[2]).unwrap().model;
    assert_eq!(to_json_bytes(&a).unwrap(), to_json_bytes(&b).unwrap());

    let path = dir.path().join("model.json");
    write_json(&path, &a).unwrap();
    let back: ModelFile = read_json(&path).unwrap();
    assert_eq!(back, a);
}

#[test]
fn unmatched_scenes_are_skipped_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    common::synth(dir.path(), Preset::Hard, 4, 0, 23);
    common::edit_manifest(dir.path(), |m| m.scenes[2].ground_truth.as_mut().unwrap().category = "zebra".into());
    let ds = common::load(dir.path());
    let out = train(&ds, &PipelineConfig::default(), ProjectionMode::TABLE[0]).unwrap();
    assert_eq!(out.skipped.len(), 1);
    assert_eq!(out.skipped[0].0, ds.scenes[2].id);
    assert_eq!((out.model.metadata.scenes_used, out.model.metadata.scenes_skipped), (3, 1));
}

#[test]
fn no_matching_scene_means_no_positives() {
    let dir = tempfile::tempdir().unwrap();
    common::synth(dir.path(), Preset::Clean, 3, 0, 24);
    common::edit_manifest(dir.path(), |m| {
        for s in &mut m.scenes {
            s.ground_truth.as_mut().unwrap().category = "zebra".into();
        }
    });
    let ds = common::load(dir.path());
    let err = train(&ds, &PipelineConfig::default(), ProjectionMode::TABLE[0]).unwrap_err();
    assert!(matches!(err, PipelineError::NoPositives { skipped: 3 }), "{err}");
}

#[test]
fn empty_splits_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Clean, 2, 0, 25);
    let cfg = PipelineConfig::default();
    assert!(matches!(evaluate(&ds, &cfg, &all_modes(), None), Err(PipelineError::NoScenes)));

    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Clean, 0, 2, 26);
    assert!(matches!(train(&ds, &cfg, ProjectionMode::TABLE[0]), Err(PipelineError::NoScenes)));
}

#[test]
fn accuracy_counts_correct_scenes() {
    let dir = tempfile::tempdir().unwrap();
    common::synth(dir.path(), Preset::Clean, 0, 3, 27);
    common::edit_manifest(dir.path(), |m| m.scenes[1].ground_truth.as_mut().unwrap().category = "zebra".into());
    let ds = common::load(dir.path());
    let modes: Vec<Mode> = ProjectionMode::TABLE.into_iter().map(|p| Mode::new(p, Selector::Distance)).collect();
    let report = evaluate(&ds, &PipelineConfig::default(), &modes, None).unwrap();
    for cell in &report.cells {
        assert_eq!((cell.correct, cell.total), (2, 3));
        assert_eq!(cell.accuracy, Some(2.0 / 3.0));
    }
    let wrong: Vec<&str> = report.scenes.iter().filter(|o| !o.correct).map(|o| o.scene_id.as_str()).collect();
    assert_eq!(wrong, vec![ds.scenes[1].id.as_str(); 3]);
    assert!(report.table().contains("0.6667 (2/3)"), "{}", report.table());
}

#[test]
fn failed_training_becomes_a_note() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Clean, 0, 2, 28);
    let report = evaluate(&ds, &PipelineConfig::default(), &all_modes(), None).unwrap();
    assert_eq!(report.cells.len(), 6);
    for cell in &report.cells {
        match cell.mode.selector {
            Selector::Distance => assert_eq!(cell.accuracy, Some(1.0)),
            Selector::Svc => {
                assert_eq!(cell.accuracy, None);
                assert!(cell.note.is_some());
            }
        }
    }
    let svc: Vec<_> = report.scenes.iter().filter(|o| o.mode.selector == Selector::Svc).collect();
    assert_eq!(svc.len(), 6);
    assert!(svc.iter().all(|o| !o.correct && o.error.as_deref().unwrap().starts_with("no model:")));
    let table = report.table();
    assert!(table.contains("n/a") && table.contains("note"), "{table}");
}

#[test]
fn a_given_model_serves_every_svc_column() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Hard, 10, 5, 29);
    let cfg = PipelineConfig::default();
    let model = train(&ds, &cfg, ProjectionMode::TABLE[2]).unwrap().model;
    let report = evaluate(&ds, &cfg, &all_modes(), Some(&model)).unwrap();
    for o in report.scenes.iter().filter(|o| o.mode.selector == Selector::Svc) {
        let expected = estimate(ds.scene(&o.scene_id).unwrap(), &cfg, o.mode, Some(&model)).unwrap();
        assert_eq!(o.result.as_ref(), Some(&expected));
    }
}

#[test]
fn report_groups_outcomes_by_mode_then_scene() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::synth(dir.path(), Preset::Hard, 6, 4, 30);
    let report = evaluate(&ds, &PipelineConfig::default(), &all_modes(), None).unwrap();
    let test: Vec<&str> = ds.split(Split::Test).iter().map(|s| s.id.as_str()).collect();
    let expected: Vec<(Mode, &str)> = all_modes().into_iter().flat_map(|m| test.iter().map(move |s| (m, *s))).collect();
    let got: Vec<(Mode, &str)> = report.scenes.iter().map(|o| (o.mode, o.scene_id.as_str())).collect();
    assert_eq!(got, expected);
}
