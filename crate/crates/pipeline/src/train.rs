use rayon::prelude::*;

use omnipoint::select::build_freq_table;
use omnipoint::{FreqTable, SvmModel};

use crate::config::{FreqScope, PipelineConfig};
use crate::dataset::{Dataset, Scene};
use crate::error::{PipelineError, Result};
use crate::estimate::{featurize, image_freq_table, match_gt, scene_candidates, SceneCandidates};
use crate::schema::{ModelFile, ModelMetadata, ProjectionMode, Split, SCHEMA_VERSION};

pub const FEATURE_NAMES: [&str; 5] = ["d", "l", "c", "a", "h"];

/// A trained model plus the training scenes that did not contribute, with
/// the reason.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ModelFile,
    pub skipped: Vec<(String, String)>,
}

struct Usable<'a> {
    scene: &'a Scene,
    sc: SceneCandidates,
    positive: usize,
}

/// Trains on the train split of `dataset`. Every candidate of a scene whose
/// ground truth matches one of them becomes a sample: +1 for the match and
/// -1 for the rest. Scenes without a match are skipped.
pub fn train(dataset: &Dataset, cfg: &PipelineConfig, projection: ProjectionMode) -> Result<TrainOutcome> {
    train_scenes(&dataset.split(Split::Train), cfg, projection)
}

pub fn train_scenes(scenes: &[&Scene], cfg: &PipelineConfig, projection: ProjectionMode) -> Result<TrainOutcome> {
    cfg.validate()?;
    if scenes.is_empty() {
        return Err(PipelineError::NoScenes);
    }
    let processed: Vec<Result<SceneCandidates>> =
        scenes.par_iter().map(|s| scene_candidates(s, projection, cfg)).collect();

    let mut skipped = Vec::new();
    let mut usable = Vec::new();
    let mut all_categories: Vec<String> = Vec::new();
    for (scene, result) in scenes.iter().zip(processed) {
        let sc = match result {
            Ok(sc) => sc,
            Err(e) => {
                skipped.push((scene.id.clone(), e.to_string()));
                continue;
            }
        };
        all_categories.extend(sc.candidates.iter().map(|c| c.category.clone()));
        let Some(gt) = &scene.ground_truth else {
            skipped.push((scene.id.clone(), "no ground truth".into()));
            continue;
        };
        match match_gt(&sc.candidates, gt, cfg.gt_iou) {
            Some(positive) => usable.push(Usable { scene, sc, positive }),
            None => skipped.push((scene.id.clone(), "no candidate matches the ground truth".into())),
        }
    }
    if usable.is_empty() {
        return Err(PipelineError::NoPositives { skipped: skipped.len() });
    }

    let corpus: FreqTable = match cfg.freq_scope {
        FreqScope::Corpus => build_freq_table(&all_categories)?,
        FreqScope::Image => FreqTable::new(),
    };
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for u in &mut usable {
        let freq = match cfg.freq_scope {
            FreqScope::Corpus => corpus.clone(),
            FreqScope::Image => image_freq_table(&u.sc.candidates),
        };
        featurize(u.scene, &mut u.sc, &freq, cfg.area_unit);
        for c in &u.sc.candidates {
            rows.push(c.features.to_array());
            labels.push(if c.id == u.positive { 1.0 } else { -1.0 });
        }
    }

    let (model, fit) = SvmModel::fit(&rows, &labels, corpus, &cfg.svc())?;
    let meta = &model.metadata;
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        weights: model.weights,
        bias: model.bias,
        means: model.standardizer.means,
        stds: model.standardizer.stds,
        constant: model.standardizer.constant,
        freq_table: model.freq_table.clone(),
        metadata: ModelMetadata {
            c: meta.c,
            seed: meta.seed,
            tol: meta.tol,
            training_size: meta.training_size,
            positives: meta.positives,
            iterations: fit.iterations,
            objective: fit.objective,
            projection,
            area_unit: cfg.area_unit,
            freq_scope: cfg.freq_scope,
            scenes_used: usable.len(),
            scenes_skipped: skipped.len(),
            features: FEATURE_NAMES.map(String::from),
        },
    };
    Ok(TrainOutcome { model: file, skipped })
}
