use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataset::{Dataset, Scene};
use crate::error::{PipelineError, Result};
use crate::estimate::estimate;
use crate::schema::{Mode, ModelFile, ProjectionMode, ResultRecord, Selector, Split, SCHEMA_VERSION};
use crate::train::train;

/// Both selectors over the three projection modes, row by row.
pub fn all_modes() -> Vec<Mode> {
    [Selector::Distance, Selector::Svc]
        .into_iter()
        .flat_map(|s| ProjectionMode::TABLE.into_iter().map(move |p| Mode::new(p, s)))
        .collect()
}

/// Top-1 accuracy of one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mode: Mode,
    /// `None` when the mode could not run at all, e.g. no model could be trained.
    pub accuracy: Option<f64>,
    pub correct: usize,
    pub total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Outcome for one scene under one mode. A failed scene counts as incorrect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneOutcome {
    pub scene_id: String,
    pub mode: Mode,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<ResultRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub cells: Vec<Cell>,
    /// Grouped by mode in `cells` order, then by scene id.
    pub scenes: Vec<SceneOutcome>,
}

impl EvalReport {
    pub fn cell(&self, mode: Mode) -> Option<&Cell> {
        self.cells.iter().find(|c| c.mode == mode)
    }

    /// Selector rows against projection-mode columns.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<10}", "selector");
        for p in ProjectionMode::TABLE {
            let _ = write!(out, " | {:<38}", p.label());
        }
        out.push('\n');
        for sel in [Selector::Distance, Selector::Svc] {
            let name = match sel {
                Selector::Distance => "distance",
                Selector::Svc => "svc",
            };
            let _ = write!(out, "{name:<10}");
            for p in ProjectionMode::TABLE {
                let text = match self.cell(Mode::new(p, sel)) {
                    Some(Cell { accuracy: Some(a), correct, total, .. }) => format!("{a:.4} ({correct}/{total})"),
                    Some(Cell { accuracy: None, .. }) => "n/a".to_string(),
                    None => "-".to_string(),
                };
                let _ = write!(out, " | {text:<38}");
            }
            out.push('\n');
        }
        for c in self.cells.iter().filter(|c| c.note.is_some()) {
            let _ = writeln!(out, "note ({:?}, {}): {}", c.mode.selector, c.mode.projection().label(), c.note.as_deref().unwrap_or(""));
        }
        out
    }
}

fn outcome(scene: &Scene, mode: Mode, result: Result<ResultRecord>) -> SceneOutcome {
    match result {
        Ok(r) => SceneOutcome { scene_id: scene.id.clone(), mode, correct: r.correct(), result: Some(r), error: None },
        Err(e) => SceneOutcome { scene_id: scene.id.clone(), mode, correct: false, result: None, error: Some(e.to_string()) },
    }
}

/// Runs every mode on the test split. The SVC rows use `model` when given;
/// otherwise a model is trained on the train split for each projection mode.
pub fn evaluate(dataset: &Dataset, cfg: &PipelineConfig, modes: &[Mode], model: Option<&ModelFile>) -> Result<EvalReport> {
    cfg.validate()?;
    let test = dataset.split(Split::Test);
    if test.is_empty() {
        return Err(PipelineError::NoScenes);
    }
    let mut cells = Vec::with_capacity(modes.len());
    let mut scenes = Vec::new();
    for &mode in modes {
        let trained;
        let model: std::result::Result<Option<&ModelFile>, String> = match (mode.selector, model) {
            (Selector::Distance, _) => Ok(None),
            (Selector::Svc, Some(m)) => Ok(Some(m)),
            (Selector::Svc, None) => match train(dataset, cfg, mode.projection()) {
                Ok(t) => {
                    trained = t.model;
                    Ok(Some(&trained))
                }
                Err(e) => Err(e.to_string()),
            },
        };
        let model = match model {
            Ok(m) => m,
            Err(note) => {
                cells.push(Cell { mode, accuracy: None, correct: 0, total: test.len(), note: Some(note.clone()) });
                scenes.extend(test.iter().map(|s| SceneOutcome {
                    scene_id: s.id.clone(),
                    mode,
                    correct: false,
                    result: None,
                    error: Some(format!("no model: {note}")),
                }));
                continue;
            }
        };
        let outcomes: Vec<SceneOutcome> =
            test.par_iter().map(|s| outcome(s, mode, estimate(s, cfg, mode, model))).collect();
        let correct = outcomes.iter().filter(|o| o.correct).count();
        cells.push(Cell { mode, accuracy: Some(correct as f64 / test.len() as f64), correct, total: test.len(), note: None });
        scenes.extend(outcomes);
    }
    Ok(EvalReport { schema_version: SCHEMA_VERSION, cells, scenes })
}
