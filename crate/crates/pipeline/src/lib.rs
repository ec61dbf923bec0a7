//! Pointing-target estimation over fixture files: per-scene estimation,
//! SVC training, accuracy tables, synthetic scenes and annotated output.

// `!(x > 0.0)` is how NaN gets rejected along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotate;
pub mod config;
pub mod dataset;
pub mod error;
pub mod estimate;
pub mod evaluate;
mod font;
pub mod render;
pub mod schema;
pub mod synth;
pub mod train;

pub use config::{FreqScope, PipelineConfig};
pub use dataset::{Dataset, Scene};
pub use error::{PipelineError, Result};
pub use estimate::{estimate, match_gt};
pub use evaluate::{all_modes, evaluate, EvalReport};
pub use schema::{Mode, ModelFile, ProjectionMode, ResultRecord, Selector, Split};
pub use train::{train, TrainOutcome};
