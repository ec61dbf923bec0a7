//! Candidate ranking: the distance baseline and a linear SVM over the five
//! standardized features.

mod rank;
mod standardize;
mod svc;

use std::collections::BTreeMap;

use thiserror::Error;

pub use rank::{rank_by_distance, rank_by_svc, Ranking, RankEntry};
pub use standardize::Standardizer;
pub use svc::{decision_value, primal_objective, train_svc, SvcFit, SvcParams, SvmMetadata, SvmModel};

use crate::scan::FreqTable;

/// Number of explanatory variables: d, l, c, a, h.
pub const NUM_FEATURES: usize = 5;

pub type FeatureRow = [f64; NUM_FEATURES];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectError {
    #[error("frequency table needs at least one detected object")]
    EmptyCorpus,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("solver still improving after {iterations} iterations (KKT gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("invalid training input: {0}")]
    InvalidInput(String),
}

/// `q / S` per category over every candidate of the corpus.
pub fn build_freq_table<I, S>(categories: I) -> Result<FreqTable, SelectError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for c in categories {
        *counts.entry(c.as_ref().to_string()).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Err(SelectError::EmptyCorpus);
    }
    Ok(counts.into_iter().map(|(k, q)| (k, q as f64 / total as f64)).collect())
}
