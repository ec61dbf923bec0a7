use serde::{Deserialize, Serialize};

use super::{decision_value, SvmModel};
use crate::scan::Candidate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub id: usize,
    /// Higher is more likely the pointed-at object.
    pub score: f64,
}

/// Candidates in descending relevance; equal scores fall back to ascending id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    fn from_scores(mut entries: Vec<RankEntry>) -> Self {
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
        Self { entries }
    }

    pub fn ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.id).collect()
    }

    pub fn top(&self) -> Option<usize> {
        self.entries.first().map(|e| e.id)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ascending distance to the pointing circle; the score is `-d`.
pub fn rank_by_distance(cands: &[Candidate]) -> Ranking {
    Ranking::from_scores(cands.iter().map(|c| RankEntry { id: c.id, score: -c.features.d }).collect())
}

/// Descending SVM decision value.
pub fn rank_by_svc(m: &SvmModel, cands: &[Candidate]) -> Ranking {
    Ranking::from_scores(
        cands.iter().map(|c| RankEntry { id: c.id, score: decision_value(m, &c.features) }).collect(),
    )
}
