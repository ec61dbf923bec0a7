use serde::{Deserialize, Serialize};

use super::{FeatureRow, SelectError, NUM_FEATURES};

/// Per-feature affine map to zero mean and unit (population) variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: FeatureRow,
    pub stds: FeatureRow,
    /// Columns that were constant in training; they map to 0.
    #[serde(default)]
    pub constant: [bool; NUM_FEATURES],
}

impl Standardizer {
    pub fn identity() -> Self {
        Self { means: [0.0; NUM_FEATURES], stds: [1.0; NUM_FEATURES], constant: [false; NUM_FEATURES] }
    }

    pub fn fit(rows: &[FeatureRow]) -> Result<Self, SelectError> {
        if rows.len() < 2 {
            return Err(SelectError::TooFewSamples { needed: 2, got: rows.len() });
        }
        let n = rows.len() as f64;
        let mut s = Self::identity();
        for j in 0..NUM_FEATURES {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            // second pass absorbs the rounding in the mean
            let corr = rows.iter().map(|r| r[j] - mean).sum::<f64>() / n;
            let mean = mean + corr;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            s.means[j] = mean;
            if std > 1e-12 * mean.abs().max(1.0) {
                s.stds[j] = std;
            } else {
                s.stds[j] = 1.0;
                s.constant[j] = true;
            }
        }
        Ok(s)
    }

    pub fn transform(&self, row: &FeatureRow) -> FeatureRow {
        let mut out = [0.0; NUM_FEATURES];
        for j in 0..NUM_FEATURES {
            out[j] = if self.constant[j] { 0.0 } else { (row[j] - self.means[j]) / self.stds[j] };
        }
        out
    }

    pub fn transform_all(&self, rows: &[FeatureRow]) -> Vec<FeatureRow> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}
