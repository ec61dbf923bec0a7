//! Linear soft-margin SVM trained by SMO on the dual problem.
//!
//! Primal: `min ½‖w‖² + C Σ max(0, 1 − yᵢ(w·xᵢ + b))`, bias unregularized.
//! Dual: `min ½αᵀQα − Σα` s.t. `0 ≤ α ≤ C`, `yᵀα = 0`, `Q = (yᵢyⱼ xᵢ·xⱼ)`.
//! Pairs are picked with second-order working-set selection; the dual
//! objective decreases monotonically and the run stops once the maximal KKT
//! violation drops to `tol`, or at `max_iter` if the objective has stalled.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FeatureRow, SelectError, Standardizer, NUM_FEATURES};
use crate::scan::{FeatureVector, FreqTable};

/// Floor for non-positive curvature in the two-variable subproblem.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvcParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Shuffles the sample visiting order, which decides ties in pair
    /// selection.
    pub seed: u64,
}

impl Default for SvcParams {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-6, max_iter: 100_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvcFit {
    pub weights: FeatureRow,
    pub bias: f64,
    /// Dual multipliers in input order.
    pub alphas: Vec<f64>,
    /// Primal objective at the returned `(w, b)`.
    pub objective: f64,
    /// Dual objective (minimization form) after each iteration, starting
    /// with the initial value 0.
    pub dual_trace: Vec<f64>,
    pub iterations: usize,
    pub kkt_gap: f64,
}

fn dot(a: &FeatureRow, b: &FeatureRow) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn primal_objective(x: &[FeatureRow], y: &[f64], w: &FeatureRow, b: f64, c: f64) -> f64 {
    let hinge: f64 = x.iter().zip(y).map(|(xi, yi)| (1.0 - yi * (dot(w, xi) + b)).max(0.0)).sum();
    0.5 * dot(w, w) + c * hinge
}

/// Whether a run that hit `max_iter` has stopped improving: the dual
/// objective fell by at most `tol` (relative) over the last 1% of the
/// iterations. Linear kernels with large C can crawl towards a KKT gap of
/// `tol` long after the objective has settled.
fn stalled(trace: &[f64], params: &SvcParams) -> bool {
    let window = (params.max_iter / 100).max(1);
    if trace.len() <= window {
        return false;
    }
    let last = trace[trace.len() - 1];
    trace[trace.len() - 1 - window] - last <= params.tol * last.abs().max(1.0)
}

/// Trains on already-standardized rows. Labels must be ±1.
pub fn train_svc(x: &[FeatureRow], y: &[f64], params: &SvcParams) -> Result<SvcFit, SelectError> {
    if x.len() != y.len() {
        return Err(SelectError::InvalidInput(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(SelectError::InvalidInput(format!("label {bad} is not ±1")));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SelectError::InvalidInput("non-finite feature".into()));
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(SelectError::InvalidInput(format!("C = {}", params.c)));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(SelectError::SingleClass);
    }

    let n = x.len();
    let c = params.c;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let xs: Vec<FeatureRow> = order.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let kd: Vec<f64> = xs.iter().map(|r| dot(r, r)).collect();

    let mut alpha = vec![0.0; n];
    let mut w = [0.0; NUM_FEATURES];
    let mut grad = vec![-1.0; n];
    let mut trace = vec![0.0];
    let mut iterations = 0;
    let mut gap = f64::INFINITY;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < params.max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], ys[t]) && -ys[t] * grad[t] > gmax {
                gmax = -ys[t] * grad[t];
                i = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], ys[t]) {
                continue;
            }
            gmax2 = gmax2.max(ys[t] * grad[t]);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + ys[t] * grad[t];
            if b > 0.0 {
                let mut a = kd[i] + kd[t] - 2.0 * dot(&xs[i], &xs[t]);
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        gap = gmax + gmax2;
        if gap <= params.tol || i == usize::MAX || j == usize::MAX {
            break;
        }

        let (ai, aj) = (alpha[i], alpha[j]);
        let qij = ys[i] * ys[j] * dot(&xs[i], &xs[j]);
        if ys[i] != ys[j] {
            let mut quad = kd[i] + kd[j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kd[i] + kd[j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = ((alpha[i] - ai) * ys[i], (alpha[j] - aj) * ys[j]);
        for k in 0..NUM_FEATURES {
            w[k] += di * xs[i][k] + dj * xs[j][k];
        }
        for t in 0..n {
            grad[t] = ys[t] * dot(&w, &xs[t]) - 1.0;
        }
        iterations += 1;
        trace.push(0.5 * dot(&w, &w) - alpha.iter().sum::<f64>());
    }
    if gap > params.tol && !stalled(&trace, params) {
        return Err(SelectError::NotConverged { iterations, gap });
    }

    // bias: average over free vectors, else the middle of the KKT interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if ys[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if ys[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 { free_sum / free_n as f64 } else { (ub + lb) / 2.0 };
    let bias = -rho;

    let mut alphas = vec![0.0; n];
    for (k, &orig) in order.iter().enumerate() {
        alphas[orig] = alpha[k];
    }
    let objective = primal_objective(x, y, &w, bias, c);
    Ok(SvcFit { weights: w, bias, alphas, objective, dual_trace: trace, iterations, kkt_gap: gap })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmMetadata {
    pub c: f64,
    pub seed: u64,
    pub tol: f64,
    pub training_size: usize,
    pub positives: usize,
    pub iterations: usize,
    pub objective: f64,
}

/// Everything needed to score candidates with the learned selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: FeatureRow,
    pub bias: f64,
    pub standardizer: Standardizer,
    pub freq_table: FreqTable,
    pub metadata: SvmMetadata,
}

impl SvmModel {
    /// Fits the standardizer on `raw`, then the SVM on the standardized rows.
    pub fn fit(
        raw: &[FeatureRow],
        y: &[f64],
        freq_table: FreqTable,
        params: &SvcParams,
    ) -> Result<(Self, SvcFit), SelectError> {
        let standardizer = Standardizer::fit(raw)?;
        let x = standardizer.transform_all(raw);
        let fit = train_svc(&x, y, params)?;
        let model = SvmModel {
            weights: fit.weights,
            bias: fit.bias,
            standardizer,
            freq_table,
            metadata: SvmMetadata {
                c: params.c,
                seed: params.seed,
                tol: params.tol,
                training_size: raw.len(),
                positives: y.iter().filter(|&&v| v > 0.0).count(),
                iterations: fit.iterations,
                objective: fit.objective,
            },
        };
        Ok((model, fit))
    }

    /// Fixed linear scorer without training, e.g. for baselines.
    pub fn from_weights(weights: FeatureRow, bias: f64, standardizer: Standardizer, freq_table: FreqTable) -> Self {
        Self {
            weights,
            bias,
            standardizer,
            freq_table,
            metadata: SvmMetadata { c: 0.0, seed: 0, tol: 0.0, training_size: 0, positives: 0, iterations: 0, objective: 0.0 },
        }
    }
}

/// `w · standardize(f) + b`.
pub fn decision_value(m: &SvmModel, f: &FeatureVector) -> f64 {
    let z = m.standardizer.transform(&f.to_array());
    dot(&m.weights, &z) + m.bias
}
