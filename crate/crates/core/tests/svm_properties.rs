use nalgebra::{DMatrix, DVector};
use omnipoint::scan::{build_candidates, DetectionFrame};
use omnipoint::select::{rank_by_distance, rank_by_svc, primal_objective, train_svc, SvcFit};
use omnipoint::select::{decision_value, FeatureRow};
use omnipoint::{Detection, EquirectGrid, FeatureVector, PixelRect, ScanConfig, Standardizer, SvcParams, SvmModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(a: &FeatureRow, b: &FeatureRow) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_problem(rng: &mut impl Rng, n: usize) -> (Vec<FeatureRow>, Vec<f64>) {
    loop {
        let x: Vec<FeatureRow> = (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0))).collect();
        let y: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        if y.contains(&1.0) && y.contains(&-1.0) {
            return (x, y);
        }
    }
}

/// Exact solution of the dual by enumerating which multipliers sit at 0, at
/// C, or strictly between, solving the equality-constrained system for the
/// free ones and keeping the first assignment that satisfies every KKT
/// condition. Returns `(w, b, has_free)`.
fn enumerate_dual(x: &[FeatureRow], y: &[f64], c: f64) -> Option<(FeatureRow, f64, bool)> {
    let n = x.len();
    let q = |i: usize, j: usize| y[i] * y[j] * dot(&x[i], &x[j]);
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut k = code;
        for s in state.iter_mut() {
            *s = (k % 3) as u8;
            k /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let upper: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut alpha = vec![0.0; n];
        for &i in &upper {
            alpha[i] = c;
        }
        let mut bias = None;
        if !free.is_empty() {
            let m = free.len();
            let mut a = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q(i, j);
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                rhs[r] = 1.0 - upper.iter().map(|&j| c * q(i, j)).sum::<f64>();
            }
            rhs[m] = -upper.iter().map(|&j| c * y[j]).sum::<f64>();
            let Some(sol) = a.lu().solve(&rhs) else { continue };
            if free.iter().enumerate().any(|(r, _)| !(sol[r] > 1e-9 && sol[r] < c - 1e-9)) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
            bias = Some(sol[m]);
        } else if upper.iter().map(|&j| y[j]).sum::<f64>().abs() > 1e-12 {
            continue;
        }
        let mut w = [0.0; 5];
        for i in 0..n {
            for (wk, xk) in w.iter_mut().zip(&x[i]) {
                *wk += alpha[i] * y[i] * xk;
            }
        }
        // margins without bias; KKT bounds the bias from each side
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let m = dot(&w, &x[i]);
            // y(m + b) >= 1 at alpha = 0, <= 1 at alpha = C
            let bound = y[i] - m;
            match (state[i], y[i] > 0.0) {
                (0, true) | (1, false) => lo = lo.max(bound),
                (0, false) | (1, true) => hi = hi.min(bound),
                _ => {}
            }
        }
        let b = match bias {
            Some(b) if b >= lo - 1e-9 && b <= hi + 1e-9 => b,
            Some(_) => continue,
            None if lo <= hi + 1e-9 => {
                let (lo, hi) = (lo.max(-1e6), hi.min(1e6));
                (lo + hi) / 2.0
            }
            None => continue,
        };
        return Some((w, b, bias.is_some()));
    }
    None
}

#[test]
fn smo_matches_exact_dual_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut compared = 0;
    while compared < 50 {
        let n = rng.random_range(3..=6);
        let (x, y) = random_problem(&mut rng, n);
        let c = rng.random_range(0.1..10.0);
        let fit = train_svc(&x, &y, &SvcParams { c, tol: 1e-10, ..Default::default() }).unwrap();
        let (w, b, has_free) = enumerate_dual(&x, &y, c).expect("some active set satisfies KKT");
        let wdiff: f64 = w.iter().zip(&fit.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(wdiff < 1e-6, "weights differ by {wdiff}");
        let (p_oracle, p_smo) = (primal_objective(&x, &y, &w, b, c), fit.objective);
        assert!((p_oracle - p_smo).abs() <= 1e-6 * p_oracle.max(1.0), "{p_oracle} vs {p_smo}");
        if has_free {
            assert!((b - fit.bias).abs() < 1e-6, "bias {b} vs {}", fit.bias);
        }
        // decisions agree wherever the oracle is not on the fence
        for _ in 0..50 {
            let p: FeatureRow = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
            let (fo, fs) = (dot(&w, &p) + b, dot(&fit.weights, &p) + fit.bias);
            if has_free && fo.abs() > 1e-4 {
                assert_eq!(fo > 0.0, fs > 0.0);
            }
        }
        compared += 1;
    }
}

#[test]
fn dual_trace_decreases_and_run_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    for _ in 0..30 {
        let n = rng.random_range(10..200);
        let (x, y) = random_problem(&mut rng, n);
        let params = SvcParams { c: rng.random_range(0.1..10.0), ..Default::default() };
        let fit = train_svc(&x, &y, &params).unwrap();
        // either KKT-optimal or stopped on a settled objective at the cap
        assert!(fit.kkt_gap <= params.tol || fit.iterations == params.max_iter, "gap {}", fit.kkt_gap);
        for pair in fit.dual_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0), "{} -> {}", pair[0], pair[1]);
        }
        // weak duality gap closes at the optimum
        let dual = *fit.dual_trace.last().unwrap();
        assert!((fit.objective + dual).abs() < 1e-3 * fit.objective.max(1.0), "{} vs {}", fit.objective, -dual);
        let sum: f64 = fit.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(sum.abs() < 1e-9);
        assert!(fit.alphas.iter().all(|&a| (0.0..=params.c).contains(&a)));
    }
}

#[test]
fn retraining_is_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let (x, y) = random_problem(&mut rng, 300);
    let params = SvcParams { seed: 9, ..Default::default() };
    let a = train_svc(&x, &y, &params).unwrap();
    let b = train_svc(&x, &y, &params).unwrap();
    assert_eq!(a, b);
    let bits = |f: &SvcFit| {
        f.weights.iter().chain([&f.bias]).map(|v| v.to_bits()).collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn seed_only_changes_the_path_not_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let (x, y) = random_problem(&mut rng, 120);
    let a = train_svc(&x, &y, &SvcParams { seed: 1, ..Default::default() }).unwrap();
    let b = train_svc(&x, &y, &SvcParams { seed: 2, ..Default::default() }).unwrap();
    assert!((a.objective - b.objective).abs() < 1e-5 * a.objective.max(1.0));
}

fn column_stats(rows: &[FeatureRow], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

proptest! {
    #[test]
    fn standardized_columns_are_centred_and_unit(
        rows in prop::collection::vec(prop::array::uniform5(-1e3f64..1e3), 2..60),
    ) {
        let s = Standardizer::fit(&rows).unwrap();
        let z = s.transform_all(&rows);
        for j in 0..5 {
            let (mean, std) = column_stats(&z, j);
            prop_assert!(mean.abs() < 1e-9);
            if s.constant[j] {
                prop_assert!(z.iter().all(|r| r[j] == 0.0));
            } else {
                prop_assert!((std - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn standardizing_ignores_affine_rescaling(
        rows in prop::collection::vec(prop::array::uniform5(-10f64..10.0), 3..30),
        scale in prop::array::uniform5(0.01f64..100.0),
        shift in prop::array::uniform5(-100f64..100.0),
    ) {
        let moved: Vec<FeatureRow> = rows.iter().map(|r| std::array::from_fn(|j| r[j] * scale[j] + shift[j])).collect();
        let (a, b) = (Standardizer::fit(&rows).unwrap(), Standardizer::fit(&moved).unwrap());
        for (ra, rb) in a.transform_all(&rows).iter().zip(b.transform_all(&moved)) {
            for j in 0..5 {
                if !a.constant[j] && !b.constant[j] {
                    prop_assert!((ra[j] - rb[j]).abs() < 1e-6);
                }
            }
        }
    }
}

#[test]
fn model_decisions_survive_unit_changes() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let (x, y) = random_problem(&mut rng, 80);
    let scale = [3.0, 0.001, 50.0, 1e4, 0.2];
    let moved: Vec<FeatureRow> = x.iter().map(|r| std::array::from_fn(|j| r[j] * scale[j] + 7.0)).collect();
    let params = SvcParams::default();
    let (ma, _) = SvmModel::fit(&x, &y, Default::default(), &params).unwrap();
    let (mb, _) = SvmModel::fit(&moved, &y, Default::default(), &params).unwrap();
    for (ra, rb) in x.iter().zip(&moved) {
        let da = decision_value(&ma, &FeatureVector::from_array(*ra));
        let db = decision_value(&mb, &FeatureVector::from_array(*rb));
        assert!((da - db).abs() < 1e-5, "{da} vs {db}");
    }
}

#[test]
fn rankings_match_recomputed_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let g = EquirectGrid::new(360, 180).unwrap();
    let (x, y) = random_problem(&mut rng, 60);
    let (model, _) = SvmModel::fit(&x, &y, Default::default(), &SvcParams::default()).unwrap();
    for _ in 0..50 {
        let dets: Vec<Detection> = (0..rng.random_range(1..15))
            .map(|i| Detection {
                category: format!("c{i}"),
                bbox: PixelRect::new(i as f64 * 20.0, 50.0, i as f64 * 20.0 + 10.0, 60.0),
                confidence: 0.5,
                view_index: 0,
            })
            .collect();
        let mut cands = build_candidates(&dets, DetectionFrame::Equirect(&g), None, &ScanConfig::default()).unwrap();
        for c in cands.iter_mut() {
            // coarse values so ties actually happen
            c.features = FeatureVector::from_array(std::array::from_fn(|_| rng.random_range(0..4) as f64 * 0.5));
        }
        let mut by_d: Vec<(f64, usize)> = cands.iter().map(|c| (-c.features.d, c.id)).collect();
        by_d.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        assert_eq!(rank_by_distance(&cands).ids(), by_d.iter().map(|e| e.1).collect::<Vec<_>>());

        let mut by_s: Vec<(f64, usize)> = cands
            .iter()
            .map(|c| {
                let z = model.standardizer.transform(&c.features.to_array());
                (dot(&model.weights, &z) + model.bias, c.id)
            })
            .collect();
        by_s.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let ranking = rank_by_svc(&model, &cands);
        assert_eq!(ranking.ids(), by_s.iter().map(|e| e.1).collect::<Vec<_>>());
        for (e, (s, _)) in ranking.entries.iter().zip(&by_s) {
            assert_eq!(e.score, *s);
        }
    }
}
