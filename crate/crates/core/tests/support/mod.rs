//! Oracles, strategies and property bodies shared by the property suites and
//! the acceptance target. The oracles are written from the definitions and
//! share no code with the library.
#![allow(dead_code)]

use fwlog::learners::{best_split, loss_and_gradient};
use fwlog::metrics::{aggregate, confusion_matrix, per_class_prf, roc_auc_binary, ClassificationReport, ZeroDivision};
use fwlog::preprocess::ScalerParams;
use fwlog::Matrix;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const K: usize = 4;

pub type Check = Result<(), TestCaseError>;

// ---------------------------------------------------------------- metrics

pub struct Tally {
    pub counts: [[u64; K]; K],
    pub precision: [f64; K],
    pub recall: [f64; K],
    pub f1: [f64; K],
    pub support: [u64; K],
    pub accuracy: f64,
    pub macro_: [f64; 3],
    pub weighted: [f64; 3],
}

pub fn tally(t: &[usize], p: &[usize], zero_value: f64) -> Tally {
    let mut counts = [[0u64; K]; K];
    for a in 0..K {
        for b in 0..K {
            counts[a][b] = t.iter().zip(p).filter(|&(&x, &y)| x == a && y == b).count() as u64;
        }
    }
    let mut out = Tally {
        counts,
        precision: [0.0; K],
        recall: [0.0; K],
        f1: [0.0; K],
        support: [0; K],
        accuracy: t.iter().zip(p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64,
        macro_: [0.0; 3],
        weighted: [0.0; 3],
    };
    for k in 0..K {
        let tp = t.iter().zip(p).filter(|&(&a, &b)| a == k && b == k).count() as u64;
        let fp = t.iter().zip(p).filter(|&(&a, &b)| a != k && b == k).count() as u64;
        let fn_ = t.iter().zip(p).filter(|&(&a, &b)| a == k && b != k).count() as u64;
        let prec = if tp + fp == 0 { zero_value } else { tp as f64 / (tp + fp) as f64 };
        let rec = if tp + fn_ == 0 { zero_value } else { tp as f64 / (tp + fn_) as f64 };
        out.precision[k] = prec;
        out.recall[k] = rec;
        out.f1[k] = if prec + rec == 0.0 { 0.0 } else { 2.0 * prec * rec / (prec + rec) };
        out.support[k] = tp + fn_;
    }
    let n: u64 = out.support.iter().sum();
    for (j, col) in [out.precision, out.recall, out.f1].iter().enumerate() {
        out.macro_[j] = col.iter().sum::<f64>() / K as f64;
        out.weighted[j] = (0..K).map(|k| col[k] * out.support[k] as f64).sum::<f64>() / n as f64;
    }
    out
}

pub fn labels_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..=50).prop_flat_map(|n| (prop::collection::vec(0..K, n), prop::collection::vec(0..K, n)))
}

pub fn check_metrics(t: &[usize], p: &[usize], one: bool) -> Check {
    let policy = if one { ZeroDivision::One } else { ZeroDivision::Zero };
    let oracle = tally(t, p, if one { 1.0 } else { 0.0 });
    let cm = confusion_matrix(t, p).unwrap();
    prop_assert_eq!(cm.counts, oracle.counts);
    let rows = per_class_prf(&cm, policy).rows;
    for k in 0..K {
        prop_assert_eq!(rows[k].precision, oracle.precision[k]);
        prop_assert_eq!(rows[k].recall, oracle.recall[k]);
        prop_assert_eq!(rows[k].f1, oracle.f1[k]);
        prop_assert_eq!(rows[k].support, oracle.support[k]);
    }
    let report = ClassificationReport::build(t, p, None, policy).unwrap();
    prop_assert_eq!(report.accuracy, oracle.accuracy);
    let (m, w) = aggregate(&rows);
    prop_assert_eq!([m.precision, m.recall, m.f1], oracle.macro_);
    prop_assert_eq!([w.precision, w.recall, w.f1], oracle.weighted);
    prop_assert_eq!(report.macro_avg, m);
    prop_assert_eq!(report.weighted_avg, w);
    Ok(())
}

// ---------------------------------------------------------------- AUC

pub fn pairwise_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &pi) in positive.iter().enumerate() {
        for (j, &pj) in positive.iter().enumerate() {
            if pi && !pj {
                pairs += 1.0;
                wins += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

pub fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    // Coarse score grid so ties are common.
    (1usize..=30).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..8).prop_map(|v| v as f64 / 8.0), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

pub fn check_auc(scores: &[f64], pos: &[bool]) -> Check {
    match (roc_auc_binary(scores, pos), pairwise_auc(scores, pos)) {
        (Some(g), Some(w)) => prop_assert!((g - w).abs() < 1e-12, "{} vs {}", g, w),
        (None, None) => {}
        other => prop_assert!(false, "definedness differs: {:?}", other),
    }
    Ok(())
}

// ---------------------------------------------------------------- best split

/// Weighted child impurity `n_l·G_l + n_r·G_r` as an exact fraction, from
/// the labels on each side.
fn child_impurity(left: &[usize], right: &[usize]) -> (i128, i128) {
    let side = |s: &[usize]| -> (i128, i128) {
        // n·G = n - Σc²/n = (n² - Σc²) / n
        let n = s.len() as i128;
        let sq: i128 = (0..K).map(|k| (s.iter().filter(|&&c| c == k).count() as i128).pow(2)).sum();
        (n * n - sq, n)
    };
    let (a, b) = side(left);
    let (c, d) = side(right);
    (a * d + c * b, b * d)
}

fn less(x: (i128, i128), y: (i128, i128)) -> bool {
    x.0 * y.1 < y.0 * x.1
}

pub struct OracleSplit {
    pub feature: usize,
    pub threshold: f64,
    pub left_rows: Vec<usize>,
}

pub fn exhaustive_split(x: &[Vec<f64>], y: &[usize], d: usize) -> Option<OracleSplit> {
    let n = y.len() as i128;
    let sq: i128 = (0..K).map(|k| (y.iter().filter(|&&c| c == k).count() as i128).pow(2)).sum();
    // n·G of the parent, in the same form as `child_impurity`.
    let parent = (n * n - sq, n);
    let mut best: Option<((i128, i128), OracleSplit)> = None;
    for f in 0..d {
        let mut values: Vec<f64> = x.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left_rows: Vec<usize> = (0..y.len()).filter(|&i| x[i][f] <= t).collect();
            let l: Vec<usize> = left_rows.iter().map(|&i| y[i]).collect();
            let r: Vec<usize> = (0..y.len()).filter(|&i| x[i][f] > t).map(|i| y[i]).collect();
            let score = child_impurity(&l, &r);
            // Strict improvement keeps the earliest feature and lowest threshold.
            if best.as_ref().is_none_or(|(b, _)| less(score, *b)) {
                best = Some((score, OracleSplit { feature: f, threshold: t, left_rows }));
            }
        }
    }
    let (score, split) = best?;
    less(score, parent).then_some(split)
}

/// Values on a half-integer grid, so midpoints are exact and ties frequent.
pub fn split_instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, usize)> {
    (1usize..=20, 1usize..=4).prop_flat_map(|(m, d)| {
        (
            prop::collection::vec(prop::collection::vec((0u8..8).prop_map(|v| v as f64 * 0.5), d), m),
            prop::collection::vec(0..K, m),
            Just(d),
        )
    })
}

pub fn check_best_split(x: &[Vec<f64>], y: &[usize], d: usize) -> Check {
    let m = Matrix::from_rows(x, d).unwrap();
    let features: Vec<usize> = (0..d).collect();
    match (best_split(&m, y, &features), exhaustive_split(x, y, d)) {
        (None, None) => {}
        (Some(g), Some(w)) => {
            prop_assert_eq!(g.feature, w.feature);
            prop_assert_eq!(g.threshold, w.threshold);
            let left: Vec<usize> = (0..y.len()).filter(|&i| x[i][g.feature] <= g.threshold).collect();
            prop_assert_eq!(left, w.left_rows);
            prop_assert!(g.impurity_decrease > 0.0);
        }
        (g, w) => prop_assert!(false, "library {:?}, oracle found a split: {}", g, w.is_some()),
    }
    Ok(())
}

// ---------------------------------------------------------------- LR gradient

pub type LrPoint = (Matrix, Vec<f64>, Matrix, Matrix, f64);

pub fn lr_point() -> impl Strategy<Value = LrPoint> {
    (2usize..12, 1usize..5).prop_flat_map(|(m, d)| {
        (
            prop::collection::vec(-2.0f64..2.0, K * d),
            prop::collection::vec(-1.0f64..1.0, K),
            prop::collection::vec(-3.0f64..3.0, m * d),
            prop::collection::vec(0..K, m),
            0.0f64..0.5,
        )
            .prop_map(move |(w, b, x, y, l2)| {
                let mut t = Matrix::zeros(m, K);
                for (i, &c) in y.iter().enumerate() {
                    t.set(i, c, 1.0);
                }
                (
                    Matrix::from_vec(K, d, w).unwrap(),
                    b,
                    Matrix::from_vec(m, d, x).unwrap(),
                    t,
                    l2,
                )
            })
    })
}

/// Relative error `‖g - g_fd‖ / max(‖g‖, ‖g_fd‖)` with central differences of step `h`.
pub fn gradient_relative_error((w, b, x, t, l2): &LrPoint, h: f64) -> f64 {
    let (_, grad) = loss_and_gradient(w, b, x, t, *l2).unwrap();
    let loss = |w: &Matrix, b: &[f64]| loss_and_gradient(w, b, x, t, *l2).unwrap().0;
    let mut analytic = Vec::new();
    let mut numeric = Vec::new();
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp.set(i, j, w.get(i, j) + h);
            wm.set(i, j, w.get(i, j) - h);
            numeric.push((loss(&wp, b) - loss(&wm, b)) / (2.0 * h));
            analytic.push(grad.weights.get(i, j));
        }
    }
    for k in 0..b.len() {
        let (mut bp, mut bm) = (b.clone(), b.clone());
        bp[k] += h;
        bm[k] -= h;
        numeric.push((loss(w, &bp) - loss(w, &bm)) / (2.0 * h));
        analytic.push(grad.biases[k]);
    }
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
    let scale = norm(&analytic).max(norm(&numeric));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

// ---------------------------------------------------------------- scaler

/// Random matrix with one column forced constant; returns that column's index.
pub fn matrix_with_constant_column() -> impl Strategy<Value = (Matrix, usize)> {
    (2usize..60, 1usize..6).prop_flat_map(|(n, d)| {
        (prop::collection::vec(-1e6f64..1e6, n * d), 0..d, -100.0f64..100.0).prop_map(move |(mut data, c, v)| {
            for i in 0..n {
                data[i * d + c] = v;
            }
            (Matrix::from_vec(n, d, data).unwrap(), c)
        })
    })
}

pub fn check_scaler(x: &Matrix, constant: usize) -> Check {
    let s = ScalerParams::fit(x).unwrap();
    let z = s.transform(x).unwrap();
    let n = x.rows() as f64;
    for j in 0..x.cols() {
        let col = z.column(j);
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9, "column {} mean {}", j, mean);
        if j == constant {
            prop_assert_eq!(s.scales[j], 1.0);
            prop_assert!(col.iter().all(|&v| v == 0.0));
        } else {
            prop_assert!((var - 1.0).abs() < 1e-6, "column {} var {}", j, var);
        }
    }
    let back = s.inverse_transform(&z).unwrap();
    for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
        prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{} vs {}", a, b);
    }
    Ok(())
}
