//! Rank-based (Mann-Whitney) ROC AUC with midrank ties.

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, N_CLASSES};

/// AUC of `scores` against a binary indicator, or `None` when either side is empty.
///
/// Equals the probability that a random positive outscores a random
/// negative, counting ties as one half.
pub fn roc_auc_binary(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len(), "scores and labels differ in length");
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of 1-based midranks of the positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&k| positive[k]).count();
        rank_sum += midrank * pos_in_group as f64;
        i = j;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrAuc {
    /// Unweighted mean over classes that have both positives and negatives.
    pub macro_auc: f64,
    pub per_class: [Option<f64>; N_CLASSES],
    /// Classes left out of the mean for lack of positives or negatives.
    pub skipped: Vec<usize>,
}

/// One-vs-rest macro AUC over the columns of an `n x 4` score matrix.
pub fn roc_auc_ovr_macro(y_true: &[usize], scores: &Matrix) -> Result<OvrAuc> {
    scores.check_cols(N_CLASSES)?;
    if scores.rows() != y_true.len() {
        return Err(Error::Metrics(format!(
            "{} score rows but {} labels",
            scores.rows(),
            y_true.len()
        )));
    }
    let mut per_class = [None; N_CLASSES];
    let mut skipped = Vec::new();
    for (k, slot) in per_class.iter_mut().enumerate() {
        let col = scores.column(k);
        let pos: Vec<bool> = y_true.iter().map(|&c| c == k).collect();
        *slot = roc_auc_binary(&col, &pos);
        if slot.is_none() {
            skipped.push(k);
        }
    }
    let used: Vec<f64> = per_class.iter().flatten().copied().collect();
    if used.is_empty() {
        return Err(Error::Metrics("AUC undefined: no class has both positives and negatives".into()));
    }
    Ok(OvrAuc {
        macro_auc: used.iter().sum::<f64>() / used.len() as f64,
        per_class,
        skipped,
    })
}
