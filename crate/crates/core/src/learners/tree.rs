//! CART-style classification trees with Gini impurity.
//!
//! Split quality is compared in exact integer arithmetic: for a split with
//! child class counts `l` and `r`, maximizing the Gini decrease is the same
//! as maximizing `sum(l_k^2)/n_l + sum(r_k^2)/n_r`, which is a ratio of
//! integers. Ties therefore resolve identically no matter how rows are
//! ordered, and the lowest feature index, then lowest threshold, wins.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::{Error, Matrix, Result, N_CLASSES};

pub type ClassCounts = [u64; N_CLASSES];

/// `1 - sum_k p_k^2`.
pub fn gini_impurity(counts: &ClassCounts) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Learner("gini impurity of an empty node".into()));
    }
    Ok(gini_unchecked(counts, total))
}

fn gini_unchecked(counts: &ClassCounts, total: u64) -> f64 {
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn sum_sq(counts: &ClassCounts) -> u128 {
    counts.iter().map(|&c| (c as u128) * (c as u128)).sum()
}

/// Score of a split as the exact fraction `num / den`.
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of_split(left: &ClassCounts, n_left: u64, right: &ClassCounts, n_right: u64) -> Self {
        Purity {
            num: sum_sq(left) * n_right as u128 + sum_sq(right) * n_left as u128,
            den: n_left as u128 * n_right as u128,
        }
    }

    fn of_node(counts: &ClassCounts, n: u64) -> Self {
        Purity {
            num: sum_sq(counts),
            den: n as u128,
        }
    }

    fn cmp(&self, other: &Purity) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Weighted Gini decrease: `G(parent) - (n_l G(l) + n_r G(r)) / n`.
pub fn impurity_decrease(left: &ClassCounts, right: &ClassCounts) -> f64 {
    let nl: u64 = left.iter().sum();
    let nr: u64 = right.iter().sum();
    let n = nl + nr;
    let mut parent = *left;
    for (p, r) in parent.iter_mut().zip(right) {
        *p += r;
    }
    let g = |c: &ClassCounts, t: u64| if t == 0 { 0.0 } else { gini_unchecked(c, t) };
    g(&parent, n) - (nl as f64 * g(left, nl) + nr as f64 * g(right, nr)) / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // Adjacent doubles: keep `a <= m < b` so `a` goes left and `b` right.
    if m >= b {
        a
    } else {
        m
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    purity: Purity,
    left: ClassCounts,
    right: ClassCounts,
}

/// Best threshold on one feature, or `None` when the feature is constant
/// over `samples`. The returned split may not improve on the parent.
fn scan_feature(
    x: &Matrix,
    y: &[usize],
    samples: &[usize],
    feature: usize,
    buf: &mut Vec<(f64, usize)>,
) -> Option<Candidate> {
    buf.clear();
    buf.extend(samples.iter().map(|&i| (x.get(i, feature), y[i])));
    buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    if buf.first()?.0 == buf.last()?.0 {
        return None;
    }
    let mut total = [0u64; N_CLASSES];
    for &(_, c) in buf.iter() {
        total[c] += 1;
    }
    let n = buf.len() as u64;
    let mut left = [0u64; N_CLASSES];
    let mut best: Option<Candidate> = None;
    for i in 0..buf.len() - 1 {
        left[buf[i].1] += 1;
        let (a, b) = (buf[i].0, buf[i + 1].0);
        if a == b {
            continue;
        }
        let nl = i as u64 + 1;
        let mut right = total;
        for (r, l) in right.iter_mut().zip(&left) {
            *r -= l;
        }
        let purity = Purity::of_split(&left, nl, &right, n - nl);
        // Strictly greater keeps the lowest threshold on ties.
        if best.as_ref().is_none_or(|c| purity.cmp(&c.purity) == Ordering::Greater) {
            best = Some(Candidate {
                feature,
                threshold: midpoint(a, b),
                purity,
                left,
                right,
            });
        }
    }
    best
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.purity.cmp(&b.purity) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (a.feature, a.threshold) < (b.feature, b.threshold),
    }
}

fn node_counts(y: &[usize], samples: &[usize]) -> ClassCounts {
    let mut c = [0u64; N_CLASSES];
    for &i in samples {
        c[y[i]] += 1;
    }
    c
}

fn finish(best: Option<Candidate>, parent: &ClassCounts, n: u64) -> Option<Split> {
    let best = best?;
    if best.purity.cmp(&Purity::of_node(parent, n)) != Ordering::Greater {
        return None;
    }
    Some(Split {
        feature: best.feature,
        threshold: best.threshold,
        impurity_decrease: impurity_decrease(&best.left, &best.right),
    })
}

/// Exhaustive best split of `rows` over `candidate_features`.
///
/// Thresholds are midpoints between consecutive distinct values; a row goes
/// left when `x[feature] <= threshold`. Returns `None` when no split lowers
/// the weighted Gini impurity.
pub fn best_split(rows: &Matrix, labels: &[usize], candidate_features: &[usize]) -> Option<Split> {
    let samples: Vec<usize> = (0..rows.rows()).collect();
    best_split_on(rows, labels, &samples, candidate_features)
}

fn best_split_on(x: &Matrix, y: &[usize], samples: &[usize], features: &[usize]) -> Option<Split> {
    if samples.len() < 2 {
        return None;
    }
    let mut buf = Vec::with_capacity(samples.len());
    let mut best: Option<Candidate> = None;
    for &f in features {
        if let Some(c) = scan_feature(x, y, samples, f, &mut buf) {
            if best.as_ref().is_none_or(|b| better(&c, b)) {
                best = Some(c);
            }
        }
    }
    finish(best, &node_counts(y, samples), samples.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features examined per split; `None` examines all of them.
    pub mtry: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            mtry: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Weighted Gini decrease achieved here.
        decrease: f64,
        samples: u64,
    },
    Leaf {
        counts: ClassCounts,
    },
}

/// Binary tree stored as a node arena; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn fit(x: &Matrix, y: &[usize], params: &TreeParams, rng: &mut Rng) -> Result<Self> {
        let samples: Vec<usize> = (0..x.rows()).collect();
        Self::fit_on_samples(x, y, samples, params, rng)
    }

    /// Grows a tree on `samples` (row indices into `x`, repeats allowed).
    ///
    /// `rng` is consumed only for per-split feature sampling, in depth-first
    /// order, so the tree depends on the multiset of sampled rows and never
    /// on where those rows sit in `x`.
    pub fn fit_on_samples(
        x: &Matrix,
        y: &[usize],
        samples: Vec<usize>,
        params: &TreeParams,
        rng: &mut Rng,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Learner("cannot grow a tree on zero samples".into()));
        }
        if x.rows() != y.len() {
            return Err(Error::Learner(format!("{} rows but {} labels", x.rows(), y.len())));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= N_CLASSES) {
            return Err(Error::Learner(format!("label {bad} out of range")));
        }
        let d = x.cols();
        let mtry = params.mtry.unwrap_or(d).clamp(1, d.max(1));
        let mut nodes = vec![Node::Leaf { counts: [0; N_CLASSES] }];
        let mut stack = vec![(0usize, samples, 0usize)];
        let mut buf = Vec::new();
        let mut order: Vec<usize> = (0..d).collect();
        while let Some((id, idx, depth)) = stack.pop() {
            let counts = node_counts(y, &idx);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_ok = params.max_depth.is_none_or(|m| depth < m);
            let split = if pure || !depth_ok || idx.len() < params.min_samples_split.max(2) {
                None
            } else {
                // Random feature order; constant features do not count toward mtry.
                order.shuffle(rng);
                let mut best: Option<Candidate> = None;
                let mut examined = 0;
                for &f in &order {
                    if examined == mtry {
                        break;
                    }
                    if let Some(c) = scan_feature(x, y, &idx, f, &mut buf) {
                        examined += 1;
                        if best.as_ref().is_none_or(|b| better(&c, b)) {
                            best = Some(c);
                        }
                    }
                }
                finish(best, &counts, idx.len() as u64)
            };
            match split {
                None => nodes[id] = Node::Leaf { counts },
                Some(s) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        idx.iter().partition(|&&i| x.get(i, s.feature) <= s.threshold);
                    let left = nodes.len();
                    let right = left + 1;
                    nodes.push(Node::Leaf { counts: [0; N_CLASSES] });
                    nodes.push(Node::Leaf { counts: [0; N_CLASSES] });
                    nodes[id] = Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left,
                        right,
                        decrease: s.impurity_decrease,
                        samples: idx.len() as u64,
                    };
                    // Right first so the left subtree is grown (and draws randomness) first.
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        Ok(DecisionTree { n_features: d, nodes })
    }

    pub fn leaf_counts(&self, row: &[f64]) -> &ClassCounts {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Class distribution of the leaf `row` falls into.
    pub fn predict_proba_row(&self, row: &[f64]) -> [f64; N_CLASSES] {
        let c = self.leaf_counts(row);
        let t: u64 = c.iter().sum();
        c.map(|v| v as f64 / t as f64)
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        super::argmax(&self.leaf_counts(row).map(|c| c as f64))
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            max = max.max(d);
            if let Node::Split { left, right, .. } = self.nodes[id] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        max
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Sample-weighted Gini decrease per feature (unnormalized).
    pub fn impurity_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for n in &self.nodes {
            if let Node::Split {
                feature,
                decrease,
                samples,
                ..
            } = n
            {
                imp[*feature] += *samples as f64 * decrease;
            }
        }
        imp
    }

    pub(crate) fn validate(&self, max_depth: Option<usize>) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Learner("tree has no nodes".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Leaf { counts } if counts.iter().sum::<u64>() == 0 => {
                    return Err(Error::Learner(format!("leaf {i} has no samples")));
                }
                Node::Split {
                    feature, left, right, threshold, ..
                } => {
                    if *feature >= self.n_features || *left >= self.nodes.len() || *right >= self.nodes.len() || *left <= i || *right <= i {
                        return Err(Error::Learner(format!("split node {i} is malformed")));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::Learner(format!("split node {i} has a non-finite threshold")));
                    }
                }
                _ => {}
            }
        }
        if let Some(m) = max_depth {
            if self.depth() > m {
                return Err(Error::Learner(format!("tree depth {} exceeds max_depth {m}", self.depth())));
            }
        }
        Ok(())
    }
}
