//! Confusion matrices, per-class precision/recall/F1, averages, AUC and
//! the text/JSON classification report.

mod auc;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use auc::{roc_auc_binary, roc_auc_ovr_macro, OvrAuc};

use crate::dataset::class_names;
use crate::{Error, Matrix, Result, N_CLASSES};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N_CLASSES]; N_CLASSES],
    pub class_names: Vec<String>,
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Metrics(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut counts = [[0u64; N_CLASSES]; N_CLASSES];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= N_CLASSES || p >= N_CLASSES {
            return Err(Error::Metrics(format!("class index out of range: true {t}, predicted {p}")));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix::new(counts))
}

impl ConfusionMatrix {
    pub fn new(counts: [[u64; N_CLASSES]; N_CLASSES]) -> Self {
        ConfusionMatrix {
            counts,
            class_names: class_names().iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..N_CLASSES).map(|k| self.counts[k][k]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let t = self.total();
        if t == 0 {
            0.0
        } else {
            self.trace() as f64 / t as f64
        }
    }

    pub fn support(&self, k: usize) -> u64 {
        self.counts[k].iter().sum()
    }

    pub fn predicted(&self, k: usize) -> u64 {
        self.counts.iter().map(|r| r[k]).sum()
    }

    /// Grid as CSV: a header of predicted class names, one row per true class.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("true\\predicted");
        for n in &self.class_names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (name, row) in self.class_names.iter().zip(&self.counts) {
            s.push_str(name);
            for c in row {
                let _ = write!(s, ",{c}");
            }
            s.push('\n');
        }
        s
    }
}

/// Value substituted for a precision or recall whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroDivision {
    Zero,
    #[default]
    One,
}

impl ZeroDivision {
    fn value(self) -> f64 {
        match self {
            ZeroDivision::Zero => 0.0,
            ZeroDivision::One => 1.0,
        }
    }
}

impl std::str::FromStr for ZeroDivision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" | "0" => Ok(ZeroDivision::Zero),
            "one" | "1" => Ok(ZeroDivision::One),
            other => Err(Error::Config(format!("zero-division policy must be zero or one, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerClass {
    pub rows: [ClassMetrics; N_CLASSES],
    /// Classes where a zero denominator was replaced by the policy value.
    pub zero_division_classes: Vec<usize>,
}

fn ratio(num: u64, den: u64, policy: ZeroDivision, hit: &mut bool) -> f64 {
    if den == 0 {
        *hit = true;
        policy.value()
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn per_class_prf(cm: &ConfusionMatrix, policy: ZeroDivision) -> PerClass {
    let mut flagged = Vec::new();
    let rows = std::array::from_fn(|k| {
        let tp = cm.counts[k][k];
        let support = cm.support(k);
        let mut hit = false;
        let precision = ratio(tp, cm.predicted(k), policy, &mut hit);
        let recall = ratio(tp, support, policy, &mut hit);
        if hit {
            flagged.push(k);
        }
        ClassMetrics {
            precision,
            recall,
            f1: harmonic(precision, recall),
            support,
        }
    });
    PerClass {
        rows,
        zero_division_classes: flagged,
    }
}

/// Unweighted (macro) and support-weighted means of per-class rows.
pub fn aggregate(rows: &[ClassMetrics]) -> (Averages, Averages) {
    let n = rows.len() as f64;
    let macro_avg = Averages {
        precision: rows.iter().map(|r| r.precision).sum::<f64>() / n,
        recall: rows.iter().map(|r| r.recall).sum::<f64>() / n,
        f1: rows.iter().map(|r| r.f1).sum::<f64>() / n,
    };
    let total: u64 = rows.iter().map(|r| r.support).sum();
    let w = |f: fn(&ClassMetrics) -> f64| {
        if total == 0 {
            0.0
        } else {
            rows.iter().map(|r| f(r) * r.support as f64).sum::<f64>() / total as f64
        }
    };
    let weighted = Averages {
        precision: w(|r| r.precision),
        recall: w(|r| r.recall),
        f1: w(|r| r.f1),
    };
    (macro_avg, weighted)
}

/// Per-class and aggregate metrics for one evaluated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub class_names: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub total: u64,
    pub zero_division: ZeroDivision,
    /// True when any precision or recall used the zero-division value.
    pub zero_division_warning: bool,
    pub zero_division_classes: Vec<String>,
    pub auc_macro_ovr: Option<f64>,
    pub auc_per_class: Option<Vec<Option<f64>>>,
    pub auc_skipped_classes: Vec<String>,
    pub auc_averaging: String,
}

impl ClassificationReport {
    /// Scores (if given) are `n x 4` and feed the macro one-vs-rest AUC.
    pub fn build(y_true: &[usize], y_pred: &[usize], scores: Option<&Matrix>, policy: ZeroDivision) -> Result<Self> {
        let cm = confusion_matrix(y_true, y_pred)?;
        let mut report = Self::from_confusion(&cm, policy);
        if let Some(s) = scores {
            let auc = roc_auc_ovr_macro(y_true, s)?;
            report.set_auc(&auc);
        }
        Ok(report)
    }

    pub fn from_confusion(cm: &ConfusionMatrix, policy: ZeroDivision) -> Self {
        let pc = per_class_prf(cm, policy);
        let names = class_names();
        let mut r = Self::from_parts(pc.rows.to_vec(), cm.accuracy(), policy);
        r.zero_division_warning = !pc.zero_division_classes.is_empty();
        r.zero_division_classes = pc.zero_division_classes.iter().map(|&k| names[k].to_string()).collect();
        r
    }

    /// Report from already-computed per-class rows (in class-index order).
    pub fn from_parts(per_class: Vec<ClassMetrics>, accuracy: f64, policy: ZeroDivision) -> Self {
        let (macro_avg, weighted_avg) = aggregate(&per_class);
        ClassificationReport {
            class_names: class_names().iter().take(per_class.len()).map(|s| s.to_string()).collect(),
            total: per_class.iter().map(|r| r.support).sum(),
            per_class,
            accuracy,
            macro_avg,
            weighted_avg,
            zero_division: policy,
            zero_division_warning: false,
            zero_division_classes: Vec::new(),
            auc_macro_ovr: None,
            auc_per_class: None,
            auc_skipped_classes: Vec::new(),
            auc_averaging: "macro-ovr".to_string(),
        }
    }

    pub fn set_auc(&mut self, auc: &OvrAuc) {
        let names = class_names();
        self.auc_macro_ovr = Some(auc.macro_auc);
        self.auc_per_class = Some(auc.per_class.to_vec());
        self.auc_skipped_classes = auc.skipped.iter().map(|&k| names[k].to_string()).collect();
    }

    /// Text layout: header, one row per class, then accuracy, macro avg and
    /// weighted avg. Values are rounded half-up to two decimals.
    pub fn render_text(&self) -> String {
        let width = self
            .class_names
            .iter()
            .map(String::len)
            .chain(["weighted avg".len()])
            .max()
            .unwrap_or(12);
        let mut s = String::new();
        let _ = writeln!(s, "{:>width$}  {:>9} {:>9} {:>9} {:>9}", "", "precision", "recall", "f1-score", "support");
        s.push('\n');
        for (name, r) in self.class_names.iter().zip(&self.per_class) {
            let _ = writeln!(
                s,
                "{name:>width$}  {:>9} {:>9} {:>9} {:>9}",
                round2(r.precision),
                round2(r.recall),
                round2(r.f1),
                r.support
            );
        }
        s.push('\n');
        let _ = writeln!(s, "{:>width$}  {:>9} {:>9} {:>9} {:>9}", "accuracy", "", "", round2(self.accuracy), self.total);
        for (label, a) in [("macro avg", &self.macro_avg), ("weighted avg", &self.weighted_avg)] {
            let _ = writeln!(
                s,
                "{label:>width$}  {:>9} {:>9} {:>9} {:>9}",
                round2(a.precision),
                round2(a.recall),
                round2(a.f1),
                self.total
            );
        }
        if let Some(auc) = self.auc_macro_ovr {
            let _ = writeln!(s, "\n{:>width$}  {:>9}", "auc (macro ovr)", round2(auc));
        }
        s
    }

    pub fn render_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render(&self, format: ReportFormat) -> Result<Vec<u8>> {
        Ok(match format {
            ReportFormat::Text => self.render_text().into_bytes(),
            ReportFormat::Json => self.render_json()?.into_bytes(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Two-decimal rendering, rounding half-up on the exact stored value.
pub fn round2(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let neg = x < 0.0;
    // Exact decimal expansion, far past the third decimal.
    let digits = format!("{:.80}", x.abs());
    let (int_part, frac) = digits.split_once('.').expect("fixed-point output has a point");
    let frac = frac.as_bytes();
    let mut cents: u128 = int_part.parse::<u128>().unwrap_or(u128::MAX / 1000) * 100
        + u128::from(frac[0] - b'0') * 10
        + u128::from(frac[1] - b'0');
    if frac[2] >= b'5' {
        cents += 1;
    }
    let sign = if neg && cents != 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", cents / 100, cents % 100)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: f64, r: f64, f: f64, s: u64) -> ClassMetrics {
        ClassMetrics {
            precision: p,
            recall: r,
            f1: f,
            support: s,
        }
    }

    #[test]
    fn small_tally() {
        let cm = confusion_matrix(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        assert_eq!(cm.counts[0], [1, 1, 0, 0]);
        assert_eq!(cm.counts[1], [0, 2, 0, 0]);
        assert_eq!(cm.total(), 4);
        assert_eq!(cm.trace(), 3);
        assert!(confusion_matrix(&[0], &[0, 1]).is_err());
        assert!(confusion_matrix(&[4], &[0]).is_err());
    }

    #[test]
    fn zero_division_policy() {
        // Class 3: TP=0, FP=0, FN=4.
        let cm = confusion_matrix(&[3, 3, 3, 3, 0], &[0, 0, 1, 2, 0]).unwrap();
        let one = per_class_prf(&cm, ZeroDivision::One);
        let r = one.rows[3];
        assert_eq!((round2(r.precision), round2(r.recall), round2(r.f1)), ("1.00".into(), "0.00".into(), "0.00".into()));
        assert!(one.zero_division_classes.contains(&3));
        let zero = per_class_prf(&cm, ZeroDivision::Zero);
        assert_eq!(zero.rows[3].precision, 0.0);
    }

    #[test]
    fn two_thirds() {
        // Class 0: TP=2, FP=1, FN=1.
        let cm = confusion_matrix(&[0, 0, 0, 1, 1], &[0, 0, 1, 0, 1]).unwrap();
        let r = per_class_prf(&cm, ZeroDivision::One).rows[0];
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn macro_of_printed_rows() {
        let rows = [
            row(0.98, 0.95, 0.97, 3470),
            row(0.98, 0.88, 0.93, 1297),
            row(0.85, 1.00, 0.92, 1229),
            row(1.00, 0.00, 0.00, 4),
        ];
        let (m, _) = aggregate(&rows);
        assert!((m.precision - 0.9525).abs() < 1e-12);
        assert!((m.recall - 0.7075).abs() < 1e-12);
        assert_eq!(round2(m.precision), "0.95");
        assert_eq!(round2(m.recall), "0.71");
    }

    #[test]
    fn identical_rows_average_to_themselves() {
        let rows = [row(0.5, 0.25, 0.125, 3); 4];
        let (m, w) = aggregate(&rows);
        assert_eq!(m, w);
        assert_eq!(m.precision, 0.5);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round2(0.125), "0.13");
        assert_eq!(round2(0.375), "0.38");
        assert_eq!(round2(0.625), "0.63");
        assert_eq!(round2(0.705), "0.70"); // stored value is just below 0.705
        assert_eq!(round2(0.7075), "0.71");
        assert_eq!(round2(0.995), "0.99");
        assert_eq!(round2(0.9999), "1.00");
        assert_eq!(round2(1.0), "1.00");
        assert_eq!(round2(0.0), "0.00");
        assert_eq!(round2(-0.004), "0.00");
        assert_eq!(round2(-1.256), "-1.26");
    }

    #[test]
    fn perfect_report_renders_ones() {
        let y: Vec<usize> = (0..6000).map(|i| i % 4).collect();
        let r = ClassificationReport::build(&y, &y, None, ZeroDivision::One).unwrap();
        let text = r.render_text();
        for line in text.lines().filter(|l| !l.trim().is_empty()).skip(1) {
            assert!(line.contains("1.00"), "{line}");
            assert!(!line.contains("0.00"), "{line}");
        }
        assert!(text.contains("6000"));
    }

    #[test]
    fn report_layout_lists_classes_in_index_order() {
        let r = ClassificationReport::build(&[0, 1, 2, 3], &[0, 1, 2, 2], None, ZeroDivision::One).unwrap();
        let text = r.render_text();
        let pos: Vec<usize> = ["allow", "deny", "drop", "reset-both"].iter().map(|n| text.find(n).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(text.lines().next().unwrap().contains("precision    recall  f1-score   support"));
    }

    #[test]
    fn json_round_trip() {
        let y = [0, 1, 2, 3, 0, 1];
        let p = [0, 1, 1, 3, 0, 0];
        let s = Matrix::from_rows(
            &[
                [0.7, 0.1, 0.1, 0.1],
                [0.2, 0.5, 0.2, 0.1],
                [0.1, 0.6, 0.3, 0.0],
                [0.0, 0.1, 0.2, 0.7],
                [0.9, 0.0, 0.1, 0.0],
                [0.4, 0.3, 0.2, 0.1],
            ],
            4,
        )
        .unwrap();
        let r = ClassificationReport::build(&y, &p, Some(&s), ZeroDivision::One).unwrap();
        assert!(r.auc_macro_ovr.is_some());
        let back = ClassificationReport::from_json(&r.render_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn confusion_csv_grid() {
        let cm = confusion_matrix(&[0, 1], &[1, 1]).unwrap();
        let csv = cm.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "true\\predicted,allow,deny,drop,reset-both");
        assert_eq!(lines[1], "allow,0,1,0,0");
        assert_eq!(lines[2], "deny,0,1,0,0");
    }
}
