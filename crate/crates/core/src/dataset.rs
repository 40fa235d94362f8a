//! Firewall log CSV ingest.
//!
//! The export has one row per session: four port columns, byte/packet
//! counters, elapsed time and the firewall's `Action` verdict. Rows that fail
//! validation are rejected individually and accounted for in an
//! [`IngestReport`]; header problems and empty input are fatal.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Matrix, Result, N_CLASSES, N_FEATURES};

/// Predictor columns, in the order used for every feature matrix.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "Source Port",
    "Destination Port",
    "NAT Source Port",
    "NAT Destination Port",
    "Bytes",
    "Bytes Sent",
    "Bytes Received",
    "Packets",
    "Elapsed Time (sec)",
    "pkts_sent",
    "pkts_received",
];

pub const ACTION_COLUMN: &str = "Action";

/// Column order of the public export (`Action` sits after the four port columns).
pub const STRICT_HEADER: [&str; N_FEATURES + 1] = [
    "Source Port",
    "Destination Port",
    "NAT Source Port",
    "NAT Destination Port",
    "Action",
    "Bytes",
    "Bytes Sent",
    "Bytes Received",
    "Packets",
    "Elapsed Time (sec)",
    "pkts_sent",
    "pkts_received",
];

/// Feature indices holding TCP/UDP port numbers.
pub const PORT_FEATURES: std::ops::Range<usize> = 0..4;

pub const MAX_PORT: f64 = 65535.0;

/// Firewall verdict. Discriminants are the class indices used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionLabel {
    #[serde(rename = "allow")]
    Allow = 0,
    #[serde(rename = "deny")]
    Deny = 1,
    #[serde(rename = "drop")]
    Drop = 2,
    #[serde(rename = "reset-both")]
    ResetBoth = 3,
}

impl ActionLabel {
    pub const ALL: [ActionLabel; N_CLASSES] = [
        ActionLabel::Allow,
        ActionLabel::Deny,
        ActionLabel::Drop,
        ActionLabel::ResetBoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionLabel::Allow => "allow",
            ActionLabel::Deny => "deny",
            ActionLabel::Drop => "drop",
            ActionLabel::ResetBoth => "reset-both",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Exact, case-sensitive lookup. Callers trim first.
    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == name)
            .ok_or_else(|| Error::UnknownAction(name.to_string()))
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Class names in index order.
pub fn class_names() -> [&'static str; N_CLASSES] {
    ActionLabel::ALL.map(ActionLabel::name)
}

/// One firewall session.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub features: [f64; N_FEATURES],
    pub action: ActionLabel,
}

/// Feature matrix with a parallel label vector.
///
/// Labels are plain indices so that out-of-range values can be represented
/// and reported by [`Dataset::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    matrix: Matrix,
    labels: Vec<usize>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Pairs a matrix with labels and the standard feature names.
    pub fn new(matrix: Matrix, labels: Vec<usize>) -> Result<Self> {
        let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
        Self::with_feature_names(matrix, labels, names)
    }

    pub fn with_feature_names(
        matrix: Matrix,
        labels: Vec<usize>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if matrix.rows() != labels.len() {
            return Err(Error::Data(format!(
                "{} matrix rows but {} labels",
                matrix.rows(),
                labels.len()
            )));
        }
        if matrix.cols() != feature_names.len() {
            return Err(Error::Data(format!(
                "{} matrix columns but {} feature names",
                matrix.cols(),
                feature_names.len()
            )));
        }
        Ok(Dataset {
            matrix,
            labels,
            feature_names,
        })
    }

    pub fn from_records(records: &[LogRecord]) -> Self {
        let rows: Vec<[f64; N_FEATURES]> = records.iter().map(|r| r.features).collect();
        let labels = records.iter().map(|r| r.action.index()).collect();
        let matrix = Matrix::from_rows(&rows, N_FEATURES).expect("fixed-width rows");
        Dataset::new(matrix, labels).expect("parallel vectors")
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            matrix: self.matrix.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn class_distribution(&self) -> ClassDistribution {
        ClassDistribution::from_labels(&self.labels)
    }

    /// Checks every dataset invariant; an empty result means the dataset is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.feature_names.len() != N_FEATURES {
            out.push(Violation::dataset(
                Rule::FeatureNames,
                format!("{} feature names, expected {N_FEATURES}", self.feature_names.len()),
            ));
        }
        let unique: HashSet<&String> = self.feature_names.iter().collect();
        if unique.len() != self.feature_names.len() {
            out.push(Violation::dataset(Rule::FeatureNames, "duplicate feature names".into()));
        }
        if self.matrix.cols() != N_FEATURES {
            out.push(Violation::dataset(
                Rule::FeatureCount,
                format!("{} columns, expected {N_FEATURES}", self.matrix.cols()),
            ));
        }
        for (i, row) in self.matrix.iter_rows().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    out.push(Violation::row(i, Rule::NonFinite, format!("column {j} is {v}")));
                } else if v < 0.0 {
                    out.push(Violation::row(i, Rule::Negative, format!("column {j} is {v}")));
                } else if PORT_FEATURES.contains(&j) && v > MAX_PORT {
                    out.push(Violation::row(
                        i,
                        Rule::PortRange,
                        format!("{} = {v} exceeds {MAX_PORT}", self.feature_name(j)),
                    ));
                }
            }
            if self.labels[i] >= N_CLASSES {
                out.push(Violation::row(
                    i,
                    Rule::LabelRange,
                    format!("label {} outside 0..{N_CLASSES}", self.labels[i]),
                ));
            }
        }
        out
    }

    fn feature_name(&self, j: usize) -> &str {
        self.feature_names.get(j).map(String::as_str).unwrap_or("?")
    }

    /// Writes the dataset in the public export's column layout.
    ///
    /// Numbers use the shortest representation that parses back to the same
    /// `f64`, so `parse_csv(render_csv(ds)) == ds`.
    pub fn render_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(STRICT_HEADER)?;
        let mut fields: Vec<String> = Vec::with_capacity(N_FEATURES + 1);
        for (row, &label) in self.matrix.iter_rows().zip(&self.labels) {
            let action = ActionLabel::from_index(label)
                .ok_or_else(|| Error::Data(format!("label {label} has no action name")))?;
            fields.clear();
            fields.extend(row[..4].iter().map(|v| v.to_string()));
            fields.push(action.name().to_string());
            fields.extend(row[4..].iter().map(|v| v.to_string()));
            w.write_record(&fields)?;
        }
        w.into_inner().map_err(|e| Error::Data(e.to_string()))
    }

    /// SHA-256 (hex) of the canonical CSV rendering.
    pub fn fingerprint(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.render_csv()?)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    FeatureNames,
    FeatureCount,
    NonFinite,
    Negative,
    PortRange,
    LabelRange,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::FeatureNames => "feature-names",
            Rule::FeatureCount => "feature-count",
            Rule::NonFinite => "non-finite",
            Rule::Negative => "negative",
            Rule::PortRange => "port-range",
            Rule::LabelRange => "label-range",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// `None` for dataset-level rules.
    pub row: Option<usize>,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    fn row(row: usize, rule: Rule, detail: String) -> Self {
        Violation {
            row: Some(row),
            rule,
            detail,
        }
    }

    fn dataset(rule: Rule, detail: String) -> Self {
        Violation {
            row: None,
            rule,
            detail,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.row {
            Some(r) => write!(f, "row {r}: {} ({})", self.rule, self.detail),
            None => write!(f, "{} ({})", self.rule, self.detail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub counts: [u64; N_CLASSES],
    pub fractions: [f64; N_CLASSES],
}

impl ClassDistribution {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut counts = [0u64; N_CLASSES];
        for &l in labels {
            if l < N_CLASSES {
                counts[l] += 1;
            }
        }
        let total: u64 = counts.iter().sum();
        let fractions = counts.map(|c| if total == 0 { 0.0 } else { c as f64 / total as f64 });
        ClassDistribution { counts, fractions }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

impl fmt::Display for ClassDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, (c, p)) in ActionLabel::ALL.iter().zip(self.counts.iter().zip(&self.fractions)) {
            writeln!(f, "{:>12} {:>8} {:>8.4}%", label.name(), c, p * 100.0)?;
        }
        write!(f, "{:>12} {:>8}", "total", self.total())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemaPolicy {
    /// Header must be exactly [`STRICT_HEADER`], in order.
    Strict,
    /// Columns are located by name; order and extra columns are ignored.
    #[default]
    HeaderMapped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number in the input (the header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub rows_accepted: u64,
    pub rows_rejected: u64,
    pub rejection_reasons: Vec<Rejection>,
    pub class_counts: [u64; N_CLASSES],
}

#[derive(Debug, Clone, PartialEq)]
enum RowError {
    FieldCount { found: usize, expected: usize },
    Missing(&'static str),
    NotNumeric(&'static str, String),
    Negative(&'static str, String),
    PortRange(&'static str, String),
    UnknownAction(String),
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowError::FieldCount { found, expected } => {
                write!(f, "expected {expected} fields, found {found}")
            }
            RowError::Missing(col) => write!(f, "missing value for {col:?}"),
            RowError::NotNumeric(col, v) => write!(f, "non-numeric value {v:?} for {col:?}"),
            RowError::Negative(col, v) => write!(f, "negative value {v} for {col:?}"),
            RowError::PortRange(col, v) => write!(f, "port {v} out of range for {col:?}"),
            RowError::UnknownAction(a) => write!(f, "unknown action {a:?}"),
        }
    }
}

/// Column positions of the features (and optionally the action) in a header.
struct ColumnMap {
    features: [usize; N_FEATURES],
    action: Option<usize>,
    width: usize,
}

fn header_names(header: &csv::StringRecord) -> Vec<String> {
    header.iter().map(|h| h.trim().trim_start_matches('\u{feff}').to_string()).collect()
}

fn map_columns(names: &[String], policy: SchemaPolicy, want_action: bool) -> Result<ColumnMap> {
    if policy == SchemaPolicy::Strict {
        let ok = names.len() == STRICT_HEADER.len() && names.iter().zip(STRICT_HEADER).all(|(a, b)| a == b);
        if !ok {
            return Err(Error::Header(format!(
                "strict schema expects {:?}, found {:?}",
                STRICT_HEADER, names
            )));
        }
    }
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut missing = Vec::new();
    let mut features = [0usize; N_FEATURES];
    for (slot, name) in features.iter_mut().zip(FEATURE_NAMES) {
        match index.get(name) {
            Some(&i) => *slot = i,
            None => missing.push(name),
        }
    }
    let action = index.get(ACTION_COLUMN).copied();
    if want_action && action.is_none() {
        missing.push(ACTION_COLUMN);
    }
    if !missing.is_empty() {
        return Err(Error::Header(format!("missing columns {missing:?}; found {names:?}")));
    }
    Ok(ColumnMap {
        features,
        action,
        width: names.len(),
    })
}

fn parse_feature(raw: &str, col: usize) -> std::result::Result<f64, RowError> {
    let name = FEATURE_NAMES[col];
    let s = raw.trim();
    if s.is_empty() {
        return Err(RowError::Missing(name));
    }
    let v: f64 = s.parse().map_err(|_| RowError::NotNumeric(name, s.to_string()))?;
    if !v.is_finite() {
        return Err(RowError::NotNumeric(name, s.to_string()));
    }
    if v < 0.0 {
        return Err(RowError::Negative(name, s.to_string()));
    }
    if PORT_FEATURES.contains(&col) && v > MAX_PORT {
        return Err(RowError::PortRange(name, s.to_string()));
    }
    Ok(v)
}

fn parse_features(record: &csv::StringRecord, cols: &ColumnMap) -> std::result::Result<[f64; N_FEATURES], RowError> {
    if record.len() != cols.width {
        return Err(RowError::FieldCount {
            found: record.len(),
            expected: cols.width,
        });
    }
    let mut out = [0.0; N_FEATURES];
    for (j, &pos) in cols.features.iter().enumerate() {
        out[j] = parse_feature(&record[pos], j)?;
    }
    Ok(out)
}

fn parse_record(record: &csv::StringRecord, cols: &ColumnMap) -> std::result::Result<LogRecord, RowError> {
    let features = parse_features(record, cols)?;
    let raw = &record[cols.action.expect("action column mapped")];
    let action = ActionLabel::from_name(raw.trim()).map_err(|_| RowError::UnknownAction(raw.to_string()))?;
    Ok(LogRecord { features, action })
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source)
}

/// Byte offsets of every `\n`, for line numbers that do not depend on the
/// line terminator style.
struct LineIndex<'a> {
    bytes: &'a [u8],
    newlines: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        let newlines = bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i).collect();
        LineIndex { bytes, newlines }
    }

    fn line(&self, pos: Option<&csv::Position>) -> u64 {
        let Some(p) = pos else { return 0 };
        // After a CRLF the reported offset can sit on the terminator itself.
        let mut start = p.byte() as usize;
        while start < self.bytes.len() && matches!(self.bytes[start], b'\r' | b'\n') {
            start += 1;
        }
        self.newlines.partition_point(|&nl| nl < start) as u64 + 1
    }
}

fn read_all<R: Read>(mut source: R) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    source
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Data(format!("read failed: {e}")))?;
    Ok(bytes)
}

/// Parses a labelled firewall log export.
pub fn parse_csv<R: Read>(source: R, policy: SchemaPolicy) -> Result<(Dataset, IngestReport)> {
    let bytes = read_all(source)?;
    let lines = LineIndex::new(&bytes);
    let mut rdr = reader(bytes.as_slice());
    let names = header_names(rdr.headers()?);
    if names.is_empty() || (names.len() == 1 && names[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    let cols = map_columns(&names, policy, true)?;

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut report = IngestReport {
        rows_read: 0,
        rows_accepted: 0,
        rows_rejected: 0,
        rejection_reasons: Vec::new(),
        class_counts: [0; N_CLASSES],
    };
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            // Invalid UTF-8 inside a row rejects the row, not the file.
            Err(e) if matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) => {
                let line = lines.line(e.position());
                report.rows_read += 1;
                report.rows_rejected += 1;
                report.rejection_reasons.push(Rejection {
                    line,
                    reason: "invalid UTF-8".into(),
                });
                continue;
            }
            Err(e) => return Err(e.into()),
        }
        report.rows_read += 1;
        let line = lines.line(record.position());
        match parse_record(&record, &cols) {
            Ok(rec) => {
                data.extend_from_slice(&rec.features);
                labels.push(rec.action.index());
                report.class_counts[rec.action.index()] += 1;
                report.rows_accepted += 1;
            }
            Err(err) => {
                report.rows_rejected += 1;
                report.rejection_reasons.push(Rejection {
                    line,
                    reason: err.to_string(),
                });
            }
        }
    }
    let matrix = Matrix::from_vec(labels.len(), N_FEATURES, data)?;
    Ok((Dataset::new(matrix, labels)?, report))
}

pub fn parse_csv_path(path: impl AsRef<Path>, policy: SchemaPolicy) -> Result<(Dataset, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(std::io::BufReader::new(file), policy)
}

/// Unlabelled rows for prediction, with the raw input echoed back for output.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub header: Vec<String>,
    pub raw_rows: Vec<Vec<String>>,
    pub matrix: Matrix,
}

/// Parses a CSV whose columns are exactly the 11 feature names (any order).
///
/// Any bad row is an error here since every input row needs a prediction.
pub fn parse_feature_csv<R: Read>(source: R) -> Result<FeatureTable> {
    let bytes = read_all(source)?;
    let lines = LineIndex::new(&bytes);
    let mut rdr = reader(bytes.as_slice());
    let header = header_names(rdr.headers()?);
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    let unknown: Vec<&String> = header.iter().filter(|h| !FEATURE_NAMES.contains(&h.as_str())).collect();
    if !unknown.is_empty() {
        return Err(Error::Header(format!(
            "unknown columns {unknown:?}; expected header {:?}",
            FEATURE_NAMES
        )));
    }
    let cols = map_columns(&header, SchemaPolicy::HeaderMapped, false)
        .map_err(|_| Error::Header(format!("expected header {:?}, found {header:?}", FEATURE_NAMES)))?;
    let mut data = Vec::new();
    let mut raw_rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = lines.line(rec.position());
        let row = parse_features(&rec, &cols).map_err(|e| Error::Data(format!("line {line}: {e}")))?;
        data.extend_from_slice(&row);
        raw_rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(FeatureTable {
        header,
        matrix: Matrix::from_vec(raw_rows.len(), N_FEATURES, data)?,
        raw_rows,
    })
}
