//! Labeled sparse datasets, the SVMlight text format, and the feature
//! augmentation that turns auxiliary-classifier outputs into extra columns.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sparse::SparseVector;

/// Binary class label. `Neg < Pos`, which fixes the lexicographic order used
/// when enumerating label vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// `sign(score)` with `sign(0) = +1`.
    pub fn from_score(score: f64) -> Self {
        if score >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn is_pos(self) -> bool {
        self == Label::Pos
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

impl From<Label> for i8 {
    fn from(label: Label) -> i8 {
        match label {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: SparseVector,
    pub label: Label,
}

/// Immutable, ordered collection of labeled examples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    dimension: usize,
    positives: usize,
}

impl Dataset {
    /// Builds a dataset whose dimension is `1 + max index` (0 when there are
    /// no stored features).
    pub fn from_examples(examples: Vec<Example>) -> Self {
        let dimension = examples
            .iter()
            .filter_map(|e| e.features.max_index())
            .max()
            .map_or(0, |m| m + 1);
        let positives = examples.iter().filter(|e| e.label.is_pos()).count();
        Self {
            examples,
            dimension,
            positives,
        }
    }

    /// Like [`Dataset::from_examples`] but with an explicit dimension, which
    /// must cover every stored index.
    pub fn with_dimension(examples: Vec<Example>, dimension: usize) -> Result<Self> {
        let mut data = Self::from_examples(examples);
        if dimension < data.dimension {
            return Err(Error::Shape(format!(
                "dimension {dimension} is smaller than 1 + max index ({})",
                data.dimension
            )));
        }
        data.dimension = dimension;
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn positives(&self) -> usize {
        self.positives
    }

    pub fn negatives(&self) -> usize {
        self.examples.len() - self.positives
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn labels(&self) -> Vec<Label> {
        self.examples.iter().map(|e| e.label).collect()
    }

    /// `wᵀxᵢ` for every example.
    pub fn scores(&self, w: &[f64], exec: Execution) -> Vec<f64> {
        exec.map_range(self.len(), |i| self.examples[i].features.dot_dense(w))
    }

    /// Examples at `indices`, in that order, keeping this dataset's dimension.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let examples = indices.iter().map(|&i| self.examples[i].clone()).collect();
        let mut out = Self::from_examples(examples);
        out.dimension = self.dimension;
        out
    }

    /// Appends a feature with constant `value` at index `at`, which must not
    /// be below the current dimension. The result has dimension `at + 1`.
    /// Sharing `at` between a training and a test set keeps them aligned.
    pub fn with_constant_feature(&self, at: usize, value: f64) -> Result<Self> {
        if at < self.dimension {
            return Err(Error::Shape(format!(
                "constant feature index {at} collides with dimension {}",
                self.dimension
            )));
        }
        if !value.is_finite() {
            return Err(Error::Parameter(format!(
                "constant feature value must be finite, got {value}"
            )));
        }
        let examples = self
            .examples
            .iter()
            .map(|ex| {
                let mut entries: Vec<(u32, f64)> = ex.features.iter().map(|(i, v)| (i as u32, v)).collect();
                if value != 0.0 {
                    entries.push((at as u32, value));
                }
                Example {
                    features: SparseVector::new(entries).expect("indices stay increasing"),
                    label: ex.label,
                }
            })
            .collect();
        Self::with_dimension(examples, at + 1)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        parse_svmlight(BufReader::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        write_svmlight(self, &mut file).map_err(|e| Error::io(path, e))
    }

    pub fn from_svmlight_str(text: &str) -> Result<Self> {
        parse_svmlight(text.as_bytes())
    }

    pub fn to_svmlight_string(&self) -> String {
        let mut out = String::new();
        for ex in &self.examples {
            push_line(&mut out, ex);
        }
        out
    }
}

/// Reads SVMlight text: `<±1> <idx>:<val> ...` per line, 1-based strictly
/// increasing indices, `#` comments. `qid:` tokens are skipped.
pub fn parse_svmlight<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut examples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.map_err(|e| Error::io("<stream>", e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        examples.push(parse_line(body, line_no)?);
    }
    Ok(Dataset::from_examples(examples))
}

fn parse_line(body: &str, line: usize) -> Result<Example> {
    let mut tokens = body.split_whitespace();
    let label_tok = tokens.next().expect("non-empty line has a token");
    let label = match label_tok.parse::<f64>() {
        Ok(1.0) => Label::Pos,
        Ok(-1.0) => Label::Neg,
        _ => {
            return Err(Error::Label {
                line,
                token: label_tok.to_string(),
            })
        }
    };
    let mut entries: Vec<(u32, f64)> = Vec::new();
    for tok in tokens {
        let parse_err = |message: String| Error::Parse { line, message };
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(format!("expected <index>:<value>, found `{tok}`")))?;
        if idx == "qid" {
            continue;
        }
        let idx: u32 = idx
            .parse()
            .map_err(|_| parse_err(format!("bad feature index `{idx}`")))?;
        if idx == 0 {
            return Err(parse_err("feature indices are 1-based".into()));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| parse_err(format!("bad feature value `{val}`")))?;
        if !val.is_finite() {
            return Err(parse_err(format!("non-finite value for index {idx}")));
        }
        let zero_based = idx - 1;
        if let Some(&(prev, _)) = entries.last() {
            if zero_based <= prev {
                return Err(parse_err(format!("index {idx} does not increase over {}", prev + 1)));
            }
        }
        entries.push((zero_based, val));
    }
    let features = SparseVector::new(entries).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    Ok(Example { features, label })
}

fn push_line(out: &mut String, ex: &Example) {
    out.push_str(if ex.label.is_pos() { "+1" } else { "-1" });
    for (i, v) in ex.features.iter() {
        // `{}` on f64 is the shortest representation that parses back exactly.
        let _ = write!(out, " {}:{}", i + 1, v);
    }
    out.push('\n');
}

pub fn write_svmlight<W: Write>(data: &Dataset, writer: &mut W) -> std::io::Result<()> {
    let mut line = String::new();
    for ex in data.examples() {
        line.clear();
        push_line(&mut line, ex);
        writer.write_all(line.as_bytes())?;
    }
    writer.flush()
}

/// Per-feature max-abs scaling fitted on one dataset and applied to others.
/// Only used when explicitly requested; nothing is rescaled by default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxAbsScaler {
    factors: Vec<f64>,
}

impl MaxAbsScaler {
    pub fn fit(data: &Dataset) -> Self {
        let mut max_abs = vec![0.0f64; data.dimension()];
        for ex in data.examples() {
            for (i, v) in ex.features.iter() {
                max_abs[i] = max_abs[i].max(v.abs());
            }
        }
        let factors = max_abs
            .into_iter()
            .map(|m| if m > 0.0 { 1.0 / m } else { 1.0 })
            .collect();
        Self { factors }
    }

    pub fn apply(&self, data: &Dataset) -> Dataset {
        let examples = data
            .examples()
            .iter()
            .map(|e| Example {
                features: e.features.scale_by(&self.factors),
                label: e.label,
            })
            .collect();
        let mut out = Dataset::from_examples(examples);
        out.dimension = data.dimension();
        out
    }
}

/// Row-major `n × m` matrix of auxiliary predictions, one row per example.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    rows: usize,
    cols: usize,
    values: Vec<Label>,
}

impl PredictionMatrix {
    /// Builds the matrix from one prediction column per auxiliary classifier.
    pub fn from_columns(columns: &[Vec<Label>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some((j, col)) = columns.iter().enumerate().find(|(_, c)| c.len() != rows) {
            return Err(Error::Shape(format!(
                "auxiliary column {j} has {} rows, expected {rows}",
                col.len()
            )));
        }
        let cols = columns.len();
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Label] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Label> {
        (0..self.rows).map(|i| self.values[i * self.cols + j]).collect()
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            values,
        }
    }
}

/// A dataset whose examples are `[f(x)/√B ; x]`: the `m` auxiliary outputs
/// occupy indices `0..m` and the original features are shifted up by `m`.
#[derive(Debug, Clone)]
pub struct AugmentedDataset {
    base: Dataset,
    outputs: PredictionMatrix,
    trade_off: f64,
    augmented: Dataset,
}

impl AugmentedDataset {
    pub fn base(&self) -> &Dataset {
        &self.base
    }

    pub fn outputs(&self) -> &PredictionMatrix {
        &self.outputs
    }

    /// The trade-off `B`.
    pub fn trade_off(&self) -> f64 {
        self.trade_off
    }

    pub fn aux_count(&self) -> usize {
        self.outputs.cols()
    }

    pub fn data(&self) -> &Dataset {
        &self.augmented
    }

    pub fn into_data(self) -> Dataset {
        self.augmented
    }
}

pub fn augment(base: &Dataset, outputs: &PredictionMatrix, trade_off: f64) -> Result<AugmentedDataset> {
    if !(trade_off > 0.0 && trade_off.is_finite()) {
        return Err(Error::Parameter(format!("B must be positive, got {trade_off}")));
    }
    if outputs.rows() != base.len() {
        return Err(Error::Shape(format!(
            "auxiliary outputs have {} rows but the dataset has {} examples",
            outputs.rows(),
            base.len()
        )));
    }
    let scale = 1.0 / trade_off.sqrt();
    let m = outputs.cols();
    let examples = base
        .examples()
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            let prefix: Vec<f64> = outputs.row(i).iter().map(|l| l.value() * scale).collect();
            Example {
                features: ex.features.with_prefix(&prefix),
                label: ex.label,
            }
        })
        .collect();
    let mut augmented = Dataset::from_examples(examples);
    augmented.dimension = m + base.dimension();
    Ok(AugmentedDataset {
        base: base.clone(),
        outputs: outputs.clone(),
        trade_off,
        augmented,
    })
}
