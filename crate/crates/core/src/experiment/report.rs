//! Report types. Everything here is deterministic for a fixed config and
//! seed; wall-clock durations live in [`Timings`] and are written apart.

use std::fmt::Write as _;

use crate::measures::Measure;
use crate::solver::TrainStats;
use serde::{Deserialize, Serialize};

/// Test-time metrics in `[0, 1]`; `None` where the measure is undefined on
/// the data (for example F1 without positives).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub prbep: Option<f64>,
    pub auc: Option<f64>,
}

impl Metrics {
    pub fn get(&self, measure: Measure) -> Option<f64> {
        match measure {
            Measure::ErrorRate => self.accuracy,
            Measure::F1 => self.f1,
            Measure::Prbep => self.prbep,
            Measure::Auc => self.auc,
        }
    }

    pub fn set(&mut self, measure: Measure, value: Option<f64>) {
        match measure {
            Measure::ErrorRate => self.accuracy = value,
            Measure::F1 => self.f1 = value,
            Measure::Prbep => self.prbep = value,
            Measure::Auc => self.auc = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub c: f64,
    /// Mean validation metric over folds.
    pub mean: f64,
    pub folds: Vec<f64>,
    /// Whether every fold's training converged.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub rule: String,
    pub points: Vec<CvPoint>,
    pub chosen_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxReport {
    pub name: String,
    pub train: Metrics,
    pub test: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub measure: Measure,
    pub seed: u64,
    pub folds: usize,
    pub epsilon: f64,
    pub bias: f64,
    pub scale: bool,
    /// Set for adapted models.
    pub trade_off: Option<f64>,
    pub selection: Selection,
    pub training: TrainStats,
    pub xi: f64,
    pub train: Metrics,
    pub test: Option<Metrics>,
    pub auxiliaries: Vec<AuxReport>,
    /// Ensemble weights of an adapted model.
    pub aux_weights: Option<Vec<f64>>,
    /// Squared norm of the adapted model's linear correction.
    pub delta_norm: Option<f64>,
    pub deployable: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_s: f64,
    pub cross_validation_s: f64,
    pub final_fit_s: f64,
    pub evaluation_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub b: Option<f64>,
    pub iterations: usize,
    pub inference_count: usize,
    pub converged: bool,
    pub train_metric: f64,
    pub test_metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub measure: Measure,
    pub auxiliaries: Vec<String>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub c: f64,
    pub plain_inferences: usize,
    pub adapted_inferences: usize,
    pub plain_converged: bool,
    pub adapted_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub measure: Measure,
    pub trade_off: f64,
    pub auxiliaries: Vec<String>,
    pub rows: Vec<BenchRow>,
    /// Rows where the adapted run needed no more inferences than the plain one.
    pub adapted_not_more: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub measure: Measure,
    pub examples: usize,
    pub metrics: Metrics,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn metrics_row(out: &mut String, label: &str, m: &Metrics) {
    let _ = writeln!(
        out,
        "{label:<34} {:>8} {:>8} {:>8} {:>8}",
        cell(m.accuracy),
        cell(m.f1),
        cell(m.prbep),
        cell(m.auc)
    );
}

fn header(out: &mut String, first: &str) {
    let _ = writeln!(
        out,
        "{first:<34} {:>8} {:>8} {:>8} {:>8}",
        "Accuracy", "F1", "PRBEP", "AUC"
    );
}

impl RunReport {
    /// Plain-text table: the trained model, then each auxiliary in brackets.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let model = match self.trade_off {
            Some(b) => format!("capo {} C={} B={}", self.measure, self.selection.chosen_c, b),
            None => format!("linear {} C={}", self.measure, self.selection.chosen_c),
        };
        let _ = writeln!(out, "# {model}");
        let _ = writeln!(
            out,
            "# iterations={} inferences={} converged={} xi={:.6}",
            self.training.iterations, self.training.inference_count, self.training.converged, self.xi
        );
        for (set, metrics, aux) in [
            (
                "train",
                Some(&self.train),
                self.auxiliaries.iter().map(|a| Some(&a.train)).collect::<Vec<_>>(),
            ),
            (
                "test",
                self.test.as_ref(),
                self.auxiliaries.iter().map(|a| a.test.as_ref()).collect(),
            ),
        ] {
            let Some(metrics) = metrics else { continue };
            let _ = writeln!(out);
            header(&mut out, set);
            metrics_row(&mut out, &model, metrics);
            for (a, m) in self.auxiliaries.iter().zip(aux) {
                if let Some(m) = m {
                    metrics_row(&mut out, &format!("({})", a.name), m);
                }
            }
        }
        if !self.selection.points.is_empty() {
            let _ = writeln!(out, "\n# selection: {}", self.selection.rule);
            let _ = writeln!(out, "{:>12} {:>10} {:>10}", "C", "cv mean", "converged");
            for p in &self.selection.points {
                let _ = writeln!(out, "{:>12} {:>10.4} {:>10}", p.c, p.mean, p.converged);
            }
        }
        out
    }
}

impl SweepReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# sweep {} aux=[{}]", self.measure, self.auxiliaries.join(", "));
        let _ = writeln!(
            out,
            "{:>12} {:>8} {:>6} {:>10} {:>9} {:>8} {:>8}",
            "C", "B", "iters", "inferences", "converged", "train", "test"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>12} {:>8} {:>6} {:>10} {:>9} {:>8.4} {:>8}",
                r.c,
                r.b.map_or_else(|| "-".into(), |b| b.to_string()),
                r.iterations,
                r.inference_count,
                r.converged,
                r.train_metric,
                cell(r.test_metric)
            );
        }
        out
    }
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# bench {} B={} aux=[{}]",
            self.measure,
            self.trade_off,
            self.auxiliaries.join(", ")
        );
        let _ = writeln!(out, "{:>12} {:>10} {:>10}", "C", "plain", "adapted");
        for r in &self.rows {
            let mark = |converged: bool| if converged { "" } else { "*" };
            let _ = writeln!(
                out,
                "{:>12} {:>10} {:>10}",
                r.c,
                format!("{}{}", r.plain_inferences, mark(r.plain_converged)),
                format!("{}{}", r.adapted_inferences, mark(r.adapted_converged))
            );
        }
        let _ = writeln!(
            out,
            "# adapted <= plain in {}/{} rows (* = not converged)",
            self.adapted_not_more,
            self.rows.len()
        );
        out
    }
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# eval {} on {} examples", self.model, self.examples);
        header(&mut out, "model");
        metrics_row(&mut out, &self.model, &self.metrics);
        out
    }
}
