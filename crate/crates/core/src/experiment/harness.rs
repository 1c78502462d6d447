//! The experiment pipeline behind every command: load, cross-validate C,
//! fit on the full training file, then (and only then) read the test file.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::adapt::{adapt_with_outputs, AdaptedModel};
use crate::auxiliary::{load_external_predictions, train_linear_sgd, train_tree, Auxiliary, ExternalPredictions};
use crate::dataset::{Dataset, Example, Label, MaxAbsScaler, PredictionMatrix};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measures::{evaluate, Measure};
use crate::solver::{cutting_plane_train_with, Hyperparams, IterationRecord, LinearModel, TrainStats};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::aux_spec::AuxSpec;
use super::config::ExperimentConfig;
use super::report::{
    AuxReport, BenchReport, BenchRow, CvPoint, EvalReport, Metrics, RunReport, Selection, SweepReport, SweepRow,
    Timings,
};

const SELECTION_RULE: &str = "highest mean validation metric; smallest C on ties";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    CrossValidation,
    FinalFit,
    Evaluation,
}

/// What the audit hook sees: stage transitions and every file read, in
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditEvent<'a> {
    Stage(Stage),
    Read(&'a Path),
}

pub type AuditHook = Arc<dyn Fn(&AuditEvent<'_>) + Send + Sync>;

/// Input transformation fitted on the training file and stored with the
/// model: features past `dimension` are dropped, optional max-abs scaling,
/// then a constant feature `bias` at index `dimension` (omitted when zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocess {
    pub dimension: usize,
    pub scaler: Option<MaxAbsScaler>,
    pub bias: f64,
}

impl Preprocess {
    pub fn fit(train: &Dataset, scale: bool, bias: f64) -> Self {
        Self {
            dimension: train.dimension(),
            scaler: scale.then(|| MaxAbsScaler::fit(train)),
            bias,
        }
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let examples = data
            .examples()
            .iter()
            .map(|e| Example {
                features: e.features.prefix(self.dimension),
                label: e.label,
            })
            .collect();
        let mut out = Dataset::with_dimension(examples, self.dimension)?;
        if let Some(scaler) = &self.scaler {
            out = scaler.apply(&out);
        }
        if self.bias != 0.0 {
            out = out.with_constant_feature(self.dimension, self.bias)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SavedModel {
    Linear {
        preprocess: Preprocess,
        model: LinearModel,
    },
    Adapted {
        preprocess: Preprocess,
        model: AdaptedModel,
    },
}

impl SavedModel {
    pub fn preprocess(&self) -> &Preprocess {
        match self {
            SavedModel::Linear { preprocess, .. } | SavedModel::Adapted { preprocess, .. } => preprocess,
        }
    }

    pub fn measure(&self) -> Measure {
        match self {
            SavedModel::Linear { model, .. } => model.measure,
            SavedModel::Adapted { model, .. } => model.measure,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SavedModel::Linear { model, .. } => format!("linear {} C={}", model.measure, model.hyperparams.c),
            SavedModel::Adapted { model, .. } => {
                format!("capo {} C={} B={}", model.measure, model.hyperparams.c, model.trade_off)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let expected = model.preprocess().dimension + usize::from(model.preprocess().bias != 0.0);
        let found = match &model {
            SavedModel::Linear { model, .. } => model.w.len(),
            SavedModel::Adapted { model, .. } => {
                if model.aux_weights.len() != model.auxiliaries.len() {
                    return Err(Error::Format(
                        "ensemble weight count differs from auxiliary count".into(),
                    ));
                }
                model.delta.len()
            }
        };
        if found != expected {
            return Err(Error::Format(format!("{found} weights for {expected} features")));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| io_error(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_json(&text)
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Result of `train` or `adapt`.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub timings: Timings,
    pub model: SavedModel,
}

/// Stratified fold ids: examples are shuffled with `seed`, then positives
/// and afterwards negatives are dealt round-robin into `k` folds.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for class in [Label::Pos, Label::Neg] {
        for &i in order.iter().filter(|&&i| labels[i] == class) {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

/// Every metric that is defined on `truth`.
pub fn all_metrics(truth: &[Label], scores: &[f64]) -> Result<Metrics> {
    let mut out = Metrics::default();
    for m in Measure::ALL {
        match evaluate(m, truth, scores) {
            Ok(v) => out.set(m, Some(v)),
            Err(Error::MeasureUndefined { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn label_scores(labels: &[Label]) -> Vec<f64> {
    labels.iter().map(|l| l.value()).collect()
}

/// Where an auxiliary column comes from on the training side.
enum AuxSource {
    /// Retrained on whatever subset it is given.
    Builtin(AuxSpec),
    /// Fixed predictions for the whole training file.
    External { path: PathBuf, labels: Vec<Label> },
}

struct Fold {
    train: Dataset,
    valid: Dataset,
    train_outputs: PredictionMatrix,
    valid_outputs: PredictionMatrix,
    auxiliaries: Vec<Auxiliary>,
}

enum Fitted {
    Linear(LinearModel),
    Adapted(AdaptedModel),
}

impl Fitted {
    fn stats(&self) -> TrainStats {
        match self {
            Fitted::Linear(m) => m.stats,
            Fitted::Adapted(m) => m.stats,
        }
    }
}

pub struct Harness {
    cfg: ExperimentConfig,
    exec: Execution,
    audit: Option<AuditHook>,
    trace: Option<PathBuf>,
}

impl Harness {
    pub fn new(cfg: ExperimentConfig, exec: Execution) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            exec,
            audit: None,
            trace: None,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    /// Observes stage changes and file reads.
    pub fn with_audit(mut self, hook: AuditHook) -> Self {
        self.audit = Some(hook);
        self
    }

    /// Writes the final fit's per-iteration records to `path`.
    pub fn with_trace(mut self, path: impl Into<PathBuf>) -> Self {
        self.trace = Some(path.into());
        self
    }

    fn stage(&self, stage: Stage) {
        if let Some(hook) = &self.audit {
            hook(&AuditEvent::Stage(stage));
        }
    }

    fn read_dataset(&self, path: &Path) -> Result<Dataset> {
        if let Some(hook) = &self.audit {
            hook(&AuditEvent::Read(path));
        }
        Dataset::load(path)
    }

    fn read_predictions(&self, path: &Path, n: usize) -> Result<ExternalPredictions> {
        if let Some(hook) = &self.audit {
            hook(&AuditEvent::Read(path));
        }
        load_external_predictions(path, n)
    }

    fn hyperparams(&self, c: f64) -> Hyperparams {
        Hyperparams {
            c,
            epsilon: self.cfg.epsilon,
            max_iterations: self.cfg.max_iterations,
        }
    }

    fn load_train(&self) -> Result<(Dataset, Preprocess)> {
        self.stage(Stage::Load);
        let raw = self.read_dataset(&self.cfg.data)?;
        if raw.is_empty() {
            return Err(Error::Training(format!("{} has no examples", self.cfg.data.display())));
        }
        let pre = Preprocess::fit(&raw, self.cfg.scale, self.cfg.bias);
        let train = pre.apply(&raw)?;
        Ok((train, pre))
    }

    /// The test file, if configured; reading it opens the evaluation stage.
    fn load_test(&self, pre: &Preprocess) -> Result<Option<Dataset>> {
        self.stage(Stage::Evaluation);
        match &self.cfg.test {
            Some(path) => Ok(Some(pre.apply(&self.read_dataset(path)?)?)),
            None => Ok(None),
        }
    }

    fn aux_sources(&self, specs: &[AuxSpec], n: usize) -> Result<Vec<AuxSource>> {
        specs
            .iter()
            .map(|spec| match spec {
                AuxSpec::Pred { train, .. } => Ok(AuxSource::External {
                    path: train.clone(),
                    labels: self.read_predictions(train, n)?.labels,
                }),
                builtin => Ok(AuxSource::Builtin(builtin.clone())),
            })
            .collect()
    }

    fn fit_builtin(&self, spec: &AuxSpec, data: &Dataset) -> Result<Auxiliary> {
        match spec {
            AuxSpec::Tree(p) => Ok(Auxiliary::Tree(train_tree(data, *p, self.exec)?)),
            AuxSpec::Sgd(p) => Ok(Auxiliary::Sgd(train_linear_sgd(data, *p)?)),
            AuxSpec::Pred { .. } => unreachable!("external auxiliaries are not trained"),
        }
    }

    /// Auxiliaries fitted on `train_idx` and their outputs on both index sets.
    fn fold(&self, sources: &[AuxSource], data: &Dataset, train_idx: &[usize], valid_idx: &[usize]) -> Result<Fold> {
        let train = data.subset(train_idx);
        let valid = data.subset(valid_idx);
        let mut auxiliaries = Vec::new();
        let (mut tr_cols, mut va_cols) = (Vec::new(), Vec::new());
        for source in sources {
            match source {
                AuxSource::Builtin(spec) => {
                    let aux = self.fit_builtin(spec, &train)?;
                    tr_cols.push(aux.predict_dataset(&train, self.exec)?);
                    va_cols.push(aux.predict_dataset(&valid, self.exec)?);
                    auxiliaries.push(aux);
                }
                AuxSource::External { path, labels } => {
                    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
                    tr_cols.push(pick(train_idx));
                    va_cols.push(pick(valid_idx));
                    auxiliaries.push(Auxiliary::External(ExternalPredictions {
                        source: path.clone(),
                        labels: pick(train_idx),
                    }));
                }
            }
        }
        Ok(Fold {
            train,
            valid,
            train_outputs: PredictionMatrix::from_columns(&tr_cols)?,
            valid_outputs: PredictionMatrix::from_columns(&va_cols)?,
            auxiliaries,
        })
    }

    fn fit(&self, fold: &Fold, adapt: bool, c: f64, trade_off: f64, trace: Option<&mut String>) -> Result<Fitted> {
        let hp = self.hyperparams(c);
        let measure = self.cfg.measure;
        let mut sink = trace;
        let observe = |r: &IterationRecord| {
            if let Some(buf) = sink.as_deref_mut() {
                buf.push_str(&r.to_string());
                buf.push('\n');
            }
        };
        if adapt {
            let model = adapt_with_outputs(
                &fold.train,
                &fold.train_outputs,
                fold.auxiliaries.clone(),
                measure,
                &hp,
                trade_off,
                self.exec,
                observe,
            )?;
            Ok(Fitted::Adapted(model))
        } else {
            Ok(Fitted::Linear(cutting_plane_train_with(
                &fold.train,
                measure,
                &hp,
                self.exec,
                observe,
            )?))
        }
    }

    fn valid_scores(&self, fold: &Fold, fitted: &Fitted) -> Result<Vec<f64>> {
        match fitted {
            Fitted::Linear(m) => Ok(m.scores(&fold.valid, self.exec)),
            Fitted::Adapted(m) => m.scores_with_outputs(&fold.valid, &fold.valid_outputs, self.exec),
        }
    }

    /// Cross-validates the C grid; a one-point grid is taken as is.
    fn select_c(&self, data: &Dataset, sources: &[AuxSource], adapt: bool, trade_off: f64) -> Result<Selection> {
        self.stage(Stage::CrossValidation);
        let grid = &self.cfg.c;
        if grid.len() == 1 {
            return Ok(Selection {
                rule: "single C value, no cross-validation".into(),
                points: Vec::new(),
                chosen_c: grid[0],
            });
        }
        let k = self.cfg.folds;
        if k > data.len() {
            return Err(Error::Config(format!("{k} folds for {} examples", data.len())));
        }
        let fold_of = stratified_folds(&data.labels(), k, self.cfg.seed);
        let fold_ids: Vec<usize> = (0..k).collect();
        let folds = self.exec.map_tasks(&fold_ids, |&f| {
            let (valid, train): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| fold_of[i] == f);
            self.fold(sources, data, &train, &valid)
        });
        let folds = folds.into_iter().collect::<Result<Vec<_>>>()?;
        let tasks: Vec<(usize, usize)> = (0..grid.len()).flat_map(|ci| (0..k).map(move |f| (ci, f))).collect();
        let results = self.exec.map_tasks(&tasks, |&(ci, f)| {
            let fold = &folds[f];
            let fitted = self.fit(fold, adapt, grid[ci], trade_off, None)?;
            let scores = self.valid_scores(fold, &fitted)?;
            let metric = evaluate(self.cfg.measure, &fold.valid.labels(), &scores)?;
            Ok((metric, fitted.stats().converged))
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let points: Vec<CvPoint> = grid
            .iter()
            .enumerate()
            .map(|(ci, &c)| {
                let row = &results[ci * k..(ci + 1) * k];
                CvPoint {
                    c,
                    mean: row.iter().map(|r| r.0).sum::<f64>() / k as f64,
                    folds: row.iter().map(|r| r.0).collect(),
                    converged: row.iter().all(|r| r.1),
                }
            })
            .collect();
        let best = points
            .iter()
            .reduce(|best, p| {
                if p.mean > best.mean || (p.mean == best.mean && p.c < best.c) {
                    p
                } else {
                    best
                }
            })
            .expect("grid is non-empty");
        Ok(Selection {
            rule: SELECTION_RULE.into(),
            chosen_c: best.c,
            points,
        })
    }

    fn write_trace(&self, text: &str) -> Result<()> {
        match &self.trace {
            Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
            None => Ok(()),
        }
    }

    /// Plain linear training with cross-validated C.
    pub fn train(&self) -> Result<Outcome> {
        self.run(false)
    }

    /// Adaptation of the configured auxiliaries with cross-validated C.
    pub fn adapt(&self) -> Result<Outcome> {
        if self.cfg.aux.is_empty() {
            return Err(Error::Config("adapt needs at least one --aux".into()));
        }
        self.run(true)
    }

    fn run(&self, adapt: bool) -> Result<Outcome> {
        let mut timings = Timings::default();
        let clock = Instant::now();
        let (train, pre) = self.load_train()?;
        let specs: &[AuxSpec] = if adapt { &self.cfg.aux } else { &[] };
        let sources = self.aux_sources(specs, train.len())?;
        timings.load_s = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let trade_off = self.cfg.trade_off();
        let selection = self.select_c(&train, &sources, adapt, trade_off)?;
        timings.cross_validation_s = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        self.stage(Stage::FinalFit);
        let all: Vec<usize> = (0..train.len()).collect();
        let full = self.fold(&sources, &train, &all, &[])?;
        let mut trace = String::new();
        let fitted = self.fit(&full, adapt, selection.chosen_c, trade_off, Some(&mut trace))?;
        self.write_trace(&trace)?;
        timings.final_fit_s = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let truth = train.labels();
        let train_scores = match &fitted {
            Fitted::Linear(m) => m.scores(&train, self.exec),
            Fitted::Adapted(m) => m.scores_with_outputs(&train, &full.train_outputs, self.exec)?,
        };
        let train_metrics = all_metrics(&truth, &train_scores)?;
        let mut aux_reports = full
            .auxiliaries
            .iter()
            .enumerate()
            .map(|(j, aux)| {
                Ok(AuxReport {
                    name: aux.name(),
                    train: all_metrics(&truth, &label_scores(&full.train_outputs.column(j)))?,
                    test: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let test = self.load_test(&pre)?;
        let mut test_metrics = None;
        if let Some(test) = &test {
            let test_truth = test.labels();
            match &fitted {
                Fitted::Linear(m) => test_metrics = Some(all_metrics(&test_truth, &m.scores(test, self.exec))?),
                Fitted::Adapted(m) => {
                    let mut columns: Vec<Option<Vec<Label>>> = Vec::new();
                    for (aux, spec) in m.auxiliaries.iter().zip(specs) {
                        columns.push(match spec {
                            AuxSpec::Pred { test: Some(path), .. } => {
                                Some(self.read_predictions(path, test.len())?.labels)
                            }
                            AuxSpec::Pred { test: None, .. } => None,
                            _ => Some(aux.predict_dataset(test, self.exec)?),
                        });
                    }
                    for (report, col) in aux_reports.iter_mut().zip(&columns) {
                        if let Some(col) = col {
                            report.test = Some(all_metrics(&test_truth, &label_scores(col))?);
                        }
                    }
                    if columns.iter().all(Option::is_some) {
                        let columns: Vec<Vec<Label>> = columns.into_iter().flatten().collect();
                        let outputs = PredictionMatrix::from_columns(&columns)?;
                        let scores = m.scores_with_outputs(test, &outputs, self.exec)?;
                        test_metrics = Some(all_metrics(&test_truth, &scores)?);
                    }
                }
            }
        }
        timings.evaluation_s = clock.elapsed().as_secs_f64();

        let (stats, xi) = match &fitted {
            Fitted::Linear(m) => (m.stats, m.xi),
            Fitted::Adapted(m) => (m.stats, m.xi),
        };
        let report = RunReport {
            command: if adapt { "adapt" } else { "train" }.into(),
            measure: self.cfg.measure,
            seed: self.cfg.seed,
            folds: self.cfg.folds,
            epsilon: self.cfg.epsilon,
            bias: self.cfg.bias,
            scale: self.cfg.scale,
            trade_off: adapt.then_some(trade_off),
            selection,
            training: stats,
            xi,
            train: train_metrics,
            test: test_metrics,
            auxiliaries: aux_reports,
            aux_weights: match &fitted {
                Fitted::Adapted(m) => Some(m.aux_weights.clone()),
                Fitted::Linear(_) => None,
            },
            delta_norm: match &fitted {
                Fitted::Adapted(m) => Some(m.delta_norm()),
                Fitted::Linear(_) => None,
            },
            deployable: match &fitted {
                Fitted::Adapted(m) => m.deployable,
                Fitted::Linear(_) => true,
            },
        };
        let model = match fitted {
            Fitted::Linear(model) => SavedModel::Linear { preprocess: pre, model },
            Fitted::Adapted(model) => SavedModel::Adapted { preprocess: pre, model },
        };
        Ok(Outcome { report, timings, model })
    }

    /// One fit per grid point on the full training file, no cross-validation.
    /// With auxiliaries the grid is C × B, otherwise C alone.
    pub fn sweep(&self) -> Result<SweepReport> {
        let (train, pre) = self.load_train()?;
        let adapt = !self.cfg.aux.is_empty();
        let sources = self.aux_sources(&self.cfg.aux, train.len())?;
        self.stage(Stage::FinalFit);
        let all: Vec<usize> = (0..train.len()).collect();
        let full = self.fold(&sources, &train, &all, &[])?;
        let b_grid: Vec<Option<f64>> = if adapt {
            self.cfg.b.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        let tasks: Vec<(f64, Option<f64>)> = self
            .cfg
            .c
            .iter()
            .flat_map(|&c| b_grid.iter().map(move |&b| (c, b)))
            .collect();
        let fits = self
            .exec
            .map_tasks(&tasks, |&(c, b)| self.fit(&full, adapt, c, b.unwrap_or(1.0), None));
        let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;

        let truth = train.labels();
        let test = self.load_test(&pre)?;
        let test_outputs = match &test {
            Some(test) if adapt => self.test_outputs(&full.auxiliaries, test)?,
            _ => None,
        };
        let mut rows = Vec::with_capacity(tasks.len());
        for (&(c, b), fitted) in tasks.iter().zip(&fits) {
            let stats = fitted.stats();
            let (train_scores, test_scores) = match fitted {
                Fitted::Linear(m) => (
                    m.scores(&train, self.exec),
                    test.as_ref().map(|t| m.scores(t, self.exec)),
                ),
                Fitted::Adapted(m) => (
                    m.scores_with_outputs(&train, &full.train_outputs, self.exec)?,
                    match (&test, &test_outputs) {
                        (Some(t), Some(o)) => Some(m.scores_with_outputs(t, o, self.exec)?),
                        _ => None,
                    },
                ),
            };
            let test_metric = match (&test, test_scores) {
                (Some(t), Some(s)) => Some(evaluate(self.cfg.measure, &t.labels(), &s)?),
                _ => None,
            };
            rows.push(SweepRow {
                c,
                b,
                iterations: stats.iterations,
                inference_count: stats.inference_count,
                converged: stats.converged,
                train_metric: evaluate(self.cfg.measure, &truth, &train_scores)?,
                test_metric,
            });
        }
        Ok(SweepReport {
            measure: self.cfg.measure,
            auxiliaries: full.auxiliaries.iter().map(Auxiliary::name).collect(),
            rows,
        })
    }

    /// Test-set outputs of the auxiliaries, or `None` when an external one
    /// has no test predictions.
    fn test_outputs(&self, auxiliaries: &[Auxiliary], test: &Dataset) -> Result<Option<PredictionMatrix>> {
        let mut columns = Vec::new();
        for (aux, spec) in auxiliaries.iter().zip(&self.cfg.aux) {
            match spec {
                AuxSpec::Pred { test: Some(path), .. } => columns.push(self.read_predictions(path, test.len())?.labels),
                AuxSpec::Pred { test: None, .. } => return Ok(None),
                _ => columns.push(aux.predict_dataset(test, self.exec)?),
            }
        }
        PredictionMatrix::from_columns(&columns).map(Some)
    }

    /// Plain and adapted fits at each C, paired by inference count. Without
    /// configured auxiliaries a default tree is used.
    pub fn bench(&self) -> Result<BenchReport> {
        let (train, _) = self.load_train()?;
        let specs = if self.cfg.aux.is_empty() {
            vec![AuxSpec::Tree(Default::default())]
        } else {
            self.cfg.aux.clone()
        };
        let sources = self.aux_sources(&specs, train.len())?;
        self.stage(Stage::FinalFit);
        let all: Vec<usize> = (0..train.len()).collect();
        let full = self.fold(&sources, &train, &all, &[])?;
        let trade_off = self.cfg.trade_off();
        let tasks: Vec<(f64, bool)> = self.cfg.c.iter().flat_map(|&c| [(c, false), (c, true)]).collect();
        let fits = self
            .exec
            .map_tasks(&tasks, |&(c, adapt)| self.fit(&full, adapt, c, trade_off, None));
        let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
        let rows: Vec<BenchRow> = fits
            .chunks(2)
            .zip(&self.cfg.c)
            .map(|(pair, &c)| {
                let (plain, adapted) = (pair[0].stats(), pair[1].stats());
                BenchRow {
                    c,
                    plain_inferences: plain.inference_count,
                    adapted_inferences: adapted.inference_count,
                    plain_converged: plain.converged,
                    adapted_converged: adapted.converged,
                }
            })
            .collect();
        Ok(BenchReport {
            measure: self.cfg.measure,
            trade_off,
            auxiliaries: full.auxiliaries.iter().map(Auxiliary::name).collect(),
            adapted_not_more: rows
                .iter()
                .filter(|r| r.adapted_inferences <= r.plain_inferences)
                .count(),
            rows,
        })
    }
}

/// Applies a saved model to raw data. External auxiliaries take their
/// predictions from `external`, in order.
pub fn evaluate_saved(
    model: &SavedModel,
    raw: &Dataset,
    external: &[ExternalPredictions],
    exec: Execution,
) -> Result<EvalReport> {
    let data = model.preprocess().apply(raw)?;
    let scores = match model {
        SavedModel::Linear { model, .. } => model.scores(&data, exec),
        SavedModel::Adapted { model, .. } => model.scores(&data, external, exec)?,
    };
    Ok(EvalReport {
        model: model.describe(),
        measure: model.measure(),
        examples: data.len(),
        metrics: all_metrics(&data.labels(), &scores)?,
    })
}
