//! Adapting auxiliary classifiers to a performance measure.
//!
//! The adapted classifier is `Σⱼ aⱼ fʲ(x) + wᵀx`. Training reduces to the
//! plain linear solver on examples augmented with the scaled auxiliary
//! outputs (see [`augment`]); the solution `v = [√B·a ; w]` is unpacked
//! afterwards.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::auxiliary::{Auxiliary, ExternalPredictions};
use crate::dataset::{augment, Dataset, Example, Label, PredictionMatrix};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measures::Measure;
use crate::solver::{cutting_plane_train_with, Hyperparams, IterationRecord, TrainStats};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedModel {
    pub auxiliaries: Vec<Auxiliary>,
    /// Ensemble weights, one per auxiliary.
    #[serde(rename = "a")]
    pub aux_weights: Vec<f64>,
    /// Linear correction over the original features.
    #[serde(rename = "w")]
    pub delta: Vec<f64>,
    #[serde(rename = "B")]
    pub trade_off: f64,
    pub measure: Measure,
    pub hyperparams: Hyperparams,
    /// Slack of the augmented problem at termination.
    pub xi: f64,
    pub stats: TrainStats,
    /// True when every auxiliary can predict on unseen inputs.
    pub deployable: bool,
}

/// Output matrix `fⱼ(xᵢ)`, one column per auxiliary.
pub fn auxiliary_outputs(auxiliaries: &[Auxiliary], data: &Dataset, exec: Execution) -> Result<PredictionMatrix> {
    let columns = auxiliaries
        .iter()
        .map(|aux| aux.predict_dataset(data, exec))
        .collect::<Result<Vec<_>>>()?;
    PredictionMatrix::from_columns(&columns)
}

/// Computes the auxiliary outputs once, then trains the adapted model.
pub fn capo_adapt(
    data: &Dataset,
    auxiliaries: Vec<Auxiliary>,
    measure: Measure,
    hp: &Hyperparams,
    trade_off: f64,
    exec: Execution,
) -> Result<AdaptedModel> {
    if auxiliaries.is_empty() {
        return Err(Error::Parameter("at least one auxiliary classifier is required".into()));
    }
    let outputs = auxiliary_outputs(&auxiliaries, data, exec)?;
    adapt_with_outputs(data, &outputs, auxiliaries, measure, hp, trade_off, exec, |_| {})
}

/// Training from precomputed outputs, so that callers running many fits
/// (cross-validation, sweeps) query each auxiliary only once.
#[allow(clippy::too_many_arguments)]
pub fn adapt_with_outputs(
    data: &Dataset,
    outputs: &PredictionMatrix,
    auxiliaries: Vec<Auxiliary>,
    measure: Measure,
    hp: &Hyperparams,
    trade_off: f64,
    exec: Execution,
    observe: impl FnMut(&IterationRecord),
) -> Result<AdaptedModel> {
    let m = outputs.cols();
    if m == 0 {
        return Err(Error::Parameter("at least one auxiliary classifier is required".into()));
    }
    if auxiliaries.len() != m {
        return Err(Error::Shape(format!(
            "{} auxiliaries but {m} output columns",
            auxiliaries.len()
        )));
    }
    let augmented = augment(data, outputs, trade_off)?;
    let solved = cutting_plane_train_with(augmented.data(), measure, hp, exec, observe)?;
    let root_b = trade_off.sqrt();
    let aux_weights = solved.w[..m].iter().map(|v| v / root_b).collect();
    let delta = solved.w[m..].to_vec();
    Ok(AdaptedModel {
        deployable: auxiliaries.iter().all(Auxiliary::is_deployable),
        auxiliaries,
        aux_weights,
        delta,
        trade_off,
        measure,
        hyperparams: *hp,
        xi: solved.xi,
        stats: solved.stats,
    })
}

/// The weighted-ensemble variant: same solver, but the original features
/// are dropped so the correction `w` stays zero.
#[allow(clippy::too_many_arguments)]
pub fn adapt_ensemble_only(
    data: &Dataset,
    outputs: &PredictionMatrix,
    auxiliaries: Vec<Auxiliary>,
    measure: Measure,
    hp: &Hyperparams,
    trade_off: f64,
    exec: Execution,
) -> Result<AdaptedModel> {
    let bare: Vec<Example> = data
        .examples()
        .iter()
        .map(|ex| Example {
            features: SparseVector::default(),
            label: ex.label,
        })
        .collect();
    let bare = Dataset::with_dimension(bare, 0)?;
    let mut model = adapt_with_outputs(&bare, outputs, auxiliaries, measure, hp, trade_off, exec, |_| {})?;
    model.delta = vec![0.0; data.dimension()];
    Ok(model)
}

impl AdaptedModel {
    /// `Σⱼ aⱼ fʲ + wᵀx` given the auxiliary outputs for `x`.
    pub fn decision_from_outputs(&self, outputs: &[Label], x: &SparseVector) -> f64 {
        let ensemble: f64 = self.aux_weights.iter().zip(outputs).map(|(a, f)| a * f.value()).sum();
        ensemble + x.dot_dense(&self.delta)
    }

    /// Decision value and label for a single input. Fails when an
    /// auxiliary only has positional predictions.
    pub fn predict(&self, x: &SparseVector) -> Result<(f64, Label)> {
        let outputs = self
            .auxiliaries
            .iter()
            .map(|aux| aux.predict(x))
            .collect::<Result<Vec<_>>>()?;
        let d = self.decision_from_outputs(&outputs, x);
        Ok((d, Label::from_score(d)))
    }

    /// Auxiliary outputs on `data`. External auxiliaries take their
    /// predictions from `external`, in order of appearance.
    pub fn outputs_for(
        &self,
        data: &Dataset,
        external: &[ExternalPredictions],
        exec: Execution,
    ) -> Result<PredictionMatrix> {
        let mut supplied = external.iter();
        let columns = self
            .auxiliaries
            .iter()
            .map(|aux| match aux {
                Auxiliary::External(train) => {
                    let preds = supplied.next().ok_or_else(|| {
                        Error::NotDeployable(format!(
                            "auxiliary {} needs a predictions file for this dataset",
                            train.source.display()
                        ))
                    })?;
                    Auxiliary::External(preds.clone()).predict_dataset(data, exec)
                }
                built_in => built_in.predict_dataset(data, exec),
            })
            .collect::<Result<Vec<_>>>()?;
        PredictionMatrix::from_columns(&columns)
    }

    pub fn scores_with_outputs(&self, data: &Dataset, outputs: &PredictionMatrix, exec: Execution) -> Result<Vec<f64>> {
        if outputs.rows() != data.len() || outputs.cols() != self.aux_weights.len() {
            return Err(Error::Shape(format!(
                "expected a {}x{} output matrix, got {}x{}",
                data.len(),
                self.aux_weights.len(),
                outputs.rows(),
                outputs.cols()
            )));
        }
        Ok(exec.map_range(data.len(), |i| {
            self.decision_from_outputs(outputs.row(i), &data.examples()[i].features)
        }))
    }

    pub fn scores(&self, data: &Dataset, external: &[ExternalPredictions], exec: Execution) -> Result<Vec<f64>> {
        let outputs = self.outputs_for(data, external, exec)?;
        self.scores_with_outputs(data, &outputs, exec)
    }

    /// `‖w‖²`, the squared distance of the adapted classifier from the
    /// weighted auxiliary ensemble.
    pub fn delta_norm(&self) -> f64 {
        self.delta.iter().map(|v| v * v).sum()
    }

    /// The solver-space weights `[√B·a ; w]`.
    pub fn augmented_weights(&self) -> Vec<f64> {
        let root_b = self.trade_off.sqrt();
        self.aux_weights
            .iter()
            .map(|a| a * root_b)
            .chain(self.delta.iter().copied())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if model.aux_weights.len() != model.auxiliaries.len() {
            return Err(Error::Format(format!(
                "{} ensemble weights for {} auxiliaries",
                model.aux_weights.len(),
                model.auxiliaries.len()
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Free-function form of [`AdaptedModel::predict`].
pub fn predict_adapted(model: &AdaptedModel, x: &SparseVector) -> Result<(f64, Label)> {
    model.predict(x)
}
