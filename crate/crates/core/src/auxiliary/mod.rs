//! Black-box auxiliary classifiers with ±1 outputs.
//!
//! Two learners are built in ([`tree`] and [`sgd`]); anything else can be
//! plugged in through a predictions file ([`external`]).

pub mod external;
pub mod sgd;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sparse::SparseVector;

pub use external::{load_external_predictions, ExternalPredictions};
pub use sgd::{train_linear_sgd, LinearSgdModel, SgdParams};
pub use tree::{train_tree, TreeModel, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Auxiliary {
    Tree(TreeModel),
    Sgd(LinearSgdModel),
    External(ExternalPredictions),
}

impl Auxiliary {
    /// Short identity tag, e.g. `tree(depth=12,min_leaf=5)`.
    pub fn name(&self) -> String {
        match self {
            Auxiliary::Tree(t) => format!("tree(depth={},min_leaf={})", t.params.max_depth, t.params.min_leaf_size),
            Auxiliary::Sgd(m) => format!("sgd(lambda={},epochs={})", m.params.lambda, m.params.epochs),
            Auxiliary::External(e) => format!("pred({})", e.source.display()),
        }
    }

    /// Whether the classifier can label feature vectors it has not seen.
    pub fn is_deployable(&self) -> bool {
        !matches!(self, Auxiliary::External(_))
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Label> {
        match self {
            Auxiliary::Tree(t) => Ok(t.predict(x)),
            Auxiliary::Sgd(m) => Ok(m.predict(x)),
            Auxiliary::External(e) => Err(Error::NotDeployable(format!(
                "auxiliary {} only has positional predictions",
                e.source.display()
            ))),
        }
    }

    /// Predictions for every example of `data`. External predictions must
    /// have exactly one entry per example.
    pub fn predict_dataset(&self, data: &Dataset, exec: Execution) -> Result<Vec<Label>> {
        match self {
            Auxiliary::External(e) if e.labels.len() != data.len() => Err(Error::Alignment {
                path: e.source.clone(),
                expected: data.len(),
                found: e.labels.len(),
            }),
            Auxiliary::External(e) => Ok(e.labels.clone()),
            model => Ok(exec.map_range(data.len(), |i| {
                model
                    .predict(&data.examples()[i].features)
                    .expect("built-in models always predict")
            })),
        }
    }
}
