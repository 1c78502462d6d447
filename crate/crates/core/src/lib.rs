//! Linear classifiers trained directly for multivariate performance measures
//! (error rate, F1, PRBEP, AUC) with a cutting-plane structural solver, and
//! adaptation of black-box auxiliary classifiers to those measures through
//! feature augmentation.
//!
//! ## Feature flags
//!
//! - `parallel` (default): run batch loops on the rayon pool. Without it
//!   every [`Execution`] value runs sequentially.

pub mod adapt;
pub mod auxiliary;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod inference;
pub mod measures;
pub mod solver;
pub mod sparse;

pub use adapt::{capo_adapt, AdaptedModel};
pub use auxiliary::Auxiliary;
pub use dataset::{augment, AugmentedDataset, Dataset, Example, Label, PredictionMatrix};
pub use error::{Error, Result};
pub use exec::Execution;
pub use inference::{ConstraintRecord, Witness};
pub use measures::{evaluate, ContingencyTable, Measure};
pub use solver::{cutting_plane_train, Hyperparams, IterationRecord, LinearModel, TrainStats};
pub use sparse::SparseVector;
