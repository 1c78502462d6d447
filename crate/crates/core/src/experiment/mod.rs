//! Experiment harness: configuration, auxiliary specifications,
//! cross-validated training, sweeps, inference-count benches and reports.

pub mod aux_spec;
pub mod config;
pub mod harness;
pub mod report;

pub use aux_spec::AuxSpec;
pub use config::{parse_grid, ExperimentConfig};
pub use harness::{
    all_metrics, evaluate_saved, stratified_folds, AuditEvent, AuditHook, Harness, Outcome, Preprocess, SavedModel,
    Stage,
};
