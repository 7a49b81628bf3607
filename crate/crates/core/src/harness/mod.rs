//! Training contract and evaluation protocols.

mod baseline;
mod eval;
mod metrics;
pub mod seed;
mod train;

pub use baseline::{select_baseline, write_results_csv, BaselineRow, BaselineTable, RESULTS_SCHEMA};
pub use eval::{
    evaluate_losocv, evaluate_within, losocv_folds, restricted_corpus, with_workers, within_individual_split,
    EvalConfig, EvaluationResult, Fold, FoldOutcome, SampleRef, WithinPrediction, WithinResult, WithinSplit,
};
pub use metrics::{mean, r_squared, sample_sd};
pub use train::{train, ChannelScaler, EpochRecord, InputStandardization, TargetScaler, TrainConfig, TrainedModel};
