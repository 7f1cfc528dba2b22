//! Splits, metrics, easy/hard breakdown, the synthetic benchmark and the
//! multi-seed experiment runner.

pub mod experiment;
pub mod metrics;
pub mod split;
pub mod synth;

pub use experiment::{run_experiment, ExperimentConfig, MetricsRecord, RunOutput, Summary};
pub use metrics::{auc, f1_binary, mean_std};
pub use split::{easy_hard_split, split_edges, split_sizes, EdgeSplit, SplitSpec};
pub use synth::{synth_benchmark, SynthParams};
