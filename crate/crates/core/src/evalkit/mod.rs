//! Metrics, experiments and benchmarks.

mod annotation;
mod bench;
mod metrics;
mod report;

pub use annotation::{AlignmentAnnotation, EventLabel, EventTruth, SkipRecord, MIN_SKIP_DISTANCE};
pub use bench::{bench_update, Algorithm, BenchConfig, BenchRow};
pub use metrics::{
    classify_transitions, error_rate, estimated_error_reduction, extract_stop_resume_distributions,
    fit_h_eff, following_metrics, label_counts, mean_sd_stderr, ExtractedDistributions,
    FollowingMetrics, HEffFit, SkipOutcome, TransitionCounts,
};
pub use report::{evaluate, run_online, EvalReport, LabelCounts};
