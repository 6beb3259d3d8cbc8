use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evalkit::annotation::AlignmentAnnotation;
use crate::evalkit::metrics::{error_rate, following_metrics};
use crate::follower::{CompiledScore, FollowerConfig, PerformanceEvent, Session};
use crate::perf_model::Score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelCounts {
    #[serde(rename = "match")]
    pub matched: usize,
    pub pitch_error: usize,
    pub insertion: usize,
    pub non_associated: usize,
    pub skips: usize,
}

/// Summary of one evaluated run. Rates are fractions; following fields are
/// `None` when the run has no skips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub error_rate: Option<f64>,
    pub following_rate: Option<f64>,
    pub ft_mean: Option<f64>,
    pub ft_sd: Option<f64>,
    pub ft_stderr: Option<f64>,
    pub counts: LabelCounts,
    #[serde(rename = "N_ch")]
    pub n_ch: f64,
}

/// Scores per-event estimates against ground truth.
pub fn evaluate(estimates: &[usize], annotation: &AlignmentAnnotation, score: &Score) -> Result<EvalReport> {
    let following = following_metrics(estimates, annotation)?;
    let c = annotation.label_counts();
    let error_rate = if c[3] == annotation.len() {
        None
    } else {
        Some(error_rate(estimates, annotation)?)
    };
    Ok(EvalReport {
        error_rate,
        following_rate: following.following_rate,
        ft_mean: following.ft_mean,
        ft_sd: following.ft_sd,
        ft_stderr: following.ft_stderr,
        counts: LabelCounts {
            matched: c[0],
            pitch_error: c[1],
            insertion: c[2],
            non_associated: c[3],
            skips: annotation.skips.len(),
        },
        n_ch: score.mean_chord_size(),
    })
}

/// Online estimates (0-based chords) for every event.
pub fn run_online(
    models: Arc<CompiledScore>,
    config: &FollowerConfig,
    events: &[PerformanceEvent],
) -> Result<Vec<usize>> {
    let mut session = Session::new(models, config.clone())?;
    events
        .iter()
        .map(|e| session.process_event(e).map(|o| o.chord))
        .collect()
}
