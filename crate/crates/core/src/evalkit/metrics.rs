use crate::error::{Error, Result};
use crate::evalkit::annotation::{AlignmentAnnotation, EventLabel, MIN_SKIP_DISTANCE};
use crate::perf_model::smooth_histogram;

/// Fraction of associated events whose estimated chord differs from the
/// true one. Non-associated events are left out entirely.
pub fn error_rate(estimates: &[usize], annotation: &AlignmentAnnotation) -> Result<f64> {
    if estimates.len() != annotation.len() {
        return Err(Error::Dimension {
            expected: annotation.len(),
            got: estimates.len(),
        });
    }
    let mut total = 0usize;
    let mut wrong = 0usize;
    for (&est, truth) in estimates.iter().zip(&annotation.events) {
        if let Some(c) = truth.chord {
            total += 1;
            wrong += usize::from(est != c);
        }
    }
    if total == 0 {
        return Err(Error::DegenerateInput("no associated events to score".into()));
    }
    Ok(wrong as f64 / total as f64)
}

/// Result of one skip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkipOutcome {
    /// 1-based index of the chord that starts the first pair of consecutive
    /// correctly followed chords; the segment's chord count if none.
    pub following_time: usize,
    pub followed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FollowingMetrics {
    pub outcomes: Vec<SkipOutcome>,
    pub following_rate: Option<f64>,
    pub ft_mean: Option<f64>,
    pub ft_sd: Option<f64>,
    pub ft_stderr: Option<f64>,
}

/// Sample mean, standard deviation and standard error.
pub fn mean_sd_stderr(xs: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, sd, sd / n.sqrt()))
}

/// Correctness of each ground-truth chord unit in `start..end`. A unit is a
/// maximal run of associated events with the same true chord; it counts as
/// correct when the estimate at its last event is that chord.
fn unit_correctness(
    estimates: &[usize],
    annotation: &AlignmentAnnotation,
    start: usize,
    end: usize,
) -> Vec<bool> {
    let mut units: Vec<(usize, bool)> = Vec::new();
    for m in start..end {
        let Some(c) = annotation.events[m].chord else {
            continue;
        };
        let ok = estimates[m] == c;
        match units.last_mut() {
            Some(last) if last.0 == c => last.1 = ok,
            _ => units.push((c, ok)),
        }
    }
    units.into_iter().map(|(_, ok)| ok).collect()
}

/// Following time and rate after each annotated skip.
///
/// A skip is followed when two consecutive chords after the resumption are
/// both estimated correctly before the next skip's events begin. Skips whose
/// segment contains no associated event are not scored.
pub fn following_metrics(estimates: &[usize], annotation: &AlignmentAnnotation) -> Result<FollowingMetrics> {
    if estimates.len() != annotation.len() {
        return Err(Error::Dimension {
            expected: annotation.len(),
            got: estimates.len(),
        });
    }
    annotation.validate()?;
    let mut outcomes = Vec::with_capacity(annotation.skips.len());
    for (k, skip) in annotation.skips.iter().enumerate() {
        let end = annotation.skips.get(k + 1).map_or(annotation.len(), |s| s.event_index);
        let correct = unit_correctness(estimates, annotation, skip.event_index, end);
        if correct.is_empty() {
            continue;
        }
        let first_pair = correct.windows(2).position(|w| w[0] && w[1]);
        outcomes.push(match first_pair {
            Some(u) => SkipOutcome {
                following_time: u + 1,
                followed: true,
            },
            None => SkipOutcome {
                following_time: correct.len(),
                followed: false,
            },
        });
    }
    let fts: Vec<f64> = outcomes.iter().map(|o| o.following_time as f64).collect();
    let stats = mean_sd_stderr(&fts);
    let following_rate = (!outcomes.is_empty())
        .then(|| outcomes.iter().filter(|o| o.followed).count() as f64 / outcomes.len() as f64);
    Ok(FollowingMetrics {
        outcomes,
        following_rate,
        ft_mean: stats.map(|s| s.0),
        ft_sd: stats.map(|s| s.1),
        ft_stderr: stats.map(|s| s.2),
    })
}

/// Step counts of a decoded chord path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionCounts {
    pub normal: usize,
    pub insertion: usize,
    pub deletion: usize,
    pub skip: usize,
    /// Repeated chord within the clustering window; not a mistake.
    pub chord_internal: usize,
    /// `(stop, resume)` of every skip, in path order.
    pub skips: Vec<(usize, usize)>,
}

impl TransitionCounts {
    pub fn total(&self) -> usize {
        self.normal + self.insertion + self.deletion + self.skip + self.chord_internal
    }
}

/// Classifies each step `δ = path[m+1] - path[m]`:
/// `1` normal; `0` with an onset gap above `dt_limit_ms`, or `-1..=-3`,
/// insertion; `2..=3` deletion; `|δ| >= 4` skip; `0` within the window
/// chord-internal.
pub fn classify_transitions(path: &[usize], times_ms: &[f64], dt_limit_ms: f64) -> Result<TransitionCounts> {
    if path.len() != times_ms.len() {
        return Err(Error::Dimension {
            expected: path.len(),
            got: times_ms.len(),
        });
    }
    let mut c = TransitionCounts::default();
    for m in 1..path.len() {
        let delta = path[m] as i64 - path[m - 1] as i64;
        let ioi = times_ms[m] - times_ms[m - 1];
        match delta {
            1 => c.normal += 1,
            0 if ioi <= dt_limit_ms => c.chord_internal += 1,
            0 | -3..=-1 => c.insertion += 1,
            2 | 3 => c.deletion += 1,
            _ => {
                debug_assert!(delta.unsigned_abs() as usize >= MIN_SKIP_DISTANCE);
                c.skip += 1;
                c.skips.push((path[m - 1], path[m]));
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedDistributions {
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub n_skips: usize,
}

/// Smoothed histograms of skip stop and resumption chords over a set of
/// decoded `(path, onset times)` pairs. Uniform when no skip is found.
pub fn extract_stop_resume_distributions(
    decodes: &[(Vec<usize>, Vec<f64>)],
    n_states: usize,
    epsilon: f64,
    dt_limit_ms: f64,
) -> Result<ExtractedDistributions> {
    let mut stops = vec![0.0; n_states];
    let mut resumes = vec![0.0; n_states];
    let mut n_skips = 0;
    for (path, times) in decodes {
        for (i, j) in classify_transitions(path, times, dt_limit_ms)?.skips {
            if i >= n_states || j >= n_states {
                return Err(Error::Dimension {
                    expected: n_states,
                    got: i.max(j) + 1,
                });
            }
            stops[i] += 1.0;
            resumes[j] += 1.0;
            n_skips += 1;
        }
    }
    if n_skips == 0 {
        let u = vec![1.0 / n_states as f64; n_states];
        return Ok(ExtractedDistributions {
            s: u.clone(),
            r: u,
            n_skips,
        });
    }
    Ok(ExtractedDistributions {
        s: smooth_histogram(&stops, epsilon)?,
        r: smooth_histogram(&resumes, epsilon)?,
        n_skips,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HEffFit {
    pub h_eff: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line `FT = H'/h_eff + c` through `(H', FT)` points.
pub fn fit_h_eff(points: &[(f64, f64)]) -> Result<HEffFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-12 * n {
        return Err(Error::Fit("H' values have no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(HEffFit {
        h_eff: 1.0 / slope,
        intercept,
        r_squared,
    })
}

/// Expected reduction of mis-estimated notes per skip, `N_ch·ΔL_FT`.
pub fn estimated_error_reduction(n_ch: f64, delta_ft: f64) -> Result<f64> {
    if !(n_ch > 0.0) {
        return Err(Error::ParameterInconsistency(format!("N_ch must be positive, got {n_ch}")));
    }
    Ok(n_ch * delta_ft)
}

/// Counts of each annotation label.
pub fn label_counts(annotation: &AlignmentAnnotation) -> [(EventLabel, usize); 4] {
    let c = annotation.label_counts();
    [
        (EventLabel::Match, c[0]),
        (EventLabel::PitchError, c[1]),
        (EventLabel::Insertion, c[2]),
        (EventLabel::NonAssociated, c[3]),
    ]
}
