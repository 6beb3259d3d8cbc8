use crate::error::{Error, Result};
use crate::hmm::logspace::{ln_or_floor, LOG_FLOOR};

const STOCHASTIC_TOL: f64 = 1e-9;

/// Whether the in-band residual `α = a − S·r` is known to be nonnegative.
///
/// The fast Moore-output recursions rely on `α ≥ 0`; the general recursions
/// accept either regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Nonnegative,
    Signed,
}

/// Transition matrix of the form `a[i][j] = α[i][j] + S[i]·r[j]`, with `α`
/// confined to the band `-d1 <= j - i <= d2`.
///
/// Band entries are stored per source row at offset `k = (j - i) + d1`.
/// Entries whose target falls outside `0..n` are kept at zero.
#[derive(Debug, Clone)]
pub struct TransitionModel {
    n: usize,
    d1: usize,
    d2: usize,
    alpha: Vec<f64>,
    skip: Vec<f64>,
    resume: Vec<f64>,
    stop: Vec<f64>,
    gamma_bar: f64,
    regime: Regime,
    log_alpha: Vec<f64>,
    log_a_band: Vec<f64>,
    log_skip: Vec<f64>,
    log_resume: Vec<f64>,
    constant_skip: Option<f64>,
}

impl TransitionModel {
    /// Builds a model from per-row band values (`n * (d1 + d2 + 1)` entries),
    /// skip masses `S` and the resumption distribution `r`.
    pub fn new(
        d1: usize,
        d2: usize,
        alpha: Vec<f64>,
        skip: Vec<f64>,
        resume: Vec<f64>,
        regime: Regime,
    ) -> Result<Self> {
        let n = skip.len();
        if n == 0 {
            return Err(Error::ModelInconsistency("model needs at least one state".into()));
        }
        let width = d1 + d2 + 1;
        if alpha.len() != n * width {
            return Err(Error::Dimension {
                expected: n * width,
                got: alpha.len(),
            });
        }
        if resume.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: resume.len(),
            });
        }
        if resume.iter().chain(skip.iter()).any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::ModelInconsistency(
                "skip masses and resumption probabilities must be finite and nonnegative".into(),
            ));
        }
        let r_sum: f64 = resume.iter().sum();
        if (r_sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::ModelInconsistency(format!(
                "resumption distribution sums to {r_sum}"
            )));
        }

        let mut alpha = alpha;
        for i in 0..n {
            let row = &mut alpha[i * width..(i + 1) * width];
            for (k, a) in row.iter_mut().enumerate() {
                if !a.is_finite() {
                    return Err(Error::ModelInconsistency(format!("non-finite band entry in row {i}")));
                }
                if !in_range(i, k, d1, n) {
                    *a = 0.0;
                } else if regime == Regime::Nonnegative && *a < 0.0 {
                    return Err(Error::ModelInconsistency(format!(
                        "negative band entry in row {i} of a nonnegative-regime model"
                    )));
                }
            }
            let row_sum: f64 = row.iter().sum::<f64>() + skip[i] * r_sum;
            if (row_sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::ModelInconsistency(format!(
                    "row {i} sums to {row_sum}, not 1"
                )));
            }
        }

        let skip_total: f64 = skip.iter().sum();
        let gamma_bar = skip_total / n as f64;
        if !(0.0..1.0).contains(&gamma_bar) {
            return Err(Error::ModelInconsistency(format!(
                "average skip probability {gamma_bar} outside [0, 1)"
            )));
        }
        let stop = if skip_total > 0.0 {
            skip.iter().map(|&s| s / skip_total).collect()
        } else {
            vec![1.0 / n as f64; n]
        };

        let mut log_alpha = vec![LOG_FLOOR; n * width];
        let mut log_a_band = vec![LOG_FLOOR; n * width];
        for i in 0..n {
            for k in 0..width {
                if !in_range(i, k, d1, n) {
                    continue;
                }
                let j = i + k - d1;
                let idx = i * width + k;
                log_alpha[idx] = ln_or_floor(alpha[idx]);
                log_a_band[idx] = ln_or_floor(alpha[idx] + skip[i] * resume[j]);
                if regime == Regime::Signed && alpha[idx] + skip[i] * resume[j] < -STOCHASTIC_TOL {
                    return Err(Error::ModelInconsistency(format!(
                        "transition {i}->{j} has negative probability"
                    )));
                }
            }
        }
        let first = skip[0];
        let constant_skip = skip.iter().all(|&s| s == first).then_some(first);

        Ok(TransitionModel {
            n,
            d1,
            d2,
            log_skip: skip.iter().map(|&s| ln_or_floor(s)).collect(),
            log_resume: resume.iter().map(|&r| ln_or_floor(r)).collect(),
            alpha,
            skip,
            resume,
            stop,
            gamma_bar,
            regime,
            log_alpha,
            log_a_band,
            constant_skip,
        })
    }

    /// Pure band model (no skips). Rows must already be stochastic.
    pub fn banded(d1: usize, d2: usize, alpha: Vec<f64>) -> Result<Self> {
        let n = alpha.len() / (d1 + d2 + 1);
        let uniform = vec![1.0 / n.max(1) as f64; n];
        Self::new(d1, d2, alpha, vec![0.0; n], uniform, Regime::Nonnegative)
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    /// Band width `D = d1 + d2 + 1`.
    pub fn width(&self) -> usize {
        self.d1 + self.d2 + 1
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    pub fn skip(&self) -> &[f64] {
        &self.skip
    }

    pub fn resume(&self) -> &[f64] {
        &self.resume
    }

    pub fn stop(&self) -> &[f64] {
        &self.stop
    }

    /// The common skip mass if every state has the same `S`.
    pub fn constant_skip(&self) -> Option<f64> {
        self.constant_skip
    }

    /// `true` when `j` is in the band of source row `i`.
    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.d1 >= i && j <= i + self.d2
    }

    /// Band residual `α[i][j]`, zero outside the band.
    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.alpha[i * self.width() + (j + self.d1 - i)]
        } else {
            0.0
        }
    }

    /// Full transition probability `a[i][j]`.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.alpha(i, j) + self.skip[i] * self.resume[j]
    }

    /// `ln a[i][j]`, with out-of-band entries evaluated as `ln S[i] + ln r[j]`.
    #[inline]
    pub fn log_prob(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.log_a_band[i * self.width() + (j + self.d1 - i)]
        } else {
            self.log_skip[i] + self.log_resume[j]
        }
    }

    /// Row `i` of `α` by offset, `k = (j - i) + d1`.
    pub fn alpha_row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.alpha[i * w..(i + 1) * w]
    }

    pub(crate) fn log_alpha_row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.log_alpha[i * w..(i + 1) * w]
    }

    pub(crate) fn log_a_band_row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.log_a_band[i * w..(i + 1) * w]
    }

    pub(crate) fn log_skip(&self) -> &[f64] {
        &self.log_skip
    }

    pub(crate) fn log_resume(&self) -> &[f64] {
        &self.log_resume
    }

    /// Predecessors `j` of target `i` that lie in the band: `i - d2 ..= i + d1`.
    #[inline]
    pub fn predecessors(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.d2)..=(i + self.d1).min(self.n - 1)
    }

    /// Successors `j` of source `i` that lie in the band: `i - d1 ..= i + d2`.
    #[inline]
    pub fn successors(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.d1)..=(i + self.d2).min(self.n - 1)
    }

    /// Band offset index of `i -> j`; caller guarantees `in_band(i, j)`.
    #[inline]
    pub(crate) fn offset(&self, i: usize, j: usize) -> usize {
        j + self.d1 - i
    }
}

#[inline]
fn in_range(i: usize, k: usize, d1: usize, n: usize) -> bool {
    let j = i + k;
    j >= d1 && j - d1 < n
}
