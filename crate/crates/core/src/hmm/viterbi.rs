use crate::error::{Error, Result};
use crate::hmm::logspace::{argmax, clamp_floor, ln_or_floor};
use crate::hmm::output::{MooreOutput, OutputModel};
use crate::hmm::transition::TransitionModel;

/// Backpointer stored for the first step, which has no predecessor.
pub const NO_PREDECESSOR: u32 = u32::MAX;

/// Online Viterbi state: per-state best log-probabilities after `step`
/// observations, plus optional backpointers for offline decoding.
#[derive(Debug, Clone)]
pub struct ViterbiState {
    logp: Vec<f64>,
    backpointers: Option<Vec<Vec<u32>>>,
    step: usize,
    work: u64,
}

impl ViterbiState {
    /// Starts from log-probabilities that already include the first emission.
    pub fn from_log_probs(logp: Vec<f64>, keep_backpointers: bool) -> Self {
        let n = logp.len();
        ViterbiState {
            logp: logp.into_iter().map(clamp_floor).collect(),
            backpointers: keep_backpointers.then(|| vec![vec![NO_PREDECESSOR; n]]),
            step: 1,
            work: n as u64,
        }
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.logp
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn n_states(&self) -> usize {
        self.logp.len()
    }

    /// Number of candidate evaluations performed so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn keeps_backpointers(&self) -> bool {
        self.backpointers.is_some()
    }

    pub fn backpointers(&self) -> Option<&[Vec<u32>]> {
        self.backpointers.as_deref()
    }

    /// Current best state, lowest index on ties.
    pub fn best(&self) -> (usize, f64) {
        let i = argmax(&self.logp).expect("state has at least one entry");
        (i, self.logp[i])
    }

    pub(crate) fn advance(&mut self, logp: Vec<f64>, bp: Vec<u32>, work: u64) {
        self.logp = logp;
        if let Some(all) = self.backpointers.as_mut() {
            all.push(bp);
        }
        self.step += 1;
        self.work += work;
    }
}

/// Initializes with the model's resumption distribution `r` as the prior.
pub fn init_state(
    model: &TransitionModel,
    output: &OutputModel,
    first_obs: usize,
    keep_backpointers: bool,
) -> Result<ViterbiState> {
    output.check_against(model)?;
    init_state_with(model.resume(), output, first_obs, keep_backpointers)
}

/// Initializes with an explicit prior over states.
pub fn init_state_with(
    initial: &[f64],
    output: &OutputModel,
    first_obs: usize,
    keep_backpointers: bool,
) -> Result<ViterbiState> {
    if initial.len() != output.n_states() {
        return Err(Error::Dimension {
            expected: output.n_states(),
            got: initial.len(),
        });
    }
    output.check_symbol(first_obs)?;
    let logp = initial
        .iter()
        .enumerate()
        .map(|(i, &p)| ln_or_floor(p) + ln_or_floor(output.initial_prob(i, first_obs)))
        .collect();
    Ok(ViterbiState::from_log_probs(logp, keep_backpointers))
}

fn require_moore(output: &OutputModel) -> Result<&MooreOutput> {
    match output {
        OutputModel::Moore(m) => Ok(m),
        OutputModel::Mealy(_) => Err(Error::Unsupported(
            "fast recursion needs a Moore output; use the general step for Mealy outputs".into(),
        )),
    }
}

fn check_dims(state_n: usize, model: &TransitionModel, output: &OutputModel) -> Result<()> {
    output.check_against(model)?;
    if state_n != model.n_states() {
        return Err(Error::Dimension {
            expected: model.n_states(),
            got: state_n,
        });
    }
    Ok(())
}

/// Linear-time update for the band-plus-rank-1 transition matrix:
///
/// `p'(i) = b_i(o) · max{ max_{j∈nbh(i)} p(j)·a[j][i], r_i · max_j p(j)·S_j }`
///
/// The global skip term is evaluated once per step. Requires `α ≥ 0`, which
/// makes the in-band skip contribution dominated by the band term.
pub fn viterbi_step_fast(
    state: &mut ViterbiState,
    obs: usize,
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<()> {
    let moore = require_moore(output)?;
    check_dims(state.n_states(), model, output)?;
    if model.regime() != crate::hmm::Regime::Nonnegative {
        return Err(Error::Unsupported(
            "fast recursion needs a nonnegative band; use the general step".into(),
        ));
    }
    let log_b = moore.log_column(obs)?;
    let n = model.n_states();
    let logp = &state.logp;

    // Global skip term, lowest index on ties.
    let (skip_arg, skip_val) = match model.constant_skip() {
        Some(s) => {
            let j = argmax(logp).expect("nonempty");
            (j, logp[j] + ln_or_floor(s))
        }
        None => {
            let log_s = model.log_skip();
            let mut best = (0usize, f64::NEG_INFINITY);
            for (j, (&p, &ls)) in logp.iter().zip(log_s).enumerate() {
                let v = p + ls;
                if v > best.1 {
                    best = (j, v);
                }
            }
            best
        }
    };
    if skip_val.is_nan() {
        return Err(Error::Numeric("NaN in skip term".into()));
    }

    let log_r = model.log_resume();
    let mut next = vec![0.0; n];
    let mut bp = vec![0u32; n];
    let mut work = n as u64;
    for i in 0..n {
        let mut best_val = log_r[i] + skip_val;
        let mut best_arg = skip_arg;
        for j in model.predecessors(i) {
            let v = logp[j] + model.log_a_band_row(j)[model.offset(j, i)];
            if v > best_val || (v == best_val && j < best_arg) {
                best_val = v;
                best_arg = j;
            }
        }
        work += model.predecessors(i).count() as u64 + 1;
        next[i] = clamp_floor(best_val + log_b[i]);
        bp[i] = best_arg as u32;
    }
    if next.iter().any(|x| x.is_nan()) {
        return Err(Error::Numeric("NaN in Viterbi update".into()));
    }
    state.advance(next, bp, work);
    Ok(())
}

/// Quadratic-time reference update: scans all `N` predecessors of every state.
/// Works for both output kinds and both band regimes.
pub fn viterbi_step_naive(
    state: &mut ViterbiState,
    obs: usize,
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<()> {
    check_dims(state.n_states(), model, output)?;
    output.check_symbol(obs)?;
    let n = model.n_states();
    let logp = &state.logp;
    let mut next = vec![0.0; n];
    let mut bp = vec![0u32; n];
    match output {
        OutputModel::Moore(moore) => {
            for i in 0..n {
                let mut best = (0usize, f64::NEG_INFINITY);
                for (j, &p) in logp.iter().enumerate() {
                    let v = p + model.log_prob(j, i);
                    if v > best.1 {
                        best = (j, v);
                    }
                }
                next[i] = clamp_floor(best.1 + moore.log_prob(i, obs));
                bp[i] = best.0 as u32;
            }
        }
        OutputModel::Mealy(mealy) => {
            for i in 0..n {
                let mut best = (0usize, f64::NEG_INFINITY);
                for (j, &p) in logp.iter().enumerate() {
                    let v = p + model.log_prob(j, i) + ln_or_floor(mealy.prob(j, i, obs));
                    if v > best.1 {
                        best = (j, v);
                    }
                }
                next[i] = clamp_floor(best.1);
                bp[i] = best.0 as u32;
            }
        }
    }
    if next.iter().any(|x| x.is_nan()) {
        return Err(Error::Numeric("NaN in Viterbi update".into()));
    }
    state.advance(next, bp, (n * n) as u64);
    Ok(())
}

/// Emission-only update for a forced self-transition (`a[i][j] = δ_ij`).
pub fn viterbi_step_hold(state: &mut ViterbiState, obs: usize, output: &OutputModel) -> Result<()> {
    let moore = require_moore(output)?;
    if state.n_states() != moore.n_states() {
        return Err(Error::Dimension {
            expected: moore.n_states(),
            got: state.n_states(),
        });
    }
    let log_b = moore.log_column(obs)?;
    let next: Vec<f64> = state
        .logp
        .iter()
        .zip(log_b)
        .map(|(&p, &lb)| clamp_floor(p + lb))
        .collect();
    let n = next.len();
    let bp = (0..n as u32).collect();
    state.advance(next, bp, n as u64);
    Ok(())
}

/// Most likely state sequence ending in the current best state.
pub fn viterbi_backtrack(state: &ViterbiState) -> Result<Vec<usize>> {
    let bps = state.backpointers.as_ref().ok_or_else(|| {
        Error::Unsupported("backpointers were not retained for this run".into())
    })?;
    let (mut cur, _) = state.best();
    let mut path = vec![0usize; state.step];
    for m in (0..state.step).rev() {
        path[m] = cur;
        if m > 0 {
            cur = bps[m][cur] as usize;
        }
    }
    Ok(path)
}
