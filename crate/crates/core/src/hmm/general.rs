//! Recursions for outer-product models with Mealy outputs and possibly
//! negative band residuals.
//!
//! Outside the band, `a[j][i]·b_{j,i}(o) = (S_j·v_j(o)) · (r_i·u_i(o))`
//! factorizes, so the off-band part of each update reduces to a single
//! quantity per source state. Inside the band the full `a[j][i]` is used.

use crate::error::{Error, Result};
use crate::hmm::forward_backward::Lattice;
use crate::hmm::logspace::{clamp_floor, ln_or_floor, LOG_FLOOR};
use crate::hmm::output::{MealyOutput, OutputModel};
use crate::hmm::transition::TransitionModel;
use crate::hmm::viterbi::{viterbi_step_naive, ViterbiState};

/// Ratio `(|positive| + |negative|) / result` beyond which a signed sum is
/// considered to have lost too many digits.
const CANCELLATION_LIMIT: f64 = 1e7;

fn require_mealy<'a>(model: &TransitionModel, output: &'a OutputModel) -> Result<&'a MealyOutput> {
    output.check_against(model)?;
    match output {
        OutputModel::Mealy(m) => Ok(m),
        OutputModel::Moore(_) => Err(Error::Unsupported(
            "general recursion expects a Mealy output; embed with MealyOutput::from_moore".into(),
        )),
    }
}

/// `p'(i) = max{ max_{j∈nbh(i)} p(j)·a[j][i]·β_{j,i}(o),
///              r_i·u_i(o) · max_{j∉nbh(i)} p(j)·S_j·v_j(o) }`
///
/// The off-band maximum is read from the `D + 1` largest values of
/// `p(j)·S_j·v_j(o)`: at most `D` of them can fall in `nbh(i)`, so the first
/// one outside is the answer. Falls back to the naive update when `D + 1 > N`.
pub fn viterbi_step_general(
    state: &mut ViterbiState,
    obs: usize,
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<()> {
    let mealy = require_mealy(model, output)?;
    mealy.check_symbol(obs)?;
    let n = model.n_states();
    if state.n_states() != n {
        return Err(Error::Dimension {
            expected: n,
            got: state.n_states(),
        });
    }
    let width = model.width();
    if width + 1 > n {
        return viterbi_step_naive(state, obs, model, output);
    }
    let logp = state.log_probs();
    let log_s = model.log_skip();

    let weights: Vec<f64> = (0..n)
        .map(|j| logp[j] + log_s[j] + ln_or_floor(mealy.v(j, obs)))
        .collect();
    let top = top_k(&weights, width + 1);

    let log_r = model.log_resume();
    let mut next = vec![0.0; n];
    let mut bp = vec![0u32; n];
    let mut work = 2 * n as u64;
    for i in 0..n {
        let preds = model.predecessors(i);
        let (lo, hi) = (*preds.start(), *preds.end());
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for &j in &top {
            work += 1;
            if j < lo || j > hi {
                best = (j, log_r[i] + ln_or_floor(mealy.u(i, obs)) + weights[j]);
                break;
            }
        }
        for j in lo..=hi {
            let v = logp[j] + model.log_prob(j, i) + ln_or_floor(mealy.beta(j, i, obs));
            if v > best.1 || (v == best.1 && j < best.0) {
                best = (j, v);
            }
        }
        work += (hi - lo + 1) as u64;
        next[i] = clamp_floor(best.1);
        bp[i] = best.0 as u32;
    }
    if next.iter().any(|x| x.is_nan()) {
        return Err(Error::Numeric("NaN in Viterbi update".into()));
    }
    state.advance(next, bp, work);
    Ok(())
}

/// Indices of the `k` largest weights, ordered by (weight desc, index asc).
fn top_k(weights: &[f64], k: usize) -> Vec<usize> {
    let order = |a: &usize, b: &usize| {
        weights[*b]
            .partial_cmp(&weights[*a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(b))
    };
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, order);
        idx.truncate(k);
    }
    idx.sort_unstable_by(order);
    idx
}

/// Signed linear-domain accumulator that tracks how much cancellation occurred.
#[derive(Default)]
struct SignedSum {
    value: f64,
    magnitude: f64,
}

impl SignedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        self.value += x;
        self.magnitude += x.abs();
    }

    /// Log of the sum relative to `scale`, or an instability error.
    fn finish(&self, scale: f64, what: &str, i: usize) -> Result<f64> {
        if self.magnitude == 0.0 {
            return Ok(LOG_FLOOR);
        }
        if self.value <= 0.0 || self.magnitude / self.value > CANCELLATION_LIMIT {
            return Err(Error::NumericInstability(format!(
                "{what} for state {i}: signed sum {:.3e} from terms of total magnitude {:.3e}",
                self.value, self.magnitude
            )));
        }
        Ok(clamp_floor(self.value.ln() + scale))
    }
}

fn row_scale(row: &[f64]) -> f64 {
    row.iter().copied().fold(LOG_FLOOR, f64::max)
}

/// `F_m(i) = Σ_{j∈nbh(i)} F(j)·(a[j][i]·β_{j,i} − S_j·r_i·v_j·u_i) + r_i·u_i·Σ_j F(j)·S_j·v_j`
///
/// The band correction is signed, so the sum is formed in linear domain after
/// scaling by the largest previous entry.
pub fn forward_step_general(
    lattice: &mut Lattice,
    obs: usize,
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<()> {
    let mealy = require_mealy(model, output)?;
    mealy.check_symbol(obs)?;
    let n = model.n_states();
    if lattice.n_states() != n {
        return Err(Error::Dimension {
            expected: n,
            got: lattice.n_states(),
        });
    }
    let prev = lattice.last_forward();
    let scale = row_scale(prev);
    let f: Vec<f64> = prev.iter().map(|&x| (x - scale).exp()).collect();
    let skip = model.skip();
    let resume = model.resume();

    let global: f64 = (0..n).map(|j| f[j] * skip[j] * mealy.v(j, obs)).sum();

    let mut row = vec![0.0; n];
    let mut work = n as u64;
    for i in 0..n {
        let ru = resume[i] * mealy.u(i, obs);
        let mut sum = SignedSum::default();
        sum.add(ru * global);
        for j in model.predecessors(i) {
            let a = model.prob(j, i);
            sum.add(f[j] * a * mealy.beta(j, i, obs));
            sum.add(-f[j] * skip[j] * mealy.v(j, obs) * ru);
        }
        work += model.predecessors(i).count() as u64 + 1;
        row[i] = sum.finish(scale, "forward", i)?;
    }
    lattice.push_forward(row, work);
    Ok(())
}

/// `B_{m-1}(i) = Σ_{j∈band(i)} (a[i][j]·β_{i,j} − S_i·r_j·v_i·u_j)·B(j) + S_i·v_i·Σ_j r_j·u_j·B(j)`
pub fn backward_step_general(
    lattice: &mut Lattice,
    obs: usize,
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<()> {
    let mealy = require_mealy(model, output)?;
    mealy.check_symbol(obs)?;
    let n = model.n_states();
    let next = lattice.first_backward()?;
    let scale = row_scale(next);
    let b: Vec<f64> = next.iter().map(|&x| (x - scale).exp()).collect();
    let skip = model.skip();
    let resume = model.resume();

    let global: f64 = (0..n).map(|j| resume[j] * mealy.u(j, obs) * b[j]).sum();

    let mut row = vec![0.0; n];
    let mut work = n as u64;
    for i in 0..n {
        let sv = skip[i] * mealy.v(i, obs);
        let mut sum = SignedSum::default();
        sum.add(sv * global);
        for j in model.successors(i) {
            sum.add(model.prob(i, j) * mealy.beta(i, j, obs) * b[j]);
            sum.add(-sv * resume[j] * mealy.u(j, obs) * b[j]);
        }
        work += model.successors(i).count() as u64 + 1;
        row[i] = sum.finish(scale, "backward", i)?;
    }
    lattice.push_backward(row, work);
    Ok(())
}

/// Full forward and backward passes with the general recursions and prior `r`.
pub fn forward_backward_general(
    observations: &[usize],
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<Lattice> {
    let (&first, rest) = observations
        .split_first()
        .ok_or_else(|| Error::DegenerateInput("no observations".into()))?;
    require_mealy(model, output)?;
    let mut lattice = Lattice::start(model.resume(), output, first)?;
    for &o in rest {
        forward_step_general(&mut lattice, o, model, output)?;
    }
    lattice.start_backward();
    for &o in rest.iter().rev() {
        backward_step_general(&mut lattice, o, model, output)?;
    }
    Ok(lattice)
}
