use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::hmm::logspace::{ln_or_floor, log_sum_exp, LogSumAcc, LOG_FLOOR};
use crate::hmm::output::{MooreOutput, OutputModel};
use crate::hmm::transition::{Regime, TransitionModel};

/// Log-domain forward variables `F_m(i)` and backward variables `B_m(i)`.
///
/// Forward rows are appended as observations arrive; backward rows are
/// prepended, starting from the terminal row `B_M ≡ 1`.
#[derive(Debug, Clone, Default)]
pub struct Lattice {
    forward: Vec<Vec<f64>>,
    backward: VecDeque<Vec<f64>>,
    work: u64,
}

impl Lattice {
    /// Starts the forward pass: `F_1(i) = π_i · b_i(o_1)`.
    pub fn start(initial: &[f64], output: &OutputModel, first_obs: usize) -> Result<Self> {
        if initial.len() != output.n_states() {
            return Err(Error::Dimension {
                expected: output.n_states(),
                got: initial.len(),
            });
        }
        output.check_symbol(first_obs)?;
        let row = initial
            .iter()
            .enumerate()
            .map(|(i, &p)| ln_or_floor(p) + ln_or_floor(output.initial_prob(i, first_obs)))
            .collect();
        Ok(Lattice {
            forward: vec![row],
            backward: VecDeque::new(),
            work: initial.len() as u64,
        })
    }

    pub fn n_states(&self) -> usize {
        self.forward.first().map_or(0, Vec::len)
    }

    /// Number of forward rows computed so far.
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// `ln F_m`, with `m` zero-based.
    pub fn forward(&self, m: usize) -> &[f64] {
        &self.forward[m]
    }

    /// `ln B_m`, with `m` zero-based; only valid once the backward pass has reached `m`.
    pub fn backward(&self, m: usize) -> &[f64] {
        let offset = self.forward.len() - self.backward.len();
        &self.backward[m - offset]
    }

    pub fn backward_len(&self) -> usize {
        self.backward.len()
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    /// `ln P(o_1..o_M)` from the last forward row.
    pub fn log_likelihood(&self) -> f64 {
        self.forward.last().map_or(LOG_FLOOR, |row| log_sum_exp(row))
    }

    /// `ln Σ_i F_m(i) B_m(i)`; equals the log-likelihood for every `m`.
    pub fn log_mass(&self, m: usize) -> f64 {
        let f = self.forward(m);
        let b = self.backward(m);
        let mut acc = LogSumAcc::new();
        for (x, y) in f.iter().zip(b) {
            acc.add(x + y);
        }
        acc.value()
    }

    /// Posterior `P(I_m = i | o_1..o_M)` in linear domain.
    pub fn posterior(&self, m: usize) -> Vec<f64> {
        let ll = self.log_likelihood();
        self.forward(m)
            .iter()
            .zip(self.backward(m))
            .map(|(f, b)| (f + b - ll).exp())
            .collect()
    }

    /// Sets `B_M ≡ 1` once the forward pass is complete.
    pub fn start_backward(&mut self) {
        self.backward.clear();
        self.backward.push_back(vec![0.0; self.n_states()]);
    }

    pub(crate) fn push_forward(&mut self, row: Vec<f64>, work: u64) {
        self.forward.push(row);
        self.work += work;
    }

    pub(crate) fn push_backward(&mut self, row: Vec<f64>, work: u64) {
        self.backward.push_front(row);
        self.work += work;
    }

    pub(crate) fn last_forward(&self) -> &[f64] {
        self.forward.last().expect("lattice has been started")
    }

    pub(crate) fn first_backward(&self) -> Result<&[f64]> {
        self.backward
            .front()
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Unsupported("backward pass has not been started".into()))
    }
}

fn moore_parts<'a>(
    lattice: &Lattice,
    model: &TransitionModel,
    output: &'a OutputModel,
) -> Result<&'a MooreOutput> {
    let OutputModel::Moore(moore) = output else {
        return Err(Error::Unsupported(
            "fast recursion needs a Moore output; use the general step for Mealy outputs".into(),
        ));
    };
    output.check_against(model)?;
    if model.regime() != Regime::Nonnegative {
        return Err(Error::Unsupported(
            "fast recursion needs a nonnegative band; use the general step".into(),
        ));
    }
    if lattice.n_states() != model.n_states() {
        return Err(Error::Dimension {
            expected: model.n_states(),
            got: lattice.n_states(),
        });
    }
    Ok(moore)
}

/// `F_m(i) = b_i(o)·[ Σ_{j∈nbh(i)} F_{m-1}(j)·α[j][i] + r_i · Σ_j F_{m-1}(j)·S_j ]`
pub fn forward_step_fast(
    lattice: &mut Lattice,
    obs: usize,
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<()> {
    let moore = moore_parts(lattice, model, output)?;
    let log_b = moore.log_column(obs)?;
    let prev = lattice.last_forward();
    let n = model.n_states();

    let mut skip_acc = LogSumAcc::new();
    for (&f, &ls) in prev.iter().zip(model.log_skip()) {
        skip_acc.add(f + ls);
    }
    let skip_mass = skip_acc.value();

    let log_r = model.log_resume();
    let mut row = vec![0.0; n];
    let mut work = n as u64;
    for i in 0..n {
        let mut acc = LogSumAcc::new();
        acc.add(log_r[i] + skip_mass);
        for j in model.predecessors(i) {
            acc.add(prev[j] + model.log_alpha_row(j)[model.offset(j, i)]);
        }
        work += model.predecessors(i).count() as u64 + 1;
        row[i] = finite_or_err(acc.value() + log_b[i])?.max(LOG_FLOOR);
    }
    lattice.push_forward(row, work);
    Ok(())
}

/// `B_{m-1}(i) = Σ_{j∈band(i)} α[i][j]·b_j(o)·B_m(j) + S_i · Σ_j r_j·b_j(o)·B_m(j)`
pub fn backward_step_fast(
    lattice: &mut Lattice,
    obs: usize,
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<()> {
    let moore = moore_parts(lattice, model, output)?;
    let log_b = moore.log_column(obs)?;
    let next = lattice.first_backward()?;
    let n = model.n_states();

    // Σ_j r_j b_j(o) B_m(j), shared by every row.
    let mut resume_acc = LogSumAcc::new();
    for j in 0..n {
        resume_acc.add(model.log_resume()[j] + log_b[j] + next[j]);
    }
    let resume_mass = resume_acc.value();

    let log_s = model.log_skip();
    let mut row = vec![0.0; n];
    let mut work = n as u64;
    for i in 0..n {
        let mut acc = LogSumAcc::new();
        acc.add(log_s[i] + resume_mass);
        let log_alpha = model.log_alpha_row(i);
        for j in model.successors(i) {
            acc.add(log_alpha[model.offset(i, j)] + log_b[j] + next[j]);
        }
        work += model.successors(i).count() as u64 + 1;
        row[i] = finite_or_err(acc.value())?;
    }
    lattice.push_backward(row, work);
    Ok(())
}

/// Runs the full fast forward and backward passes with prior `r`.
pub fn forward_backward_fast(
    observations: &[usize],
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<Lattice> {
    let (&first, rest) = observations
        .split_first()
        .ok_or_else(|| Error::DegenerateInput("no observations".into()))?;
    output.check_against(model)?;
    let mut lattice = Lattice::start(model.resume(), output, first)?;
    for &o in rest {
        forward_step_fast(&mut lattice, o, model, output)?;
    }
    lattice.start_backward();
    for &o in rest.iter().rev() {
        backward_step_fast(&mut lattice, o, model, output)?;
    }
    Ok(lattice)
}

/// Quadratic-time forward and backward passes over the materialized
/// transition and output matrices. Any regime, either output kind.
pub fn forward_backward_naive(
    observations: &[usize],
    model: &TransitionModel,
    output: &OutputModel,
) -> Result<Lattice> {
    let (&first, rest) = observations
        .split_first()
        .ok_or_else(|| Error::DegenerateInput("no observations".into()))?;
    output.check_against(model)?;
    let n = model.n_states();
    let mut lattice = Lattice::start(model.resume(), output, first)?;
    let log_a: Vec<f64> = (0..n * n).map(|idx| ln_or_floor(model.prob(idx / n, idx % n))).collect();

    for &o in rest {
        output.check_symbol(o)?;
        let prev = lattice.last_forward().to_vec();
        let row: Vec<f64> = (0..n)
            .map(|i| {
                let mut acc = LogSumAcc::new();
                for (j, &f) in prev.iter().enumerate() {
                    acc.add(f + log_a[j * n + i] + ln_or_floor(output.prob(j, i, o)));
                }
                acc.value()
            })
            .collect();
        lattice.push_forward(row, (n * n) as u64);
    }

    lattice.start_backward();
    for &o in rest.iter().rev() {
        let next = lattice.first_backward()?.to_vec();
        let row: Vec<f64> = (0..n)
            .map(|i| {
                let mut acc = LogSumAcc::new();
                for (j, &b) in next.iter().enumerate() {
                    acc.add(log_a[i * n + j] + ln_or_floor(output.prob(i, j, o)) + b);
                }
                acc.value()
            })
            .collect();
        lattice.push_backward(row, (n * n) as u64);
    }
    Ok(lattice)
}

fn finite_or_err(x: f64) -> Result<f64> {
    if x.is_nan() {
        Err(Error::Numeric("NaN in forward/backward recursion".into()))
    } else {
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> (TransitionModel, OutputModel) {
        let model = TransitionModel::banded(1, 1, vec![0.0, 0.7, 0.3, 0.4, 0.6, 0.0]).unwrap();
        let out = MooreOutput::new(2, 2, &[0.9, 0.1, 0.2, 0.8]).unwrap().into();
        (model, out)
    }

    #[test]
    fn single_observation_is_prior_times_emission() {
        let (model, out) = two_state();
        let lat = forward_backward_naive(&[1], &model, &out).unwrap();
        // r is uniform for a band-only model.
        assert!((lat.forward(0)[0] - (0.5f64 * 0.1).ln()).abs() < 1e-14);
        assert!((lat.forward(0)[1] - (0.5f64 * 0.8).ln()).abs() < 1e-14);
        assert_eq!(lat.backward(0), &[0.0, 0.0]);
    }

    #[test]
    fn two_state_closed_form() {
        let (model, out) = two_state();
        let obs = [0, 1];
        // F_1 = (0.45, 0.1); F_2(i) = Σ_j F_1(j) a[j][i] b_i(1).
        let f1 = [0.45, 0.1];
        let a = [[0.7, 0.3], [0.4, 0.6]];
        let b1 = [0.1, 0.8];
        let f2: Vec<f64> = (0..2).map(|i| (f1[0] * a[0][i] + f1[1] * a[1][i]) * b1[i]).collect();
        let b0: Vec<f64> = (0..2).map(|i| a[i][0] * b1[0] + a[i][1] * b1[1]).collect();
        for lat in [
            forward_backward_naive(&obs, &model, &out).unwrap(),
            forward_backward_fast(&obs, &model, &out).unwrap(),
        ] {
            for i in 0..2 {
                assert!((lat.forward(1)[i].exp() - f2[i]).abs() < 1e-14);
                assert!((lat.backward(0)[i].exp() - b0[i]).abs() < 1e-14);
            }
            let like = f2[0] + f2[1];
            assert!((lat.log_likelihood() - like.ln()).abs() < 1e-13);
            for m in 0..2 {
                assert!((lat.log_mass(m) - like.ln()).abs() < 1e-13);
                let post: f64 = lat.posterior(m).iter().sum();
                assert!((post - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_observations_are_rejected() {
        let (model, out) = two_state();
        assert!(matches!(
            forward_backward_fast(&[], &model, &out),
            Err(Error::DegenerateInput(_))
        ));
    }
}
