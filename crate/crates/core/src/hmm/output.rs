use crate::error::{Error, Result};
use crate::hmm::logspace::ln_or_floor;
use crate::hmm::transition::TransitionModel;

const NORMALIZATION_TOL: f64 = 1e-9;

/// State-conditioned emission `b_i(o)` over symbols `0..n_symbols`.
///
/// Stored symbol-major so that one observation touches a contiguous column.
#[derive(Debug, Clone)]
pub struct MooreOutput {
    n_states: usize,
    n_symbols: usize,
    prob: Vec<f64>,
    log_prob: Vec<f64>,
}

impl MooreOutput {
    /// `rows` holds `n_states` rows of `n_symbols` probabilities each.
    pub fn new(n_states: usize, n_symbols: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n_states * n_symbols {
            return Err(Error::Dimension {
                expected: n_states * n_symbols,
                got: rows.len(),
            });
        }
        let mut prob = vec![0.0; n_states * n_symbols];
        for i in 0..n_states {
            let row = &rows[i * n_symbols..(i + 1) * n_symbols];
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::ModelInconsistency(format!("invalid emission in state {i}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::ModelInconsistency(format!(
                    "emissions of state {i} sum to {sum}"
                )));
            }
            for (o, &p) in row.iter().enumerate() {
                prob[o * n_states + i] = p;
            }
        }
        let log_prob = prob.iter().map(|&p| ln_or_floor(p)).collect();
        Ok(MooreOutput {
            n_states,
            n_symbols,
            prob,
            log_prob,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn prob(&self, i: usize, o: usize) -> f64 {
        self.prob[o * self.n_states + i]
    }

    pub fn log_prob(&self, i: usize, o: usize) -> f64 {
        self.log_prob[o * self.n_states + i]
    }

    /// `ln b_i(o)` for every state `i`.
    pub fn log_column(&self, o: usize) -> Result<&[f64]> {
        self.check_symbol(o)?;
        Ok(&self.log_prob[o * self.n_states..(o + 1) * self.n_states])
    }

    pub fn check_symbol(&self, o: usize) -> Result<()> {
        if o >= self.n_symbols {
            return Err(Error::Domain {
                obs: o,
                size: self.n_symbols,
            });
        }
        Ok(())
    }
}

/// Transition-conditioned emission `b_{j,i}(o)`: `β` inside the band and
/// `v_j(o)·u_i(o)` outside it.
#[derive(Debug, Clone)]
pub struct MealyOutput {
    n_states: usize,
    n_symbols: usize,
    d1: usize,
    d2: usize,
    // [o][j][k] with k = (i - j) + d1 for the in-band transition j -> i.
    beta: Vec<f64>,
    // [o][j]
    v: Vec<f64>,
    // [o][i]
    u: Vec<f64>,
}

impl MealyOutput {
    /// `beta` is laid out `[o][j][k]`, `v` and `u` as `[o][state]`.
    pub fn new(
        n_states: usize,
        n_symbols: usize,
        d1: usize,
        d2: usize,
        beta: Vec<f64>,
        v: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self> {
        let width = d1 + d2 + 1;
        let expected = n_symbols * n_states * width;
        if beta.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: beta.len(),
            });
        }
        for vec in [&v, &u] {
            if vec.len() != n_symbols * n_states {
                return Err(Error::Dimension {
                    expected: n_symbols * n_states,
                    got: vec.len(),
                });
            }
        }
        if beta.iter().chain(&v).chain(&u).any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::ModelInconsistency(
                "Mealy output factors must be finite and nonnegative".into(),
            ));
        }
        Ok(MealyOutput {
            n_states,
            n_symbols,
            d1,
            d2,
            beta,
            v,
            u,
        })
    }

    /// Expresses a Moore output in Mealy form: `β_{j,i} = b_i`, `v ≡ 1`, `u = b`.
    pub fn from_moore(moore: &MooreOutput, d1: usize, d2: usize) -> Self {
        let n = moore.n_states();
        let k = moore.n_symbols();
        let width = d1 + d2 + 1;
        let mut beta = vec![0.0; k * n * width];
        let mut u = vec![0.0; k * n];
        for o in 0..k {
            for j in 0..n {
                u[o * n + j] = moore.prob(j, o);
                for w in 0..width {
                    let target = j + w;
                    if target >= d1 && target - d1 < n {
                        beta[(o * n + j) * width + w] = moore.prob(target - d1, o);
                    }
                }
            }
        }
        MealyOutput {
            n_states: n,
            n_symbols: k,
            d1,
            d2,
            beta,
            v: vec![1.0; k * n],
            u,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    fn width(&self) -> usize {
        self.d1 + self.d2 + 1
    }

    /// In-band factor for `j -> i`; caller guarantees the pair is in band.
    #[inline]
    pub fn beta(&self, j: usize, i: usize, o: usize) -> f64 {
        self.beta[(o * self.n_states + j) * self.width() + (i + self.d1 - j)]
    }

    #[inline]
    pub fn v(&self, j: usize, o: usize) -> f64 {
        self.v[o * self.n_states + j]
    }

    #[inline]
    pub fn u(&self, i: usize, o: usize) -> f64 {
        self.u[o * self.n_states + i]
    }

    /// Full `b_{j,i}(o)` with the band case split.
    pub fn prob(&self, j: usize, i: usize, o: usize) -> f64 {
        if i + self.d1 >= j && i <= j + self.d2 {
            self.beta(j, i, o)
        } else {
            self.v(j, o) * self.u(i, o)
        }
    }

    pub fn check_symbol(&self, o: usize) -> Result<()> {
        if o >= self.n_symbols {
            return Err(Error::Domain {
                obs: o,
                size: self.n_symbols,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum OutputModel {
    Moore(MooreOutput),
    Mealy(MealyOutput),
}

impl OutputModel {
    pub fn n_states(&self) -> usize {
        match self {
            OutputModel::Moore(m) => m.n_states(),
            OutputModel::Mealy(m) => m.n_states(),
        }
    }

    pub fn check_symbol(&self, o: usize) -> Result<()> {
        match self {
            OutputModel::Moore(m) => m.check_symbol(o),
            OutputModel::Mealy(m) => m.check_symbol(o),
        }
    }

    /// `b_{j,i}(o)`; for Moore outputs the source state is ignored.
    pub fn prob(&self, j: usize, i: usize, o: usize) -> f64 {
        match self {
            OutputModel::Moore(m) => m.prob(i, o),
            OutputModel::Mealy(m) => m.prob(j, i, o),
        }
    }

    /// Emission used for the first observation, which has no predecessor:
    /// `b_i` for Moore outputs and `u_i` for Mealy outputs.
    pub fn initial_prob(&self, i: usize, o: usize) -> f64 {
        match self {
            OutputModel::Moore(m) => m.prob(i, o),
            OutputModel::Mealy(m) => m.u(i, o),
        }
    }

    pub(crate) fn check_against(&self, model: &TransitionModel) -> Result<()> {
        if self.n_states() != model.n_states() {
            return Err(Error::ModelInconsistency(format!(
                "output model has {} states, transition model {}",
                self.n_states(),
                model.n_states()
            )));
        }
        if let OutputModel::Mealy(m) = self {
            if m.d1() != model.d1() || m.d2() != model.d2() {
                return Err(Error::ModelInconsistency(
                    "Mealy band does not match the transition band".into(),
                ));
            }
        }
        Ok(())
    }
}

impl From<MooreOutput> for OutputModel {
    fn from(m: MooreOutput) -> Self {
        OutputModel::Moore(m)
    }
}

impl From<MealyOutput> for OutputModel {
    fn from(m: MealyOutput) -> Self {
        OutputModel::Mealy(m)
    }
}
