use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::error::{Error, Result};
use crate::perf_model::{Score, PIANO_RANGE};

/// How pitches of a synthetic score are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreKind {
    /// Independent, uniform over the alphabet.
    Iid,
    /// Each pitch depends on the previous `order` pitches. Rows of the
    /// transition table are Dirichlet(`concentration`) draws seeded by
    /// `transition_seed`; small concentrations give nearly deterministic rows.
    Markov {
        order: usize,
        concentration: f64,
        transition_seed: u64,
    },
}

/// `n_p` consecutive piano keys centred in the keyboard.
pub fn alphabet(n_p: usize) -> Result<Vec<u8>> {
    let size = PIANO_RANGE.len();
    if n_p == 0 || n_p > size {
        return Err(Error::ParameterInconsistency(format!(
            "alphabet size {n_p} outside 1..={size}"
        )));
    }
    let lo = PIANO_RANGE.start() + ((size - n_p) / 2) as u8;
    Ok((0..n_p as u8).map(|k| lo + k).collect())
}

fn dirichlet_row(rng: &mut ChaCha8Rng, k: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut w: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 && total.is_finite() {
        w.iter_mut().for_each(|x| *x /= total);
    } else {
        // Every draw underflowed; the limit is a point mass.
        w.iter_mut().for_each(|x| *x = 0.0);
        w[rng.gen_range(0..k)] = 1.0;
    }
    w
}

/// Random score of `n` single-note chords over an alphabet of `n_p` pitches.
pub fn generate_score(n: usize, n_p: usize, kind: ScoreKind, seed: u64) -> Result<Score> {
    if n == 0 {
        return Err(Error::ParameterInconsistency("score length must be positive".into()));
    }
    let letters = alphabet(n_p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols: Vec<usize> = match kind {
        ScoreKind::Iid => (0..n).map(|_| rng.gen_range(0..n_p)).collect(),
        ScoreKind::Markov {
            order,
            concentration,
            transition_seed,
        } => {
            if !(concentration > 0.0) {
                return Err(Error::ParameterInconsistency("concentration must be positive".into()));
            }
            let contexts = n_p
                .checked_pow(order as u32)
                .filter(|&c| c <= 1 << 20)
                .ok_or_else(|| Error::ParameterInconsistency(format!("order {order} is too large")))?;
            let mut table_rng = ChaCha8Rng::seed_from_u64(transition_seed);
            let rows: Vec<WeightedIndex<f64>> = (0..contexts)
                .map(|_| WeightedIndex::new(dirichlet_row(&mut table_rng, n_p, concentration)).unwrap())
                .collect();
            let mut out: Vec<usize> = Vec::with_capacity(n);
            for m in 0..n {
                let sym = if m < order {
                    rng.gen_range(0..n_p)
                } else {
                    let ctx = out[m - order..].iter().fold(0, |c, &s| c * n_p + s);
                    rows[ctx].sample(&mut rng)
                };
                out.push(sym);
            }
            out
        }
    };
    let pitches: Vec<u8> = symbols.into_iter().map(|s| letters[s]).collect();
    Score::monophonic(format!("synthetic-{n}-{n_p}-{seed}"), &pitches)
}
