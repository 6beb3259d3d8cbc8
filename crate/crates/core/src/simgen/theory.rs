use crate::error::{Error, Result};

const SERIES_TOL: f64 = 1e-12;

/// Positions ordered by decreasing probability, ties by increasing index.
fn rank_order(r: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..r.len()).collect();
    idx.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
    idx
}

/// `Ñ_i(r) = #{j : r_j > r_i, or r_j = r_i and j <= i}`.
pub fn n_tilde(r: &[f64], i: usize) -> usize {
    r.iter()
        .enumerate()
        .filter(|&(j, &rj)| rj > r[i] || (rj == r[i] && j <= i))
        .count()
}

/// `Ñ_i(r)` for every position, in `O(N log N)`.
pub fn n_tilde_all(r: &[f64]) -> Vec<usize> {
    let mut out = vec![0; r.len()];
    for (rank, i) in rank_order(r).into_iter().enumerate() {
        out[i] = rank + 1;
    }
    out
}

/// `H'(r) = Σ_i r_i ln Ñ_i(r)`: the log of the effective number of
/// candidate positions.
pub fn h_prime(r: &[f64]) -> f64 {
    rank_order(r)
        .into_iter()
        .enumerate()
        .map(|(rank, i)| r[i] * ((rank + 1) as f64).ln())
        .sum()
}

/// `H'` of the uniform distribution over `n` positions, `ln(n!)/n`.
pub fn h_prime_uniform(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum::<f64>() / n as f64
}

/// Predicted mean following time `L_FT = L1 + L_rej`, in chords.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtPrediction {
    pub l1: f64,
    pub l_rej: f64,
    pub l_ft: f64,
    pub h_eff: f64,
    pub h_prime: f64,
}

fn rejection_time(n_p: Option<f64>) -> Result<f64> {
    match n_p {
        None => Ok(1.0),
        Some(np) if np > 1.0 => Ok(1.0 / (1.0 - 1.0 / np)),
        Some(np) => Err(Error::ParameterInconsistency(format!(
            "alphabet size {np} must exceed 1"
        ))),
    }
}

fn prediction(h_prime: f64, h_eff: f64, n_p: Option<f64>) -> Result<FtPrediction> {
    if !(h_eff > 0.0) {
        return Err(Error::ParameterInconsistency(format!("h_eff must be positive, got {h_eff}")));
    }
    let l1 = h_prime / h_eff;
    let l_rej = rejection_time(n_p)?;
    Ok(FtPrediction {
        l1,
        l_rej,
        l_ft: l1 + l_rej,
        h_eff,
        h_prime,
    })
}

/// `L_FT ≈ H'(r)/h_eff + L_rej`. `L_rej` is 1, or `(1 - 1/N_p)^{-1}` when
/// the alphabet size is given.
pub fn predict_following_time(r: &[f64], h_eff: f64, n_p: Option<f64>) -> Result<FtPrediction> {
    prediction(h_prime(r), h_eff, n_p)
}

/// Following time when the resumption distribution depends on the stop
/// position: `Σ_i w_i H'(g̃_i)/h_eff + L_rej`, with `g̃_i` row `i` of `g`
/// normalized.
pub fn predict_following_time_general(
    g: &[Vec<f64>],
    w: &[f64],
    h_eff: f64,
    n_p: Option<f64>,
) -> Result<FtPrediction> {
    if g.len() != w.len() {
        return Err(Error::Dimension {
            expected: g.len(),
            got: w.len(),
        });
    }
    let mut hp = 0.0;
    for (i, (row, &wi)) in g.iter().zip(w).enumerate() {
        if wi == 0.0 {
            continue;
        }
        let total: f64 = row.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateDistribution(format!(
                "row {i} has weight {wi} but no resumption mass"
            )));
        }
        let normalized: Vec<f64> = row.iter().map(|x| x / total).collect();
        hp += wi * h_prime(&normalized);
    }
    prediction(hp, h_eff, n_p)
}

/// Expected time until every wrong candidate among `n` i.i.d. positions over
/// an alphabet of `n_p` symbols has been ruled out:
/// `1 + Σ_{k>=1} [1 - (1 - n_p^{-k})^n]`.
pub fn exact_iid_following_time(n: usize, n_p: usize) -> Result<f64> {
    if n == 0 || n_p < 2 {
        return Err(Error::ParameterInconsistency(format!(
            "need n >= 1 and n_p >= 2, got n={n}, n_p={n_p}"
        )));
    }
    let n = n as f64;
    let inv = 1.0 / n_p as f64;
    let mut x = 1.0;
    let mut total = 1.0;
    loop {
        x *= inv;
        // The direct form is exact for n = 1; the log form keeps precision
        // once `x` is tiny.
        let term = if x > 1e-8 {
            1.0 - (1.0 - x).powf(n)
        } else {
            -(n * (-x).ln_1p()).exp_m1()
        };
        if term < SERIES_TOL && total + term == total {
            break;
        }
        total += term;
    }
    Ok(total)
}
