#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scorefollow::hmm::{MealyOutput, MooreOutput, OutputModel, Regime, TransitionModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn in_range(i: usize, k: usize, d1: usize, n: usize) -> bool {
    i + k >= d1 && i + k - d1 < n
}

/// Random band-plus-rank-1 model with `α ≥ 0`.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize, d1: usize, d2: usize) -> TransitionModel {
    let width = d1 + d2 + 1;
    let skip: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..0.3)).collect();
    let resume = random_distribution(rng, n);
    let mut alpha = vec![0.0; n * width];
    for i in 0..n {
        let ks: Vec<usize> = (0..width).filter(|&k| in_range(i, k, d1, n)).collect();
        let w: Vec<f64> = ks.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        for (&k, x) in ks.iter().zip(w) {
            alpha[i * width + k] = x / total * (1.0 - skip[i]);
        }
    }
    TransitionModel::new(d1, d2, alpha, skip, resume, Regime::Nonnegative).unwrap()
}

/// Random model whose in-band residual `α = a − S·r` may be negative.
pub fn random_signed_model(rng: &mut ChaCha8Rng, n: usize, d1: usize, d2: usize) -> TransitionModel {
    let width = d1 + d2 + 1;
    let skip: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.6)).collect();
    let resume = random_distribution(rng, n);
    let mut alpha = vec![0.0; n * width];
    for i in 0..n {
        let ks: Vec<usize> = (0..width).filter(|&k| in_range(i, k, d1, n)).collect();
        let band_r: f64 = ks.iter().map(|&k| resume[i + k - d1]).sum();
        let off_band = skip[i] * (1.0 - band_r);
        let w: Vec<f64> = ks.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        for (&k, x) in ks.iter().zip(w) {
            let a = x / total * (1.0 - off_band);
            alpha[i * width + k] = a - skip[i] * resume[i + k - d1];
        }
    }
    TransitionModel::new(d1, d2, alpha, skip, resume, Regime::Signed).unwrap()
}

pub fn random_moore(rng: &mut ChaCha8Rng, n: usize, k: usize) -> MooreOutput {
    let rows: Vec<f64> = (0..n).flat_map(|_| random_distribution(rng, k)).collect();
    MooreOutput::new(n, k, &rows).unwrap()
}

pub fn random_mealy(rng: &mut ChaCha8Rng, n: usize, k: usize, d1: usize, d2: usize) -> MealyOutput {
    let width = d1 + d2 + 1;
    let mut beta = vec![0.0; k * n * width];
    for j in 0..n {
        for w in 0..width {
            let dist = random_distribution(rng, k);
            for o in 0..k {
                beta[(o * n + j) * width + w] = dist[o];
            }
        }
    }
    let v: Vec<f64> = (0..k * n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut u = vec![0.0; k * n];
    for i in 0..n {
        let dist = random_distribution(rng, k);
        for o in 0..k {
            u[o * n + i] = dist[o];
        }
    }
    MealyOutput::new(n, k, d1, d2, beta, v, u).unwrap()
}

pub fn random_obs(rng: &mut ChaCha8Rng, k: usize, m: usize) -> Vec<usize> {
    (0..m).map(|_| rng.gen_range(0..k)).collect()
}

/// Case parameters drawn for the equivalence corpora.
pub struct Case {
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    pub k: usize,
    pub m: usize,
}

pub fn random_case(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize, max_m: usize) -> Case {
    let n = rng.gen_range(1..=max_n);
    let d = rng.gen_range(1..=max_d);
    let d1 = rng.gen_range(0..d);
    let d2 = d - 1 - d1;
    Case {
        n,
        d1,
        d2,
        k: rng.gen_range(2..=12),
        m: rng.gen_range(1..=max_m),
    }
}

/// Log joint probability of a state path, straight from the model definition.
pub fn path_log_prob(
    path: &[usize],
    obs: &[usize],
    model: &TransitionModel,
    output: &OutputModel,
) -> f64 {
    let mut lp = model.resume()[path[0]].ln() + output.initial_prob(path[0], obs[0]).ln();
    for m in 1..path.len() {
        lp += model.prob(path[m - 1], path[m]).ln() + output.prob(path[m - 1], path[m], obs[m]).ln();
    }
    lp
}

/// Every length-`m` path over `n` states in lexicographic order.
pub fn all_paths(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(m as u32);
    (0..total).map(move |mut code| {
        let mut p = vec![0; m];
        for slot in p.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        p
    })
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Relative error between two log-domain values, measured in linear domain.
pub fn log_rel_err(a: f64, b: f64) -> f64 {
    (a - b).exp_m1().abs()
}
