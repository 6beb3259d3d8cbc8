use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hmm::{init_state, viterbi_step_fast, viterbi_step_naive, OutputModel, ViterbiState};
use crate::perf_model::{build_output_model, uniform_model_of, BandParams, OutputParams};
use crate::simgen::{generate_score, ScoreKind};

const WARMUP_EVENTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Fast,
    Naive,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Fast => "fast",
            Algorithm::Naive => "naive",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Algorithm::Fast),
            "naive" => Ok(Algorithm::Naive),
            other => Err(Error::ParameterInconsistency(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub algorithm: Algorithm,
    /// Median over repetitions of the mean per-event update time.
    pub mean_us: f64,
    /// Standard deviation of the per-repetition means.
    pub sd_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub d: usize,
    pub num_events: usize,
    pub repetitions: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            d: 10,
            num_events: 100,
            repetitions: 5,
            algorithm: Algorithm::Fast,
            seed: 0,
        }
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Per-event Viterbi update time on a random score of each length in `ns`,
/// fed a random pitch sequence. Runs sequentially.
pub fn bench_update(ns: &[usize], config: &BenchConfig) -> Result<Vec<BenchRow>> {
    if config.num_events == 0 || config.repetitions == 0 {
        return Err(Error::ParameterInconsistency("need at least one event and repetition".into()));
    }
    let band = BandParams::table3(config.d)?;
    let params = OutputParams::table5();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let score = generate_score(n, 88, ScoreKind::Iid, config.seed)?;
        let model = uniform_model_of(n, &band, band.residual_mass())?;
        let output: OutputModel = build_output_model(&score, &params)?.into();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(n as u64));
        let obs: Vec<usize> = (0..config.num_events + WARMUP_EVENTS)
            .map(|_| rng.gen_range(0..params.n_symbols()))
            .collect();
        let step = |state: &mut ViterbiState, o: usize| match config.algorithm {
            Algorithm::Fast => viterbi_step_fast(state, o, &model, &output),
            Algorithm::Naive => viterbi_step_naive(state, o, &model, &output),
        };
        let mut means = Vec::with_capacity(config.repetitions);
        for _ in 0..config.repetitions {
            let mut state = init_state(&model, &output, obs[0], false)?;
            for &o in &obs[1..WARMUP_EVENTS] {
                step(&mut state, o)?;
            }
            let start = Instant::now();
            for &o in &obs[WARMUP_EVENTS..] {
                step(&mut state, o)?;
            }
            let elapsed = start.elapsed().as_secs_f64() * 1e6;
            std::hint::black_box(state.best());
            means.push(elapsed / config.num_events as f64);
        }
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        let sd = if means.len() > 1 {
            (means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (means.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        rows.push(BenchRow {
            n,
            d: config.d,
            algorithm: config.algorithm,
            mean_us: median(&mut means),
            sd_us: sd,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn produces_one_row_per_size() {
        let config = BenchConfig {
            num_events: 5,
            repetitions: 2,
            ..Default::default()
        };
        let rows = bench_update(&[20, 50], &config).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.mean_us > 0.0 && r.d == 10));
        assert_eq!("naive".parse::<Algorithm>().unwrap(), Algorithm::Naive);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
