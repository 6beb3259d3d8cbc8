mod common;

use common::*;
use scorefollow::hmm::*;

fn run_viterbi_pair(
    model: &TransitionModel,
    output: &OutputModel,
    obs: &[usize],
    fast: fn(&mut ViterbiState, usize, &TransitionModel, &OutputModel) -> scorefollow::Result<()>,
) -> (ViterbiState, ViterbiState, f64) {
    let mut a = init_state(model, output, obs[0], true).unwrap();
    let mut b = a.clone();
    let mut worst = 0.0f64;
    for &o in &obs[1..] {
        fast(&mut a, o, model, output).unwrap();
        viterbi_step_naive(&mut b, o, model, output).unwrap();
        for (x, y) in a.log_probs().iter().zip(b.log_probs()) {
            worst = worst.max((x - y).abs());
        }
        assert_eq!(a.backpointers().unwrap().last(), b.backpointers().unwrap().last());
    }
    (a, b, worst)
}

#[test]
fn fast_viterbi_matches_naive_on_seeded_models() {
    for seed in 0..40 {
        let mut rng = rng(seed);
        let c = random_case(&mut rng, 120, 12, 60);
        let model = random_model(&mut rng, c.n, c.d1, c.d2);
        let out: OutputModel = random_moore(&mut rng, c.n, c.k).into();
        let obs = random_obs(&mut rng, c.k, c.m);
        let (a, b, worst) = run_viterbi_pair(&model, &out, &obs, viterbi_step_fast);
        assert!(worst <= 1e-9, "seed {seed}: max deviation {worst}");
        assert_eq!(viterbi_backtrack(&a).unwrap(), viterbi_backtrack(&b).unwrap());
    }
}

#[test]
fn fast_viterbi_large_case_matches_naive() {
    let mut rng = rng(7);
    let model = random_model(&mut rng, 200, 7, 2);
    let out: OutputModel = random_moore(&mut rng, 200, 16).into();
    let obs = random_obs(&mut rng, 16, 100);
    let (a, b, worst) = run_viterbi_pair(&model, &out, &obs, viterbi_step_fast);
    assert!(worst <= 1e-9);
    assert_eq!(viterbi_backtrack(&a).unwrap(), viterbi_backtrack(&b).unwrap());
}

#[test]
fn backtrack_equals_exhaustive_search() {
    for seed in 100..110 {
        let mut rng = rng(seed);
        let model = random_model(&mut rng, 5, 1, 1);
        let out: OutputModel = random_moore(&mut rng, 5, 3).into();
        let obs = random_obs(&mut rng, 3, 6);
        let mut s = init_state(&model, &out, obs[0], true).unwrap();
        for &o in &obs[1..] {
            viterbi_step_fast(&mut s, o, &model, &out).unwrap();
        }
        let mut best = (Vec::new(), f64::NEG_INFINITY);
        for p in all_paths(5, 6) {
            let lp = path_log_prob(&p, &obs, &model, &out);
            if lp > best.1 + 1e-12 {
                best = (p, lp);
            }
        }
        assert_eq!(viterbi_backtrack(&s).unwrap(), best.0, "seed {seed}");
        assert!((s.best().1 - best.1).abs() < 1e-10);
    }
}

#[test]
fn band_only_model_reduces_to_banded_viterbi() {
    let mut rng = rng(3);
    let n = 9;
    // Band wide enough to cover every state, no skip mass.
    let (d1, d2) = (n - 1, n - 1);
    let width = d1 + d2 + 1;
    let mut alpha = vec![0.0; n * width];
    for i in 0..n {
        let dist = random_distribution(&mut rng, n);
        for j in 0..n {
            alpha[i * width + j + d1 - i] = dist[j];
        }
    }
    let model = TransitionModel::banded(d1, d2, alpha).unwrap();
    let moore = random_moore(&mut rng, n, 4);
    let out: OutputModel = moore.clone().into();
    let obs = random_obs(&mut rng, 4, 20);
    let mut s = init_state(&model, &out, obs[0], false).unwrap();
    let mut plain: Vec<f64> = s.log_probs().to_vec();
    for &o in &obs[1..] {
        viterbi_step_fast(&mut s, o, &model, &out).unwrap();
        plain = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| plain[j] + model.alpha(j, i).ln())
                    .fold(f64::NEG_INFINITY, f64::max)
                    + moore.prob(i, o).ln()
            })
            .collect();
        for (x, y) in s.log_probs().iter().zip(&plain) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

/// Uniform skip update written directly from its definition:
/// `p'(i) = b_i(o) · max{ max_{j∈nbh(i)} p(j)·a[j][i], γ · max_j p(j) }`.
fn uniform_skip_update(
    logp: &[f64],
    obs: usize,
    model: &TransitionModel,
    moore: &MooreOutput,
    gamma: f64,
) -> Vec<f64> {
    let n = logp.len();
    let global = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..n)
        .map(|i| {
            let band = (0..n)
                .filter(|&j| model.in_band(j, i))
                .map(|j| logp[j] + model.prob(j, i).ln())
                .fold(f64::NEG_INFINITY, f64::max);
            band.max(gamma.ln() + global) + moore.prob(i, obs).ln()
        })
        .collect()
}

#[test]
fn uniform_skip_specialization_matches_direct_formula() {
    for seed in 200..220 {
        let mut rng = rng(seed);
        let n = 20;
        let gamma_bar = 0.02;
        let (d1, d2) = (2, 1);
        let width = d1 + d2 + 1;
        let mut alpha = vec![0.0; n * width];
        for i in 0..n {
            let ks: Vec<usize> = (0..width).filter(|&k| i + k >= d1 && i + k - d1 < n).collect();
            let dist = random_distribution(&mut rng, ks.len());
            for (&k, p) in ks.iter().zip(dist) {
                alpha[i * width + k] = p * (1.0 - gamma_bar);
            }
        }
        let model = TransitionModel::new(
            d1,
            d2,
            alpha,
            vec![gamma_bar; n],
            vec![1.0 / n as f64; n],
            Regime::Nonnegative,
        )
        .unwrap();
        let moore = random_moore(&mut rng, n, 5);
        let out: OutputModel = moore.clone().into();
        let obs = random_obs(&mut rng, 5, 30);
        let mut s = init_state(&model, &out, obs[0], false).unwrap();
        for &o in &obs[1..] {
            let expected = uniform_skip_update(s.log_probs(), o, &model, &moore, gamma_bar / n as f64);
            viterbi_step_fast(&mut s, o, &model, &out).unwrap();
            for (x, y) in s.log_probs().iter().zip(&expected) {
                assert!((x - y).abs() < 1e-12, "seed {seed}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn fast_forward_backward_match_naive() {
    for seed in 300..330 {
        let mut rng = rng(seed);
        let c = random_case(&mut rng, 100, 10, 40);
        let model = random_model(&mut rng, c.n, c.d1, c.d2);
        let out: OutputModel = random_moore(&mut rng, c.n, c.k).into();
        let obs = random_obs(&mut rng, c.k, c.m);
        let fast = forward_backward_fast(&obs, &model, &out).unwrap();
        let naive = forward_backward_naive(&obs, &model, &out).unwrap();
        for m in 0..obs.len() {
            for i in 0..c.n {
                assert!(log_rel_err(fast.forward(m)[i], naive.forward(m)[i]) <= 1e-10);
                assert!(log_rel_err(fast.backward(m)[i], naive.backward(m)[i]) <= 1e-10);
            }
            assert!(log_rel_err(fast.log_mass(m), fast.log_likelihood()) <= 1e-8);
        }
    }
}

#[test]
fn forward_likelihood_equals_path_sum() {
    for seed in 400..405 {
        let mut rng = rng(seed);
        let model = random_model(&mut rng, 4, 1, 1);
        let out: OutputModel = random_moore(&mut rng, 4, 3).into();
        let obs = random_obs(&mut rng, 3, 5);
        let total: f64 = all_paths(4, 5).map(|p| path_log_prob(&p, &obs, &model, &out).exp()).sum();
        let lat = forward_backward_fast(&obs, &model, &out).unwrap();
        assert!(log_rel_err(lat.log_likelihood(), total.ln()) < 1e-12);
    }
}

#[test]
fn general_viterbi_matches_naive_on_mealy_models() {
    let mut rng = rng(500);
    let (n, d1, d2) = (150, 5, 2);
    let model = random_signed_model(&mut rng, n, d1, d2);
    let out: OutputModel = random_mealy(&mut rng, n, 6, d1, d2).into();
    let obs = random_obs(&mut rng, 6, 40);
    let (a, b, worst) = run_viterbi_pair(&model, &out, &obs, viterbi_step_general);
    assert!(worst <= 1e-9);
    assert_eq!(viterbi_backtrack(&a).unwrap(), viterbi_backtrack(&b).unwrap());
}

#[test]
fn general_viterbi_handles_straddling_candidates() {
    for seed in 600..620 {
        let mut rng = rng(seed);
        let (n, d1, d2) = (60, 3, 2);
        let model = random_signed_model(&mut rng, n, d1, d2);
        let out: OutputModel = random_mealy(&mut rng, n, 4, d1, d2).into();
        // Make the top D skip weights exactly nbh(c) and put the runner-up just outside it.
        let c = 10 + (seed as usize % 40);
        let mut logp: Vec<f64> = (0..n).map(|j| -50.0 - j as f64 * 0.01).collect();
        for j in c - d2..=c + d1 {
            logp[j] = -1.0 - 0.001 * j as f64;
        }
        logp[c + d1 + 1] = -2.0;
        let mut a = ViterbiState::from_log_probs(logp, true);
        let mut b = a.clone();
        viterbi_step_general(&mut a, 1, &model, &out).unwrap();
        viterbi_step_naive(&mut b, 1, &model, &out).unwrap();
        assert_eq!(a.backpointers().unwrap()[1], b.backpointers().unwrap()[1]);
        for (x, y) in a.log_probs().iter().zip(b.log_probs()) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
}

#[test]
fn moore_embedding_agrees_with_fast_paths() {
    let mut rng = rng(700);
    let (n, d1, d2) = (80, 4, 2);
    let model = random_model(&mut rng, n, d1, d2);
    let moore = random_moore(&mut rng, n, 7);
    let moore_out: OutputModel = moore.clone().into();
    let mealy_out: OutputModel = MealyOutput::from_moore(&moore, d1, d2).into();
    let obs = random_obs(&mut rng, 7, 30);

    let mut a = init_state(&model, &moore_out, obs[0], true).unwrap();
    let mut b = init_state(&model, &mealy_out, obs[0], true).unwrap();
    for &o in &obs[1..] {
        viterbi_step_fast(&mut a, o, &model, &moore_out).unwrap();
        viterbi_step_general(&mut b, o, &model, &mealy_out).unwrap();
        for (x, y) in a.log_probs().iter().zip(b.log_probs()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
    assert_eq!(viterbi_backtrack(&a).unwrap(), viterbi_backtrack(&b).unwrap());

    let fast = forward_backward_fast(&obs, &model, &moore_out).unwrap();
    let general = forward_backward_general(&obs, &model, &mealy_out).unwrap();
    for m in 0..obs.len() {
        for i in 0..n {
            assert!(log_rel_err(fast.forward(m)[i], general.forward(m)[i]) < 1e-8);
            assert!(log_rel_err(fast.backward(m)[i], general.backward(m)[i]) < 1e-8);
        }
    }
}

#[test]
fn general_forward_backward_match_naive() {
    for seed in 800..815 {
        let mut rng = rng(seed);
        let c = random_case(&mut rng, 80, 8, 30);
        let model = random_signed_model(&mut rng, c.n, c.d1, c.d2);
        let out: OutputModel = random_mealy(&mut rng, c.n, c.k, c.d1, c.d2).into();
        let obs = random_obs(&mut rng, c.k, c.m);
        let general = forward_backward_general(&obs, &model, &out).unwrap();
        let naive = forward_backward_naive(&obs, &model, &out).unwrap();
        assert!(log_rel_err(general.log_likelihood(), naive.log_likelihood()) <= 1e-8);
        for m in 0..obs.len() {
            for i in 0..c.n {
                assert!(log_rel_err(general.forward(m)[i], naive.forward(m)[i]) <= 1e-8);
                assert!(log_rel_err(general.backward(m)[i], naive.backward(m)[i]) <= 1e-8);
            }
        }
    }
}

#[test]
fn fast_step_work_is_linear_in_band_times_states() {
    let mut rng = rng(900);
    for &(n, d1, d2) in &[(500usize, 7usize, 2usize), (2000, 7, 2), (2000, 15, 4)] {
        let model = random_model(&mut rng, n, d1, d2);
        let out: OutputModel = random_moore(&mut rng, n, 8).into();
        let mut s = init_state(&model, &out, 0, false).unwrap();
        let before = s.work();
        viterbi_step_fast(&mut s, 1, &model, &out).unwrap();
        let per_step = s.work() - before;
        let d = (d1 + d2 + 1) as u64;
        assert!(per_step <= d * n as u64 + 2 * n as u64, "{per_step}");
        assert!(per_step >= d * (n as u64 - d));

        let mut lat = Lattice::start(model.resume(), &out, 0).unwrap();
        let before = lat.work();
        forward_step_fast(&mut lat, 1, &model, &out).unwrap();
        assert!(lat.work() - before <= d * n as u64 + 2 * n as u64);

        let mut naive = init_state(&model, &out, 0, false).unwrap();
        let before = naive.work();
        viterbi_step_naive(&mut naive, 1, &model, &out).unwrap();
        assert_eq!(naive.work() - before, (n * n) as u64);
    }
}
