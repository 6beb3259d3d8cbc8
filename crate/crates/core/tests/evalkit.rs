use scorefollow::evalkit::*;
use scorefollow::simgen::*;

fn truth(annotation: &AlignmentAnnotation) -> Vec<usize> {
    annotation.events.iter().map(|t| t.chord.unwrap()).collect()
}

#[test]
fn perfect_estimates_score_perfectly() {
    let score = generate_score(300, 20, ScoreKind::Iid, 1).unwrap();
    let perf = generate_performance(&score, &SkipParams::uniform(300, 10), &MistakeParams::none(), &Timing::default(), 2)
        .unwrap();
    let est = truth(&perf.annotation);
    let report = evaluate(&est, &perf.annotation, &score).unwrap();
    assert_eq!(report.error_rate, Some(0.0));
    assert_eq!(report.following_rate, Some(1.0));
    assert_eq!(report.ft_mean, Some(1.0));
    assert_eq!(report.ft_sd, Some(0.0));
    assert_eq!(report.counts.skips, 10);
    assert_eq!(report.n_ch, 1.0);
}

#[test]
fn lagging_estimates_give_known_following_times() {
    let score = generate_score(300, 20, ScoreKind::Iid, 1).unwrap();
    let perf = generate_performance(&score, &SkipParams::uniform(300, 6), &MistakeParams::none(), &Timing::default(), 4)
        .unwrap();
    let mut est = truth(&perf.annotation);
    // Stay on the stop chord for the first three chords after each resumption.
    for s in &perf.annotation.skips {
        for e in &mut est[s.event_index..s.event_index + 3] {
            *e = s.stop;
        }
    }
    let m = following_metrics(&est, &perf.annotation).unwrap();
    assert!(m.outcomes.iter().all(|o| o.followed && o.following_time == 4));
    assert_eq!(m.ft_mean, Some(4.0));
    let err = error_rate(&est, &perf.annotation).unwrap();
    assert!((err - 18.0 / est.len() as f64).abs() < 1e-12);
}

#[test]
fn extraction_recovers_simulated_skips() {
    let n = 200;
    let mut r = vec![0.0; n];
    r[20] = 0.7;
    r[150] = 0.3;
    let mut s = vec![0.0; n];
    for x in &mut s[60..140] {
        *x = 1.0 / 80.0;
    }
    let skips = SkipParams {
        s,
        r,
        ..SkipParams::uniform(n, 15)
    };
    let score = generate_score(n, 20, ScoreKind::Iid, 3).unwrap();
    let mut decodes = Vec::new();
    let mut expected = Vec::new();
    for seed in 0..4 {
        let perf = generate_performance(&score, &skips, &MistakeParams::none(), &Timing::default(), seed).unwrap();
        let times = perf.events.iter().map(|e| e.t_ms).collect();
        expected.extend(perf.annotation.skips.iter().map(|k| (k.stop, k.resume)));
        let path = truth(&perf.annotation);
        assert_eq!(classify_transitions(&path, &perf.events.iter().map(|e| e.t_ms).collect::<Vec<_>>(), 35.0).unwrap().skips,
            perf.annotation.skips.iter().map(|k| (k.stop, k.resume)).collect::<Vec<_>>());
        decodes.push((path, times));
    }
    let dists = extract_stop_resume_distributions(&decodes, n, 1e-3, 35.0).unwrap();
    assert_eq!(dists.n_skips, expected.len());
    let resumed_at = |c: usize| expected.iter().filter(|k| k.1 == c).count() as f64;
    let total = expected.len() as f64 + n as f64 * 1e-3;
    assert!((dists.r[20] - (resumed_at(20) + 1e-3) / total).abs() < 1e-12);
    assert!((dists.r[150] - (resumed_at(150) + 1e-3) / total).abs() < 1e-12);
    assert!(dists.s[..60].iter().all(|&x| x < 1e-4));
}

#[test]
fn clean_traversal_has_only_normal_steps() {
    let path: Vec<usize> = (0..50).collect();
    let times: Vec<f64> = (0..50).map(|k| 500.0 * k as f64).collect();
    let c = classify_transitions(&path, &times, 35.0).unwrap();
    assert_eq!(c.normal, 49);
    assert_eq!(c.total(), 49);
}

#[test]
fn fit_recovers_an_exact_line() {
    let points: Vec<(f64, f64)> = (0..10).map(|k| (k as f64 * 0.5, 1.2 + k as f64 * 0.5 / 3.5)).collect();
    let fit = fit_h_eff(&points).unwrap();
    assert!((fit.h_eff - 3.5).abs() < 1e-10);
    assert!((fit.intercept - 1.2).abs() < 1e-10);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
}

#[test]
fn bench_rows_follow_requested_sizes() {
    let config = BenchConfig {
        num_events: 10,
        repetitions: 2,
        ..Default::default()
    };
    let rows = bench_update(&[50, 500], &config).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![50, 500]);
    assert!(rows.iter().all(|r| r.d == 10 && r.algorithm == Algorithm::Fast && r.mean_us > 0.0));
}
