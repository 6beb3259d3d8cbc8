use std::fs;
use std::path::Path;
use std::process::Command;

use scorefollow::io::{parse_distribution, report_from_json};
use scorefollow_cli::{run_command, EXIT_MODEL, EXIT_OK, EXIT_PARSE, EXIT_USAGE};
use tempfile::tempdir;

fn run(args: &[&str]) -> i32 {
    run_command(std::iter::once("scorefollow").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, tag: &str, extra: &[&str]) {
    let perf = dir.join(format!("{tag}.jsonl"));
    let ann = dir.join(format!("{tag}.ann.jsonl"));
    let score = dir.join("score.json");
    let mut args = vec![
        "simulate", "--N", "300", "--Np", "16", "--skips", "5", "--seed", "4",
        "--out-perf", p(&perf), "--out-annotations", p(&ann), "--out-score", p(&score),
    ];
    args.extend_from_slice(extra);
    assert_eq!(run(&args), EXIT_OK);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempdir().unwrap();
    simulate(dir.path(), "a", &["--mistakes", "table5"]);
    simulate(dir.path(), "b", &["--mistakes", "table5"]);
    for ext in ["jsonl", "ann.jsonl"] {
        let a = fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let b = fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }
}

#[test]
fn follow_on_clean_simulation_has_zero_error() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        run(&[
            "simulate", "--N", "300", "--Np", "16", "--seed", "9",
            "--out-perf", p(&d.join("perf.csv")), "--out-annotations", p(&d.join("ann.jsonl")),
            "--out-score", p(&d.join("score.json")),
        ]),
        EXIT_OK
    );
    for mode in ["online", "offline"] {
        let out = d.join(format!("{mode}.jsonl"));
        let report = d.join(format!("{mode}.report.json"));
        assert_eq!(
            run(&[
                "follow", "--score", p(&d.join("score.json")), "--perf", p(&d.join("perf.csv")),
                "--mode", mode, "--annotations", p(&d.join("ann.jsonl")), "--out", p(&out), "--report", p(&report),
            ]),
            EXIT_OK
        );
        let report = report_from_json(&fs::read_to_string(report).unwrap()).unwrap();
        assert_eq!(report.error_rate, Some(0.0), "{mode}");
        assert_eq!(report.following_rate, None);
        let lines = fs::read_to_string(out).unwrap().lines().count();
        assert_eq!(lines, report.counts.matched);
    }
}

#[test]
fn follow_outer_requires_r_file() {
    let dir = tempdir().unwrap();
    simulate(dir.path(), "a", &[]);
    let d = dir.path();
    let code = run(&[
        "follow", "--score", p(&d.join("score.json")), "--perf", p(&d.join("a.jsonl")),
        "--model", "outer", "--out", p(&d.join("o.jsonl")),
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn usage_parse_and_model_errors_have_distinct_codes() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["follow"]), EXIT_USAGE);
    assert_eq!(run(&["no-such-command"]), EXIT_USAGE);
    assert_eq!(run(&["--help"]), EXIT_OK);

    fs::write(d.join("bad.json"), "{ not json").unwrap();
    fs::write(d.join("perf.csv"), "0,60\n").unwrap();
    let code = run(&[
        "follow", "--score", p(&d.join("bad.json")), "--perf", p(&d.join("perf.csv")), "--out", p(&d.join("o")),
    ]);
    assert_eq!(code, EXIT_PARSE);

    fs::write(d.join("score.json"), r#"{"name":"x","chords":[{"pitches":[60]},{"pitches":[62]}]}"#).unwrap();
    fs::write(d.join("s.json"), "[0.9, 0.1]").unwrap();
    fs::write(d.join("r.json"), "[0.5, 0.5]").unwrap();
    // N·γ̄·s_i > 1 cannot be a probability.
    let code = run(&[
        "follow", "--score", p(&d.join("score.json")), "--perf", p(&d.join("perf.csv")),
        "--model", "outer", "--gamma-bar", "0.99", "--s-file", p(&d.join("s.json")), "--r-file", p(&d.join("r.json")),
        "--out", p(&d.join("o")),
    ]);
    assert_eq!(code, EXIT_MODEL);
}

#[test]
fn bench_writes_one_row_per_size() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    assert_eq!(run(&["bench", "--Ns", "100,1000,10000", "--D", "10", "--events", "30", "--out", p(&out)]), EXIT_OK);
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,D,algorithm,mean_us,sd_us"));
    let means: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(means.len(), 3);
    assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
}

#[test]
fn ft_curve_reports_fit() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    simulate(d, "a", &[]);
    let out = d.join("curve.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_scorefollow"))
        .args(["ft-curve", "--score", p(&d.join("score.json")), "--num-r", "4", "--skips-per-r", "40"])
        .args(["--seed", "3", "--out", p(&out)])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.starts_with("h_eff "));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("H_prime,ft_mean,ft_stderr"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn fit_dists_recovers_concentrated_resumption() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let n = 300;
    let mut r = vec![0.0; n];
    r[40] = 0.5;
    r[200] = 0.5;
    let to_json = |v: &[f64]| format!("[{}]", v.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    fs::write(d.join("r.json"), to_json(&r)).unwrap();
    let perf = d.join("perf.jsonl");
    assert_eq!(
        run(&[
            "simulate", "--N", "300", "--Np", "24", "--skips", "12", "--seed", "1", "--r-file", p(&d.join("r.json")),
            "--out-perf", p(&perf), "--out-annotations", p(&d.join("ann.jsonl")), "--out-score",
            p(&d.join("score.json")),
        ]),
        EXIT_OK
    );
    assert_eq!(
        run(&[
            "fit-dists", "--score", p(&d.join("score.json")), "--perfs", p(&perf),
            "--epsilon", "0.01", "--out-s", p(&d.join("s_hat.json")), "--out-r", p(&d.join("r_hat.json")),
        ]),
        EXIT_OK
    );
    let r_hat = parse_distribution(d.join("r_hat.json"), Some(n)).unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| r_hat[b].total_cmp(&r_hat[a]));
    order.truncate(2);
    order.sort();
    assert_eq!(order, vec![40, 200]);
    assert!(r_hat[40] + r_hat[200] > 0.5, "{} {}", r_hat[40], r_hat[200]);
}
