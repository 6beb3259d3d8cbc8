//! Command-line front end: `follow`, `simulate`, `ft-curve`, `bench` and
//! `fit-dists`.
//!
//! Exit codes: 0 success, 1 usage, 2 unreadable or malformed input, 3 model
//! or parameter inconsistency.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use scorefollow::evalkit::{
    bench_update, evaluate, extract_stop_resume_distributions, fit_h_eff, following_metrics, run_online, Algorithm,
    BenchConfig,
};
use scorefollow::follower::{decode_offline, CompiledScore, FollowerConfig, Mode, Session, DEFAULT_DT_LIMIT_MS};
use scorefollow::io::{
    bench_to_csv, follower_output_to_jsonl, ft_curve_to_csv, parse_annotation, parse_distribution, parse_performance,
    parse_score, report_to_json, write_annotation, write_distribution, write_performance, write_report, write_score,
    write_text, FtCurvePoint,
};
use scorefollow::perf_model::{ModelKind, OutputParams, Score};
use scorefollow::simgen::{
    generate_performance, generate_score, h_prime, sample_resumption_distribution, MistakeParams, ScoreKind,
    SkipParams, Timing,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_MODEL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scorefollow", version, about = "HMM score follower with repeat and skip handling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Follow a performance through a score.
    Follow(FollowArgs),
    /// Generate a synthetic performance with ground-truth annotations.
    Simulate(SimulateArgs),
    /// Measure following time against the resumption entropy H'.
    FtCurve(FtCurveArgs),
    /// Time single Viterbi updates for several score lengths.
    Bench(BenchArgs),
    /// Estimate stop and resumption distributions from recorded performances.
    FitDists(FitDistsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Online,
    Offline,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mistakes {
    None,
    Table5,
}

impl Mistakes {
    fn params(self) -> MistakeParams {
        match self {
            Mistakes::None => MistakeParams::none(),
            Mistakes::Table5 => MistakeParams::table5(),
        }
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// outer, uniform or noskip.
    #[arg(long, default_value = "uniform")]
    model: ModelKind,
    /// Band width.
    #[arg(long = "D", default_value_t = 10)]
    d: usize,
    /// Average skip probability; defaults to the mass left outside the band.
    #[arg(long)]
    gamma_bar: Option<f64>,
    /// Stop distribution (JSON array), required for the outer model.
    #[arg(long)]
    s_file: Option<PathBuf>,
    /// Resumption distribution (JSON array), required for the outer model.
    #[arg(long)]
    r_file: Option<PathBuf>,
    /// Onsets closer than this are treated as one chord.
    #[arg(long, default_value_t = DEFAULT_DT_LIMIT_MS)]
    dt_limit_ms: f64,
}

#[derive(Debug, Args)]
struct FollowArgs {
    #[arg(long)]
    score: PathBuf,
    /// Performance as .jsonl, .csv or .mid.
    #[arg(long)]
    perf: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "online")]
    mode: ModeArg,
    /// Ground truth; enables the evaluation report.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Per-event estimates (JSONL).
    #[arg(long)]
    out: PathBuf,
    /// Where to write the report; stdout if omitted.
    #[arg(long, requires = "annotations")]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["score", "n"])))]
struct SimulateArgs {
    #[arg(long)]
    score: Option<PathBuf>,
    /// Length of a generated i.i.d. score.
    #[arg(long = "N", requires = "n_p")]
    n: Option<usize>,
    /// Number of distinct pitches in a generated score.
    #[arg(long = "Np")]
    n_p: Option<usize>,
    /// Number of repeats/skips.
    #[arg(long, default_value_t = 0)]
    skips: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "none")]
    mistakes: Mistakes,
    #[arg(long)]
    s_file: Option<PathBuf>,
    #[arg(long)]
    r_file: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    min_segment: usize,
    #[arg(long, default_value_t = 30)]
    max_segment: usize,
    /// Performance output (.jsonl, .csv or .mid).
    #[arg(long)]
    out_perf: PathBuf,
    #[arg(long)]
    out_annotations: PathBuf,
    /// Also write the score used.
    #[arg(long)]
    out_score: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FtCurveArgs {
    #[arg(long)]
    score: PathBuf,
    /// Number of sampled resumption distributions.
    #[arg(long, default_value_t = 20)]
    num_r: usize,
    #[arg(long, default_value_t = 300)]
    skips_per_r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "D", default_value_t = 10)]
    d: usize,
    #[arg(long, value_enum, default_value = "none")]
    mistakes: Mistakes,
    /// CSV with columns H_prime, ft_mean, ft_stderr.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long = "Ns", value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    #[arg(long = "D", default_value_t = 10)]
    d: usize,
    #[arg(long, default_value = "fast")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 100)]
    events: usize,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FitDistsArgs {
    #[arg(long)]
    score: PathBuf,
    #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
    perfs: Vec<PathBuf>,
    #[arg(long = "D", default_value_t = 10)]
    d: usize,
    #[arg(long)]
    gamma_bar: Option<f64>,
    /// Pseudo-count added to every histogram bin.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_DT_LIMIT_MS)]
    dt_limit_ms: f64,
    #[arg(long)]
    out_s: PathBuf,
    #[arg(long)]
    out_r: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(scorefollow::Error),
}

impl From<scorefollow::Error> for CliError {
    fn from(e: scorefollow::Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        use scorefollow::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::Parse { .. } | E::Io(_) | E::InvalidScore(_) | E::Annotation(_) | E::Ordering { .. }) => {
                EXIT_PARSE
            }
            CliError::Core(_) => EXIT_MODEL,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Errors are reported on stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match cli.command {
        Command::Follow(a) => follow(a),
        Command::Simulate(a) => simulate(a),
        Command::FtCurve(a) => ft_curve(a),
        Command::Bench(a) => bench(a),
        Command::FitDists(a) => fit_dists(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("scorefollow: {e}");
            e.exit_code()
        }
    }
}

fn load_stop_resume(
    s_file: Option<&Path>,
    r_file: Option<&Path>,
    n: usize,
) -> CliResult<(Option<Vec<f64>>, Option<Vec<f64>>)> {
    let load = |p: Option<&Path>| p.map(|p| parse_distribution(p, Some(n))).transpose();
    Ok((load(s_file)?, load(r_file)?))
}

fn compile(score: &Score, args: &ModelArgs, mode: Mode) -> CliResult<(Arc<CompiledScore>, FollowerConfig)> {
    let config = FollowerConfig {
        dt_limit_ms: args.dt_limit_ms,
        mode,
        model_kind: args.model,
        band_width: args.d,
        gamma_bar: args.gamma_bar,
    };
    let (s, r) = load_stop_resume(args.s_file.as_deref(), args.r_file.as_deref(), score.len())?;
    let stop_resume = match (args.model, &s, &r) {
        (ModelKind::Outer, Some(s), Some(r)) => Some((s.as_slice(), r.as_slice())),
        (ModelKind::Outer, _, _) => {
            return Err(CliError::Usage("--model outer requires both --s-file and --r-file".into()))
        }
        _ => None,
    };
    let models = CompiledScore::compile(score, &config, &OutputParams::table5(), stop_resume)?;
    Ok((Arc::new(models), config))
}

fn follow(a: FollowArgs) -> CliResult {
    let score = parse_score(&a.score)?;
    let events = parse_performance(&a.perf)?;
    let annotation = a.annotations.as_deref().map(parse_annotation).transpose()?;
    let mode = match a.mode {
        ModeArg::Online => Mode::Online,
        ModeArg::Offline => Mode::Offline,
    };
    let (models, config) = compile(&score, &a.model, mode)?;
    let mut session = Session::new(models.clone(), config.clone())?;
    let mut outputs = session.process_all(&events)?;
    if mode == Mode::Offline {
        let path = decode_offline(models, &config, &events)?;
        for (o, chord) in outputs.iter_mut().zip(path) {
            o.chord = chord;
        }
    }
    write_text(&a.out, &follower_output_to_jsonl(&outputs))?;
    if let Some(annotation) = annotation {
        let estimates: Vec<usize> = outputs.iter().map(|o| o.chord).collect();
        let report = evaluate(&estimates, &annotation, &score)?;
        match &a.report {
            Some(path) => write_report(&report, path)?,
            None => println!("{}", report_to_json(&report)),
        }
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> CliResult {
    let score = match (&a.score, a.n, a.n_p) {
        (Some(path), _, _) => parse_score(path)?,
        (None, Some(n), Some(n_p)) => generate_score(n, n_p, ScoreKind::Iid, a.seed)?,
        _ => return Err(CliError::Usage("give --score or both --N and --Np".into())),
    };
    let n = score.len();
    let (s, r) = load_stop_resume(a.s_file.as_deref(), a.r_file.as_deref(), n)?;
    let uniform = vec![1.0 / n as f64; n];
    let skips = SkipParams {
        s: s.unwrap_or_else(|| uniform.clone()),
        r: r.unwrap_or(uniform),
        n_skips: a.skips,
        min_segment: a.min_segment,
        max_segment: Some(a.max_segment),
    };
    let perf = generate_performance(&score, &skips, &a.mistakes.params(), &Timing::default(), a.seed.wrapping_add(1))?;
    write_performance(&perf.events, &a.out_perf)?;
    write_annotation(&perf.annotation, &a.out_annotations)?;
    if let Some(path) = &a.out_score {
        write_score(&score, path)?;
    }
    Ok(())
}

/// Mean following time for one resumption distribution under the outer model.
fn ft_point(score: &Score, a: &FtCurveArgs, k: usize) -> CliResult<Option<FtCurvePoint>> {
    let n = score.len();
    let top = (n as f64).ln() - 1.0;
    let target = if a.num_r > 1 {
        top * k as f64 / (a.num_r - 1) as f64
    } else {
        0.0
    };
    let seed = a.seed.wrapping_add(2 * k as u64);
    let r = sample_resumption_distribution(n, target, seed)?;
    let u = vec![1.0 / n as f64; n];
    let skips = SkipParams {
        s: u.clone(),
        r: r.clone(),
        ..SkipParams::uniform(n, a.skips_per_r)
    };
    let perf = generate_performance(score, &skips, &a.mistakes.params(), &Timing::default(), seed + 1)?;
    let config = FollowerConfig {
        model_kind: ModelKind::Outer,
        band_width: a.d,
        ..Default::default()
    };
    let models = CompiledScore::compile(score, &config, &OutputParams::table5(), Some((&u, &r)))?;
    let estimates = run_online(Arc::new(models), &config, &perf.events)?;
    let metrics = following_metrics(&estimates, &perf.annotation)?;
    Ok(metrics.ft_mean.map(|ft_mean| FtCurvePoint {
        h_prime: h_prime(&r),
        ft_mean,
        ft_stderr: metrics.ft_stderr.unwrap_or(f64::NAN),
    }))
}

fn ft_curve(a: FtCurveArgs) -> CliResult {
    if a.num_r == 0 {
        return Err(CliError::Usage("--num-r must be at least 1".into()));
    }
    let score = parse_score(&a.score)?;
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(a.num_r);
    let mut slots: Vec<Option<CliResult<Option<FtCurvePoint>>>> = (0..a.num_r).map(|_| None).collect();
    thread::scope(|scope| {
        for (w, chunk) in slots.chunks_mut(a.num_r.div_ceil(workers)).enumerate() {
            let (score, a) = (&score, &a);
            let base = w * a.num_r.div_ceil(workers);
            scope.spawn(move || {
                for (offset, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(ft_point(score, a, base + offset));
                }
            });
        }
    });
    let mut points = Vec::new();
    for slot in slots {
        if let Some(p) = slot.expect("every slot filled")? {
            points.push(p);
        }
    }
    write_text(&a.out, &ft_curve_to_csv(&points))?;
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.h_prime, p.ft_mean)).collect();
    let fit = fit_h_eff(&xy)?;
    println!(
        "h_eff {:.6}\nintercept {:.6}\nr_squared {:.6}",
        fit.h_eff, fit.intercept, fit.r_squared
    );
    Ok(())
}

fn bench(a: BenchArgs) -> CliResult {
    let config = BenchConfig {
        d: a.d,
        num_events: a.events,
        repetitions: a.repetitions,
        algorithm: a.algorithm,
        seed: a.seed,
    };
    let rows = bench_update(&a.ns, &config)?;
    write_text(&a.out, &bench_to_csv(&rows))?;
    Ok(())
}

fn fit_dists(a: FitDistsArgs) -> CliResult {
    let score = parse_score(&a.score)?;
    let config = FollowerConfig {
        dt_limit_ms: a.dt_limit_ms,
        mode: Mode::Offline,
        model_kind: ModelKind::Uniform,
        band_width: a.d,
        gamma_bar: a.gamma_bar,
    };
    let models = Arc::new(CompiledScore::compile(&score, &config, &OutputParams::table5(), None)?);
    let mut decodes = Vec::with_capacity(a.perfs.len());
    for path in &a.perfs {
        let events = parse_performance(path)?;
        let decoded = decode_offline(models.clone(), &config, &events)?;
        decodes.push((decoded, events.iter().map(|e| e.t_ms).collect()));
    }
    let dists = extract_stop_resume_distributions(&decodes, score.len(), a.epsilon, a.dt_limit_ms)?;
    write_distribution(&dists.s, &a.out_s)?;
    write_distribution(&dists.r, &a.out_r)?;
    println!("skips {}", dists.n_skips);
    Ok(())
}
