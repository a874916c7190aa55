//! `rankpa` command-line entry point.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rankpa::figures::{reproduce, FigureId, FigureRequest};
use rankpa::harness::{diagnose_ensemble, summarize, DiagnosisSettings, DEFAULT_JUMP_THRESHOLD};
use rankpa::phase::analysis_grid;
use rankpa::trajectory::{fmt_f64, RNG_ALGORITHM};
use rankpa::{condensation_predict, run, ModelConfig};

use crate::config::{grid_of, parse_xi, FileConfig};

#[derive(Parser)]
#[command(name = "rankpa", version, about = "Preferential attachment with location-ranked choice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a config file; writes a trajectory CSV and a manifest.
    Simulate(SimulateArgs),
    /// Root curves, thresholds and condensation prediction for (xi, alpha).
    Analyze(AnalyzeArgs),
    /// Prediction plus simulated ensemble diagnoses over a list of alpha values.
    Scan(ScanArgs),
    /// Plot data for one of the standard figures.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory (default: out/<command>/<unix-time>-<seed>/).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for concurrent runs (scan defaults to all processors,
    /// other commands to one).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    /// Replace the measurement grid by this many evenly spaced points.
    #[arg(long)]
    grid_points: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Choice vector: "rank k of r" or comma-separated weights.
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Take xi and alpha from a config file instead.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interior x points of the analysis grid, x = i / N.
    #[arg(long, default_value_t = 1000)]
    grid_points: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    xi: String,
    /// Comma-separated alpha values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 1..)]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 200_000)]
    steps: u64,
    /// First seed; run i of each alpha uses seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 201)]
    grid_points: usize,
    #[arg(long, default_value_t = DEFAULT_JUMP_THRESHOLD)]
    jump_threshold: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    figure: String,
    #[arg(long)]
    steps: Option<u64>,
    /// Comma-separated seeds for simulated figures.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    jump_threshold: Option<f64>,
    #[command(flatten)]
    common: Common,
}

/// Machine-readable record of one command invocation.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    tool_version: String,
    config: serde_json::Value,
    seeds: Vec<u64>,
    rng_algorithm: String,
    /// Paths relative to the output directory.
    artifacts: Vec<PathBuf>,
    wall_seconds: f64,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    details: serde_json::Value,
}

fn output_dir(out: &Option<PathBuf>, command: &str, seed: u64) -> Result<PathBuf> {
    let dir = match out {
        Some(dir) => dir.clone(),
        None => {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs();
            Path::new("out").join(command).join(format!("{secs}-{seed}"))
        }
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("cannot write {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn finish(dir: &Path, manifest: RunManifest) -> Result<()> {
    write_json(&dir.join("manifest.json"), &manifest)?;
    println!("{}", dir.join("manifest.json").display());
    Ok(())
}

/// Run `f` on a pool of `workers` threads (sequentially without the
/// `parallel` feature).
fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(f())
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let mut config: ModelConfig = FileConfig::load(&args.config)?.into_model()?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(steps) = args.steps {
        config.steps = steps;
    }
    if let Some(points) = args.grid_points {
        config.grid = grid_of(points)?;
    }
    config.validate()?;
    let dir = output_dir(&args.common.out, "simulate", config.seed)?;
    let traj = with_workers(args.common.workers.unwrap_or(1), || run(&config))??;
    traj.save_csv(&dir.join("trajectory.csv"))?;
    finish(
        &dir,
        RunManifest {
            command: "simulate".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::to_value(&config)?,
            seeds: vec![config.seed],
            rng_algorithm: RNG_ALGORITHM.into(),
            artifacts: vec!["trajectory.csv".into()],
            wall_seconds: started.elapsed().as_secs_f64(),
            details: serde_json::to_value(traj.metadata())?,
        },
    )
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let started = Instant::now();
    let (xi, alpha) = match (&args.config, &args.xi, args.alpha) {
        (Some(path), None, None) => {
            let c = FileConfig::load(path)?.into_model()?;
            (c.xi, c.alpha)
        }
        (None, Some(xi), Some(alpha)) => (parse_xi(xi)?, alpha),
        _ => bail!("give either --config, or both --xi and --alpha"),
    };
    if args.grid_points < 2 {
        bail!("--grid-points must be at least 2");
    }
    let report = with_workers(args.common.workers.unwrap_or(1), || {
        condensation_predict(alpha, &xi, &analysis_grid(args.grid_points))
    })??;
    let dir = output_dir(&args.common.out, "analyze", 0)?;
    write_json(&dir.join("phase_report.json"), &report)?;
    finish(
        &dir,
        RunManifest {
            command: "analyze".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::json!({ "xi": xi, "alpha": alpha, "grid_points": args.grid_points }),
            seeds: vec![],
            rng_algorithm: RNG_ALGORITHM.into(),
            artifacts: vec!["phase_report.json".into()],
            wall_seconds: started.elapsed().as_secs_f64(),
            details: serde_json::Value::Null,
        },
    )
}

fn scan(args: ScanArgs) -> Result<()> {
    let started = Instant::now();
    if args.alphas.is_empty() {
        bail!("--alphas must list at least one value");
    }
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let xi = parse_xi(&args.xi)?;
    for &alpha in &args.alphas {
        if alpha.is_nan() || alpha <= -1.0 {
            bail!(rankpa::Error::AlphaOutOfRange(alpha));
        }
    }
    let grid = grid_of(args.grid_points)?;
    let settings = DiagnosisSettings {
        jump_threshold: args.jump_threshold,
        ..DiagnosisSettings::default()
    };
    let seeds: Vec<u64> = (0..args.runs as u64).map(|i| args.seed + i).collect();
    let dir = output_dir(&args.common.out, "scan", args.seed)?;
    let workers = args.common.workers.unwrap_or_else(default_workers);

    let mut rows = Vec::new();
    let mut per_alpha = Vec::new();
    for &alpha in &args.alphas {
        let report = condensation_predict(alpha, &xi, &analysis_grid(1000))?;
        let mut base = ModelConfig::new(xi.clone(), alpha, args.steps, 0);
        base.grid = grid.clone();
        let diagnoses = with_workers(workers, || diagnose_ensemble(&base, &seeds, None, &settings))??;
        let s = summarize(&diagnoses);
        rows.push(vec![
            fmt_f64(alpha),
            report.prediction.min_points.to_string(),
            report.prediction.max_points.to_string(),
            s.runs.to_string(),
            s.jump_detected.to_string(),
            fmt_f64(s.jump_detected as f64 / s.runs as f64),
            s.one_jump.to_string(),
            s.two_or_more_jumps.to_string(),
            s.persistent_hub.to_string(),
            s.non_hub.to_string(),
            s.undecided.to_string(),
        ]);
        per_alpha.push(serde_json::json!({
            "alpha": alpha,
            "prediction": report.prediction,
            "diagnoses": diagnoses,
        }));
    }

    let mut w = csv::Writer::from_path(dir.join("scan.csv"))?;
    w.write_record([
        "alpha",
        "predicted_min_points",
        "predicted_max_points",
        "runs",
        "jump_detected",
        "jump_frequency",
        "one_jump",
        "two_or_more_jumps",
        "persistent_hub",
        "non_hub",
        "undecided",
    ])?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;

    finish(
        &dir,
        RunManifest {
            command: "scan".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::json!({
                "xi": xi,
                "alphas": args.alphas,
                "runs": args.runs,
                "steps": args.steps,
                "grid_points": args.grid_points,
                "settings": settings,
                "workers": workers,
            }),
            seeds,
            rng_algorithm: RNG_ALGORITHM.into(),
            artifacts: vec!["scan.csv".into()],
            wall_seconds: started.elapsed().as_secs_f64(),
            details: serde_json::Value::Array(per_alpha),
        },
    )
}

fn reproduce_figure(args: ReproduceArgs) -> Result<()> {
    let started = Instant::now();
    let figure: FigureId = args.figure.parse()?;
    let mut request = FigureRequest::new(figure);
    if let Some(steps) = args.steps {
        request.steps = steps;
    }
    if !args.seed.is_empty() {
        request.seeds = args.seed.clone();
    }
    if let Some(points) = args.grid_points {
        grid_of(points)?;
        request.grid_points = points;
    }
    if let Some(t) = args.jump_threshold {
        request.settings.jump_threshold = t;
    }
    let dir = output_dir(&args.common.out, "reproduce", request.seeds[0])?;
    let figure_manifest = with_workers(args.common.workers.unwrap_or(1), || reproduce(&request, &dir))??;
    finish(
        &dir,
        RunManifest {
            command: "reproduce".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::to_value(&request)?,
            seeds: figure_manifest.seeds.clone(),
            rng_algorithm: RNG_ALGORITHM.into(),
            artifacts: figure_manifest.files.clone(),
            wall_seconds: started.elapsed().as_secs_f64(),
            details: serde_json::to_value(&figure_manifest)?,
        },
    )
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Scan(a) => scan(a),
        Command::Reproduce(a) => reproduce_figure(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
