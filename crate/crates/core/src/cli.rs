//! Command-line interface.
//!
//! Exit codes: 0 success, 2 data error, 64 usage error, 70 internal error.

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::analysis::{elbow, fit_beta_curve};
use crate::compression::{
    compress_frame, decompress_frame, deserialize_bundle, measure_lossless, raw_bytes, serialize_bundle, Brotli,
};
use crate::data::{
    generate_synthetic, ingest_csv, interpolate_gaps, write_csv, NormalizationParams, Schema, SyntheticConfig,
    TimeSeriesFrame,
};
use crate::error::{Error, Result};
use crate::experiment::{
    prepare_splits, record_row, run_grid_with, target_nmi, write_report, GridConfig, PrepareConfig, Report,
    RECORD_HEADER,
};
use crate::forecasting::{GbtParams, LagSpec, ModelKind, PastFill};
use crate::fsutil::{partial_path, write_atomic};
use crate::infometrics::NmiPoint;
use crate::wavelet::Wavelet;
use crate::DEFAULT_SEED;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Parser)]
#[command(
    name = "wavecast",
    version,
    about = "Wavelet compression and forecasting experiments for sensor time series"
)]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest, repair, segment, split and normalize a dataset.
    Prepare(PrepareArgs),
    /// Compress one CSV series into a bundle file.
    Compress(CompressArgs),
    /// Reconstruct a CSV from a bundle file.
    Decompress(DecompressArgs),
    /// Run the compression-by-forecaster grid on a prepared dataset.
    Run(RunArgs),
    /// Compute NMI curves, beta fits and elbow recommendations.
    Nmi(NmiArgs),
}

fn parse_rate(s: &str) -> std::result::Result<f64, String> {
    let r: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if r.is_finite() && (0.0..1.0).contains(&r) {
        Ok(r)
    } else {
        Err(format!("rate {r} must satisfy 0 <= rate < 1"))
    }
}

fn parse_wavelet(s: &str) -> std::result::Result<Wavelet, String> {
    s.parse::<Wavelet>().map_err(|e| e.to_string())
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse::<ModelKind>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed; overrides WAVECAST_SEED.
    #[arg(long, env = "WAVECAST_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Input CSV files.
    #[arg(long, required_unless_present = "synthetic")]
    pub input: Vec<PathBuf>,
    /// Column roles as role=column (roles: timestamp, target, past, future).
    #[arg(long, value_delimiter = ',')]
    pub schema: Vec<String>,
    /// Generate synthetic data instead of reading CSV.
    #[arg(long, conflicts_with = "input")]
    pub synthetic: bool,
    /// Synthetic record length in days.
    #[arg(long, default_value_t = 30.0)]
    pub days: f64,
    /// Synthetic sampling step in minutes.
    #[arg(long, default_value_t = 1)]
    pub step_minutes: i64,
    /// Holes of at least this many minutes split the series.
    #[arg(long, default_value_t = 60)]
    pub max_gap: i64,
    #[arg(long, default_value_t = 5.0)]
    pub min_days: f64,
    #[arg(long, default_value_t = 10.0)]
    pub max_days: f64,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.6, 0.2, 0.2])]
    pub fractions: Vec<f64>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub schema: Vec<String>,
    #[arg(long, value_parser = parse_wavelet, default_value = "bior1.1")]
    pub wavelet: Wavelet,
    #[arg(long, value_parser = parse_rate)]
    pub rate: f64,
    /// Output bundle file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecompressArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
    /// First timestamp (RFC 3339 or Unix seconds).
    #[arg(long, default_value = "0")]
    pub start: String,
    /// Sampling step in seconds.
    #[arg(long, default_value_t = 60)]
    pub step: i64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Directory written by `prepare`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_wavelet)]
    pub wavelets: Vec<Wavelet>,
    #[arg(long, value_delimiter = ',', value_parser = parse_rate)]
    pub rates: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_model)]
    pub models: Vec<ModelKind>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Context length in minutes.
    #[arg(long, default_value_t = 360)]
    pub context_minutes: i64,
    /// Direct forecast chunk in minutes.
    #[arg(long, default_value_t = 60)]
    pub chunk_minutes: i64,
    /// Rollout length in minutes.
    #[arg(long, default_value_t = 360)]
    pub rollout_minutes: i64,
    /// Keep every n-th lag.
    #[arg(long, default_value_t = 1)]
    pub lag_thin: usize,
    /// Training origin stride in samples.
    #[arg(long, default_value_t = 1)]
    pub train_stride: usize,
    /// Extra row subsampling for boosted trees.
    #[arg(long, default_value_t = 1)]
    pub gbt_row_stride: usize,
    /// Test origin stride in minutes.
    #[arg(long, default_value_t = 60)]
    pub eval_stride_minutes: i64,
    #[arg(long, default_value_t = 200)]
    pub gbt_rounds: usize,
    #[arg(long, default_value_t = 6)]
    pub gbt_depth: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
    /// Early-stop boosted trees on the validation split after this many idle rounds.
    #[arg(long)]
    pub early_stop: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    /// Use true past covariates during rollout instead of persistence.
    #[arg(long)]
    pub oracle_past: bool,
    /// Neighbours for NMI.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct NmiArgs {
    /// Directory written by `prepare` (training targets are used).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_wavelet)]
    pub wavelets: Vec<Wavelet>,
    /// Number of rates including 0.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

/// Contents of `manifest.json` in a prepared directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub seed: u64,
    pub prepare: PrepareConfig,
    pub schema: Schema,
    pub step_seconds: i64,
    pub normalization: NormalizationParams,
    pub clamped: usize,
    pub dropped_short: usize,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_data_error() => EXIT_DATA,
        Error::Io { .. } => EXIT_DATA,
        Error::Config(_) | Error::InvalidRate(_) | Error::UnsupportedWavelet(_) | Error::ExcessLevel { .. } => {
            EXIT_USAGE
        }
        _ => EXIT_INTERNAL,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Prepare(a) => cmd_prepare(&a),
        Command::Compress(a) => cmd_compress(&a),
        Command::Decompress(a) => cmd_decompress(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Nmi(a) => cmd_nmi(&a),
    }
}

fn schema_or_default(pairs: &[String]) -> Result<Schema> {
    if pairs.is_empty() {
        Ok(Schema::synthetic())
    } else {
        Schema::from_pairs(pairs)
    }
}

pub fn cmd_prepare(args: &PrepareArgs) -> Result<()> {
    let (frames, schema) = if args.synthetic {
        let config = SyntheticConfig {
            duration_days: args.days,
            step_minutes: args.step_minutes,
            ..SyntheticConfig::default()
        };
        (generate_synthetic(&config, args.seed.seed)?, Schema::synthetic())
    } else {
        let schema = schema_or_default(&args.schema)?;
        let mut frames = Vec::new();
        for path in &args.input {
            frames.extend(crate::data::read_csv(
                fs::File::open(path).map_err(|e| Error::io(path, e))?,
                &schema,
                args.max_gap,
            )?);
        }
        (frames, schema)
    };
    let fractions: [f64; 3] = args
        .fractions
        .as_slice()
        .try_into()
        .map_err(|_| Error::Config("--fractions needs three values".into()))?;
    let config = PrepareConfig {
        max_gap_minutes: args.max_gap,
        min_days: args.min_days,
        max_days: args.max_days,
        fractions,
        seed: args.seed.seed,
    };
    let prepared = prepare_splits(&frames, &config)?;
    let step_seconds = prepared
        .split
        .train
        .first()
        .map(|f| f.step_seconds)
        .ok_or_else(|| Error::Data("no training segments".into()))?;
    let mut lists: [Vec<String>; 3] = Default::default();
    for (list, (name, frames)) in lists.iter_mut().zip([
        ("train", &prepared.split.train),
        ("validation", &prepared.split.validation),
        ("test", &prepared.split.test),
    ]) {
        for (i, frame) in frames.iter().enumerate() {
            let rel = format!("{name}/segment_{i:03}.csv");
            write_csv(frame, &args.out.join(&rel))?;
            list.push(rel);
        }
    }
    let [train, validation, test] = lists;
    let manifest = Manifest {
        format: 1,
        seed: args.seed.seed,
        prepare: config,
        schema,
        step_seconds,
        normalization: prepared.normalization,
        clamped: prepared.clamped,
        dropped_short: prepared.dropped_short,
        train,
        validation,
        test,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write_atomic(&args.out.join("manifest.json"), &json)?;
    println!(
        "prepared {} train / {} validation / {} test segments in {}",
        manifest.train.len(),
        manifest.validation.len(),
        manifest.test.len(),
        args.out.display()
    );
    Ok(())
}

/// Loads the manifest and the three splits of a prepared directory.
pub fn load_prepared(dir: &Path) -> Result<(Manifest, crate::data::DatasetSplit)> {
    let path = dir.join("manifest.json");
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_slice(&bytes)?;
    let load = |files: &[String]| -> Result<Vec<TimeSeriesFrame>> {
        let mut out = Vec::new();
        for f in files {
            let frames = ingest_csv(&dir.join(f), &manifest.schema)?;
            if frames.len() != 1 {
                return Err(Error::Data(format!(
                    "{f} holds {} contiguous runs, expected 1",
                    frames.len()
                )));
            }
            out.extend(frames);
        }
        Ok(out)
    };
    let split = crate::data::DatasetSplit {
        train: load(&manifest.train)?,
        validation: load(&manifest.validation)?,
        test: load(&manifest.test)?,
        seed: manifest.seed,
    };
    Ok((manifest, split))
}

pub fn cmd_compress(args: &CompressArgs) -> Result<()> {
    let schema = schema_or_default(&args.schema)?;
    let mut frames = Vec::new();
    for f in ingest_csv(&args.input, &schema)? {
        frames.extend(interpolate_gaps(&f, crate::data::DEFAULT_MAX_GAP_MINUTES)?);
    }
    if frames.len() != 1 {
        return Err(Error::Data(format!(
            "input holds {} contiguous runs; compress one run per file",
            frames.len()
        )));
    }
    let frame = &frames[0];
    let bundle = compress_frame(frame, args.wavelet, args.rate)?;
    let bytes = serialize_bundle(&bundle)?;
    write_atomic(&args.out, &bytes)?;
    let codec = Brotli::default();
    let raw = raw_bytes(frame);
    let lossless = measure_lossless(&raw, &codec);
    let lossy = measure_lossless(&bytes, &codec);
    for v in &bundle.variables {
        println!(
            "{}: achieved rate {:.6} ({} of {} coefficients kept)",
            v.name,
            v.signal.achieved_rate(),
            v.signal.kept.len(),
            v.signal.total_coefficients()
        );
    }
    let show = |o: Option<usize>| o.map_or("unavailable".to_string(), |b| b.to_string());
    println!(
        "bytes: raw {} | raw+brotli {} | bundle {} | bundle+brotli {}",
        raw.len(),
        show(lossless.bytes_compressed),
        bytes.len(),
        show(lossy.bytes_compressed)
    );
    Ok(())
}

fn parse_start(s: &str) -> Result<i64> {
    if let Ok(v) = s.trim().parse::<i64>() {
        return Ok(v);
    }
    chrono::DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.timestamp())
        .map_err(|_| Error::Config(format!("cannot parse start time `{s}`")))
}

pub fn cmd_decompress(args: &DecompressArgs) -> Result<()> {
    let bytes = fs::read(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let bundle = deserialize_bundle(&bytes)?;
    if args.step <= 0 {
        return Err(Error::Config("--step must be positive".into()));
    }
    let frame = decompress_frame(&bundle, parse_start(&args.start)?, args.step)?;
    write_csv(&frame, &args.out)?;
    println!(
        "wrote {} samples of {} variables to {}",
        frame.len(),
        frame.variable_count(),
        args.out.display()
    );
    Ok(())
}

fn minutes_to_samples(minutes: i64, step_seconds: i64, what: &str) -> Result<usize> {
    let secs = minutes * 60;
    if minutes <= 0 || secs % step_seconds != 0 {
        return Err(Error::Config(format!(
            "{what} of {minutes} min is not a positive multiple of the {step_seconds} s sampling step"
        )));
    }
    Ok((secs / step_seconds) as usize)
}

/// Builds the grid configuration from flags and the data's sampling step.
pub fn grid_config(args: &RunArgs, step_seconds: i64) -> Result<GridConfig> {
    let p = minutes_to_samples(args.context_minutes, step_seconds, "context")?;
    let h = minutes_to_samples(args.chunk_minutes, step_seconds, "chunk")?;
    let r = minutes_to_samples(args.rollout_minutes, step_seconds, "rollout")?;
    let defaults = GridConfig::default();
    let config = GridConfig {
        wavelets: if args.wavelets.is_empty() {
            defaults.wavelets
        } else {
            args.wavelets.clone()
        },
        rates: if args.rates.is_empty() {
            defaults.rates
        } else {
            args.rates.clone()
        },
        models: if args.models.is_empty() {
            defaults.models
        } else {
            args.models.clone()
        },
        seed: args.seed.seed,
        lag_spec: LagSpec::new(p, h, r).thinned(args.lag_thin),
        train_stride: args.train_stride,
        gbt_row_stride: args.gbt_row_stride,
        eval_stride: minutes_to_samples(args.eval_stride_minutes, step_seconds, "evaluation stride")?,
        gbt: GbtParams {
            n_rounds: args.gbt_rounds,
            max_depth: args.gbt_depth,
            learning_rate: args.learning_rate,
            min_samples_leaf: args.min_leaf,
            early_stopping_rounds: args.early_stop,
        },
        ridge: args.ridge,
        past_fill: if args.oracle_past {
            PastFill::Oracle
        } else {
            PastFill::Persistence
        },
        early_stop: args.early_stop.is_some(),
        k: args.k,
    };
    config.validate()?;
    Ok(config)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let (manifest, split) = load_prepared(&args.data)?;
    let config = grid_config(args, manifest.step_seconds)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let partial = partial_path(&args.out.join("records.csv"));
    let mut file = fs::File::create(&partial).map_err(|e| Error::io(&partial, e))?;
    writeln!(file, "{}", RECORD_HEADER.join(",")).map_err(|e| Error::io(&partial, e))?;
    let sink = Mutex::new(
        OpenOptions::new()
            .append(true)
            .open(&partial)
            .map_err(|e| Error::io(&partial, e))?,
    );
    let jobs = args.jobs.unwrap_or_else(default_jobs);
    info!("running {} records on {jobs} workers", config.record_count());
    let records = run_grid_with(&config, &split, jobs, |r| {
        let mut w = csv::Writer::from_writer(Vec::new());
        if w.write_record(record_row(r)).is_ok() {
            if let Ok(line) = w.into_inner() {
                let mut f = sink.lock().unwrap_or_else(|p| p.into_inner());
                if let Err(e) = f.write_all(&line).and_then(|_| f.flush()) {
                    warn!("cannot append to {}: {e}", partial.display());
                }
            }
        }
    })?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    let report = Report::build(&config, records);
    write_report(&args.out, &report)?;
    println!(
        "{} records ({failed} failed) written to {}",
        report.records.len(),
        args.out.display()
    );
    Ok(())
}

/// `0` followed by `points - 1` logit-spaced rates between 0.01 and 0.999.
pub fn logit_rates(points: usize) -> Vec<f64> {
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let (lo, hi) = (logit(0.01), logit(0.999));
    let n = points.saturating_sub(1);
    let mut rates = vec![0.0];
    for i in 0..n {
        let t = if n == 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
        let z = lo + t * (hi - lo);
        rates.push(1.0 / (1.0 + (-z).exp()));
    }
    rates
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmiCurveReport {
    pub wavelet: Wavelet,
    pub points: Vec<NmiPoint>,
    pub pooled: Vec<NmiPoint>,
    pub fit: Option<crate::analysis::BetaFit>,
    pub elbow: Option<crate::analysis::ElbowResult>,
}

pub fn cmd_nmi(args: &NmiArgs) -> Result<()> {
    let (_, split) = load_prepared(&args.data)?;
    let wavelets = if args.wavelets.is_empty() {
        Wavelet::ALL.to_vec()
    } else {
        args.wavelets.clone()
    };
    if args.points < 4 {
        return Err(Error::Config("--points must be at least 4".into()));
    }
    let rates = logit_rates(args.points);
    let mut curves = Vec::new();
    for w in wavelets {
        let mut points = Vec::new();
        let mut pooled = Vec::new();
        for &rate in &rates {
            let (mean, pool) = target_nmi(&split.train, w, rate, args.k, args.seed.seed)?;
            points.push(NmiPoint { rate, nmi: mean });
            pooled.push(NmiPoint { rate, nmi: pool });
        }
        let fit = fit_beta_curve(&points)
            .map_err(|e| warn!("beta fit for {w} failed: {e}"))
            .ok();
        let interior: Vec<&NmiPoint> = points.iter().filter(|p| p.rate > 0.0).collect();
        let loss: Vec<f64> = interior.iter().map(|p| 1.0 - p.nmi).collect();
        let r: Vec<f64> = interior.iter().map(|p| p.rate).collect();
        let elbow = elbow(&r, &loss).map_err(|e| warn!("elbow for {w} failed: {e}")).ok();
        println!(
            "{w}: alpha {} beta {} recommended rate {}",
            fit.as_ref().map_or("-".into(), |f| format!("{:.4}", f.alpha)),
            fit.as_ref().map_or("-".into(), |f| format!("{:.4}", f.beta)),
            elbow.as_ref().map_or("-".into(), |e| e.recommended_rate.to_string())
        );
        curves.push(NmiCurveReport {
            wavelet: w,
            points,
            pooled,
            fit,
            elbow,
        });
    }
    let mut csv_out = csv::Writer::from_writer(Vec::new());
    csv_out.write_record(["wavelet", "rate", "nmi", "nmi_pooled"])?;
    for c in &curves {
        for (p, q) in c.points.iter().zip(&c.pooled) {
            csv_out.write_record([
                c.wavelet.to_string(),
                p.rate.to_string(),
                p.nmi.to_string(),
                q.nmi.to_string(),
            ])?;
        }
    }
    let bytes = csv_out
        .into_inner()
        .map_err(|e| Error::io(&args.out, std::io::Error::other(e.to_string())))?;
    write_atomic(&args.out.join("nmi_curves.csv"), &bytes)?;
    let mut fits = csv::Writer::from_writer(Vec::new());
    fits.write_record([
        "wavelet",
        "alpha",
        "beta",
        "sse",
        "converged",
        "recommended_rate",
        "flat",
    ])?;
    for c in &curves {
        let f = c.fit.as_ref();
        let e = c.elbow.as_ref();
        fits.write_record([
            c.wavelet.to_string(),
            f.map_or(String::new(), |f| f.alpha.to_string()),
            f.map_or(String::new(), |f| f.beta.to_string()),
            f.map_or(String::new(), |f| f.sse.to_string()),
            f.map_or(String::new(), |f| f.converged.to_string()),
            e.map_or(String::new(), |e| e.recommended_rate.to_string()),
            e.map_or(String::new(), |e| e.flat.to_string()),
        ])?;
    }
    let bytes = fits
        .into_inner()
        .map_err(|e| Error::io(&args.out, std::io::Error::other(e.to_string())))?;
    write_atomic(&args.out.join("nmi_fits.csv"), &bytes)?;
    let mut json = serde_json::to_vec_pretty(&curves)?;
    json.push(b'\n');
    write_atomic(&args.out.join("nmi_report.json"), &json)?;
    Ok(())
}
