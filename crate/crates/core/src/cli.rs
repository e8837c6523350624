//! `oilcast` command-line front end.
//!
//! Every subcommand writes a plot-ready CSV:
//!
//! | subcommand | output                                   |
//! |------------|------------------------------------------|
//! | `describe` | `date,price` series (optionally monthly) |
//! | `gbm`      | `step,path_0,...,path_{n-1},mean`        |
//! | `train`    | checkpoint + `epoch,train_loss,val_loss,lr` |
//! | `evaluate` | `set,mae,rmse`                           |
//! | `forecast` | `step,predicted`                         |
//! | `export`   | `step,actual,predicted` over the test set |
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric divergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::gbm::{estimate_gbm, simulate_paths, DEFAULT_DT, DEFAULT_NUM_PATHS};
use crate::pipeline::{forecast_csv, latest_window, predictions_csv, prepare_series, prediction_table, PreparedData};
use crate::series::{log_transform, parse_price_csv, resample_monthly, slice_date_range, write_series_csv, PriceSeries};
use crate::train::{
    denormalize, evaluate, fit, load_checkpoint, persistence_baseline, save_checkpoint, Checkpoint, Metrics, ScalerFit,
    TrainConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Result of one invocation. `stdout` carries reports; `messages` are
/// diagnostics for stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub messages: Vec<String>,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        Self { exit_code: EXIT_OK, stdout, messages: Vec::new() }
    }

    fn failure(exit_code: i32, message: String) -> Self {
        Self { exit_code, stdout: String::new(), messages: vec![message] }
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Config(_) => EXIT_USAGE,
        Error::Divergence { .. } => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

#[derive(Debug, Parser)]
#[command(name = "oilcast", version, about = "Crude oil price forecasting with a stacked LSTM and a GBM baseline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Export the (optionally sliced, resampled or log-transformed) price series.
    /// Values are written raw unless --log is given.
    Describe(DescribeArgs),
    /// Calibrate geometric Brownian motion and simulate price paths.
    Gbm(GbmArgs),
    /// Train the LSTM, write a checkpoint and the per-epoch loss log.
    /// Prices are log-transformed unless --no-log is given.
    Train(TrainArgs),
    /// MAE/RMSE of a checkpoint on the training and test windows.
    Evaluate(ModelArgs),
    /// Recursive multi-step forecast from the end of the series.
    Forecast(ForecastArgs),
    /// Actual vs predicted prices over the test set.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct SeriesArgs {
    /// Input CSV with header `date,price`.
    #[arg(long)]
    input: PathBuf,
    /// First date to keep (YYYY-MM-DD).
    #[arg(long)]
    start: Option<NaiveDate>,
    /// Last date to keep (YYYY-MM-DD).
    #[arg(long)]
    end: Option<NaiveDate>,
    /// Resample to monthly means before anything else.
    #[arg(long)]
    monthly: bool,
}

#[derive(Debug, Args)]
struct LogArgs {
    /// Apply the natural-log transform.
    #[arg(long, overrides_with = "no_log")]
    log: bool,
    /// Do not apply the log transform.
    #[arg(long, overrides_with = "log")]
    no_log: bool,
}

impl LogArgs {
    fn resolve(&self, default: bool) -> bool {
        if self.log {
            true
        } else if self.no_log {
            false
        } else {
            default
        }
    }
}

#[derive(Debug, Args)]
struct DescribeArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[command(flatten)]
    log: LogArgs,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GbmArgs {
    #[command(flatten)]
    series: SeriesArgs,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Number of simulated paths.
    #[arg(long, default_value_t = DEFAULT_NUM_PATHS)]
    paths: usize,
    /// Steps to simulate.
    #[arg(long, default_value_t = 60)]
    horizon: usize,
    /// Step length in years.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[command(flatten)]
    log: LogArgs,
    /// Checkpoint file to write.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Per-epoch loss log CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 90)]
    window: usize,
    /// Units per LSTM layer, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "60,60,60")]
    layers: Vec<usize>,
    #[arg(long, default_value_t = 0.2)]
    dropout: f64,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Non-improving epochs before the learning rate is reduced.
    #[arg(long, default_value_t = 3)]
    patience: usize,
    /// Learning-rate reduction factor.
    #[arg(long, default_value_t = 0.5)]
    factor: f64,
    #[arg(long, default_value_t = 1e-5)]
    min_lr: f64,
    /// Training fraction of the chronological split.
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    /// Hold out this trailing fraction of the training portion for
    /// validation; 0 validates on the test set.
    #[arg(long, default_value_t = 0.0)]
    val_split: f64,
    /// Fit the scaler on `train` or on the `full` series.
    #[arg(long, default_value = "train", value_parser = ["train", "full"])]
    fit_scope: String,
    /// Clip the global gradient norm.
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[command(flatten)]
    series: SeriesArgs,
    /// Checkpoint written by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Metrics CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ForecastArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Days to forecast.
    #[arg(long, default_value_t = 5)]
    horizon: usize,
    /// Forecast CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Predictions CSV.
    #[arg(long)]
    out: PathBuf,
}

/// Parse `argv` (including the program name) and run the subcommand.
pub fn run<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandOutcome::ok(text),
                _ => CommandOutcome::failure(EXIT_USAGE, text),
            };
        }
    };

    let result = match cli.command {
        Command::Describe(a) => describe(a),
        Command::Gbm(a) => gbm(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Forecast(a) => forecast(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(stdout) => CommandOutcome::ok(stdout),
        Err(e) => {
            let code = exit_code_for(&e);
            let mut msg = format!("error: {e}");
            if code == EXIT_USAGE {
                msg.push_str("\n\n");
                msg.push_str(&Cli::command().render_usage().to_string());
            }
            CommandOutcome::failure(code, msg)
        }
    }
}

fn load_series(args: &SeriesArgs) -> Result<PriceSeries> {
    let text = std::fs::read_to_string(&args.input)?;
    let mut series = parse_price_csv(&text)?;
    if args.start.is_some() || args.end.is_some() {
        let start = args.start.unwrap_or(NaiveDate::MIN);
        let end = args.end.unwrap_or(NaiveDate::MAX);
        series = slice_date_range(&series, start, end)?;
    }
    if args.monthly {
        series = resample_monthly(&series);
    }
    Ok(series)
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display())))
    })
}

fn describe(a: DescribeArgs) -> Result<String> {
    let mut series = load_series(&a.series)?;
    if a.log.resolve(false) {
        series = log_transform(&series, false)?;
    }
    write_output(&a.out, &write_series_csv(&series))?;
    let values = series.values();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "{} observations {}..{} min {lo:.4} max {hi:.4} mean {mean:.4}\n",
        series.len(),
        series.first_date(),
        series.last_date()
    ))
}

fn gbm(a: GbmArgs) -> Result<String> {
    let series = load_series(&a.series)?;
    let model = estimate_gbm(&series, a.dt)?;
    let paths = simulate_paths(&model, a.horizon, a.paths, a.seed)?;
    write_output(&a.out, &paths.to_csv())?;
    Ok(format!(
        "mu {} sigma {} s0 {} dt {} paths {} horizon {}\n",
        model.mu, model.sigma, model.s0, model.dt, a.paths, a.horizon
    ))
}

fn train_config(a: &TrainArgs) -> TrainConfig {
    TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch,
        learning_rate: a.lr,
        plateau_factor: a.factor,
        plateau_patience: a.patience,
        min_learning_rate: a.min_lr,
        window_len: a.window,
        layer_sizes: a.layers.clone(),
        dropout_rate: a.dropout,
        seed: a.seed,
        clip_norm: a.clip,
        train_fraction: a.split,
        validation_fraction: a.val_split,
        log_transform: a.log.resolve(true),
        scaler_fit: ScalerFit::parse(&a.fit_scope).unwrap_or(ScalerFit::Train),
        ..TrainConfig::default()
    }
}

fn metrics_line(out: &mut String, name: &str, m: &Metrics) {
    let _ = writeln!(out, "{name} mae {:.6} rmse {:.6}", m.mae, m.rmse);
}

fn train(a: TrainArgs) -> Result<String> {
    let config = train_config(&a);
    config.validate()?;
    let series = load_series(&a.series)?;
    let data = prepare_series(&series, &config, None)?;
    let outcome = fit(&data.train, &data.validation, &config)?;

    std::fs::write(&a.checkpoint, save_checkpoint(&outcome.model, &data.scaler, &config))?;
    if let Some(out) = &a.out {
        write_output(out, &outcome.log.to_csv())?;
    }

    let mut report = String::new();
    for r in &outcome.log.records {
        let _ = writeln!(report, "epoch {} train_loss {:e} val_loss {:e} lr {:e}", r.epoch, r.train_loss, r.val_loss, r.lr);
    }
    metrics_line(&mut report, "train", &evaluate(&outcome.model, &data.train, &data.scaler, data.log_scale)?);
    metrics_line(&mut report, "test", &evaluate(&outcome.model, &data.test, &data.scaler, data.log_scale)?);
    Ok(report)
}

fn load_model(checkpoint: &Path, series: &SeriesArgs) -> Result<(Checkpoint, PreparedData)> {
    let bytes = std::fs::read(checkpoint)?;
    let ck = load_checkpoint(&bytes)?;
    let series = load_series(series)?;
    let data = prepare_series(&series, &ck.config, Some(ck.scaler))?;
    Ok((ck, data))
}

fn evaluate_cmd(a: ModelArgs) -> Result<String> {
    let (ck, data) = load_model(&a.checkpoint, &a.series)?;
    let train_m = evaluate(&ck.model, &data.train, &data.scaler, data.log_scale)?;
    let test_m = evaluate(&ck.model, &data.test, &data.scaler, data.log_scale)?;
    let naive = persistence_baseline(&data.test, &data.scaler, data.log_scale)?;

    let mut report = String::new();
    metrics_line(&mut report, "train", &train_m);
    metrics_line(&mut report, "test", &test_m);
    metrics_line(&mut report, "test_persistence", &naive);
    if let Some(out) = &a.out {
        let mut csv = String::from("set,mae,rmse\n");
        for (name, m) in [("train", train_m), ("test", test_m), ("test_persistence", naive)] {
            let _ = writeln!(csv, "{name},{},{}", m.mae, m.rmse);
        }
        write_output(out, &csv)?;
    }
    Ok(report)
}

fn forecast(a: ForecastArgs) -> Result<String> {
    let (ck, data) = load_model(&a.checkpoint, &a.series)?;
    let window = latest_window(&data, ck.model.window_len)?;
    let normalized = ck.model.forecast_recursive(&window, a.horizon)?;
    let prices = denormalize(&normalized, &data.scaler, data.log_scale);
    let csv = forecast_csv(&prices);
    if let Some(out) = &a.out {
        write_output(out, &csv)?;
    }
    Ok(csv)
}

fn export(a: ExportArgs) -> Result<String> {
    let (ck, data) = load_model(&a.checkpoint, &a.series)?;
    let rows = prediction_table(&ck.model, &data.test, &data.scaler, data.log_scale)?;
    write_output(&a.out, &predictions_csv(&rows))?;
    Ok(format!("{} test predictions written to {}\n", rows.len(), a.out.display()))
}
