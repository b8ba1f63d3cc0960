//! Command-line entry point: synthesize datasets, train and evaluate the
//! classifier, run the live sweep harness, and benchmark latency.
//!
//! Configuration resolves in three layers — defaults, then an optional JSON
//! config file (`--config`), then explicit flags — and every subcommand
//! echoes its fully resolved configuration to `<primary-output>.run.json`.
//! Exit codes: 0 success, 1 usage/validation error, 2 I/O error.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use deepsweep::bench::{
    measure_latency, realtime_report, write_bench_csv, write_realtime_csv, BenchRow, RealtimeReport,
};
use deepsweep::config::RunConfig;
use deepsweep::dataset::{build_dataset, load_dataset, DatasetSpec};
use deepsweep::nn::{load_weights, save_weights, ModelConfig};
use deepsweep::pipeline::{report_csv_header, SweepConfig};
use deepsweep::stream::{captures_for_duration, run_stream, Pacing, StreamConfig, StreamSource};
use deepsweep::train::{
    evaluate, split_dataset, train, write_confusion_csv, write_history_csv, ClassMetrics,
    SplitFractions, TrainConfig,
};
use deepsweep::{Error, Result};

#[derive(Parser)]
#[command(
    name = "deepsweep",
    version,
    about = "Wideband interference localization: synthesize, train, evaluate, stream, benchmark"
)]
struct Cli {
    /// JSON config file; explicit flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a labeled spectrum dataset.
    Gen(GenArgs),
    /// Train the chunk classifier on a dataset.
    Train(TrainArgs),
    /// Evaluate trained weights on a dataset split.
    Eval(EvalArgs),
    /// Run the streaming sweep harness and emit sensing reports.
    Sweep(SweepArgs),
    /// Measure inference and sweep latency against the capture budget.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Records to synthesize (default 20000).
    #[arg(long)]
    n_records: Option<usize>,
    /// Sweep FFT size (default 256).
    #[arg(long)]
    n_fft: Option<usize>,
    /// Number of chunks the band is split into (1, 2, 4, or 8).
    #[arg(long)]
    g: Option<usize>,
    /// Lower edge of the per-record SNR range (dB).
    #[arg(long)]
    snr_min: Option<f64>,
    /// Upper edge of the per-record SNR range (dB).
    #[arg(long)]
    snr_max: Option<f64>,
    /// Lower edge of the jammer power range (dB rel. a subcarrier).
    #[arg(long)]
    power_min: Option<f64>,
    /// Upper edge of the jammer power range (dB rel. a subcarrier).
    #[arg(long)]
    power_max: Option<f64>,
    /// Dataset preset: `chunk8` (one monitored chunk) or `fullband8`.
    #[arg(long)]
    preset: Option<String>,
    /// Base seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Output dataset path (default dataset.bin).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset to train on (default dataset.bin).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Expected chunk width in bins; verified against the dataset.
    #[arg(long)]
    chunk_bins: Option<usize>,
    /// Adam learning rate (default 0.01; 0 freezes the initialization).
    #[arg(long)]
    lr: Option<f32>,
    /// Maximum training epochs (default 100).
    #[arg(long)]
    epochs: Option<usize>,
    /// Early-stopping patience in epochs (default 5).
    #[arg(long)]
    patience: Option<usize>,
    /// Mini-batch size (default 64).
    #[arg(long)]
    batch_size: Option<usize>,
    /// Base seed for init, shuffles, and dropout.
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the trained weights (default weights.json).
    #[arg(long)]
    out_weights: Option<PathBuf>,
    /// Where to write the per-epoch history CSV (default history.csv).
    #[arg(long)]
    history_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Weight file to evaluate (default weights.json).
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Dataset to evaluate on (default dataset.bin).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Which day-split to score: train, val, test, or all (default test).
    #[arg(long)]
    split: Option<String>,
    /// Where to write the confusion matrix (default confusion.csv).
    #[arg(long)]
    confusion_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Weight file for the chunk classifier (default weights.json).
    #[arg(long)]
    weights: Option<PathBuf>,
    /// How long to stream, in capture time (default 1.0 s).
    #[arg(long)]
    duration_s: Option<f64>,
    /// Number of chunks; must match the model's input width.
    #[arg(long)]
    g: Option<usize>,
    /// Sample source: `synthetic` or `file` (default synthetic).
    #[arg(long)]
    source: Option<String>,
    /// Raw I/Q file (little-endian f32 pairs) when --source file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Jammed subcarrier for the synthetic source (omit for clean air).
    #[arg(long)]
    jam_subcarrier: Option<i32>,
    /// Synthetic-source SNR in dB (default 20).
    #[arg(long)]
    snr_db: Option<f64>,
    /// Synthetic jammer power in dB rel. a subcarrier (default 10).
    #[arg(long)]
    power_db_rel: Option<f64>,
    /// Produce captures as fast as possible instead of in real time.
    #[arg(long)]
    max_rate: bool,
    /// Artificial minimum sensing service time per capture (µs).
    #[arg(long)]
    sense_min_service_us: Option<u64>,
    /// Base seed for the synthetic source.
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the sensing-report stream (default reports.csv).
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Where to write the run statistics JSON (default stream_stats.json).
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Optional trained weights to time as an extra bench.csv row.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Optional baseline weights to time as an extra bench.csv row.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Timed repetitions per measurement (default 1000).
    #[arg(long)]
    reps: Option<usize>,
    /// Seed for the fixed random measurement inputs.
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write per-model latency lines (default bench.csv).
    #[arg(long)]
    bench_out: Option<PathBuf>,
    /// Where to write the real-time summary JSON (default bench_summary.json).
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 2,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let env_seed = std::env::var("DEEPSWEEP_SEED").ok();
    match cli.command {
        Command::Gen(args) => cmd_gen(base.overlaid(args.overlay()), env_seed.as_deref()),
        Command::Train(args) => cmd_train(base.overlaid(args.overlay()), env_seed.as_deref()),
        Command::Eval(args) => cmd_eval(base.overlaid(args.overlay())),
        Command::Sweep(args) => cmd_sweep(base.overlaid(args.overlay()), env_seed.as_deref()),
        Command::Bench(args) => cmd_bench(base.overlaid(args.overlay()), env_seed.as_deref()),
    }
}

impl GenArgs {
    fn overlay(self) -> RunConfig {
        RunConfig {
            n_records: self.n_records,
            n_fft: self.n_fft,
            g: self.g,
            snr_min: self.snr_min,
            snr_max: self.snr_max,
            power_min: self.power_min,
            power_max: self.power_max,
            preset: self.preset,
            seed: self.seed,
            out: self.out,
            ..RunConfig::default()
        }
    }
}

impl TrainArgs {
    fn overlay(self) -> RunConfig {
        RunConfig {
            dataset: self.dataset,
            chunk_bins: self.chunk_bins,
            lr: self.lr,
            epochs: self.epochs,
            patience: self.patience,
            batch_size: self.batch_size,
            seed: self.seed,
            out_weights: self.out_weights,
            history_out: self.history_out,
            ..RunConfig::default()
        }
    }
}

impl EvalArgs {
    fn overlay(self) -> RunConfig {
        RunConfig {
            weights: self.weights,
            dataset: self.dataset,
            split: self.split,
            confusion_out: self.confusion_out,
            ..RunConfig::default()
        }
    }
}

impl SweepArgs {
    fn overlay(self) -> RunConfig {
        RunConfig {
            weights: self.weights,
            duration_s: self.duration_s,
            g: self.g,
            source: self.source,
            file: self.file,
            jam_subcarrier: self.jam_subcarrier,
            snr_db: self.snr_db,
            power_db_rel: self.power_db_rel,
            max_rate: if self.max_rate { Some(true) } else { None },
            sense_min_service_us: self.sense_min_service_us,
            seed: self.seed,
            report_out: self.report_out,
            stats_out: self.stats_out,
            ..RunConfig::default()
        }
    }
}

impl BenchArgs {
    fn overlay(self) -> RunConfig {
        RunConfig {
            weights: self.weights,
            baseline: self.baseline,
            reps: self.reps,
            seed: self.seed,
            bench_out: self.bench_out,
            summary_out: self.summary_out,
            ..RunConfig::default()
        }
    }
}

/// Print a line to stdout. A closed pipe (`deepsweep ... | head`) is not an
/// error: the requested files are already written, so finish quietly instead
/// of panicking the way `println!` would.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out
        .write_all(text.as_bytes())
        .and_then(|()| out.write_all(b"\n"))
    {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Error::Io(e)),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::format(format!("could not render JSON output: {e}")))?;
    emit(&text)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::format(format!("could not write {}: {e}", path.display())))?;
    w.flush()?;
    Ok(())
}

fn cmd_gen(cfg: RunConfig, env_seed: Option<&str>) -> Result<()> {
    let seed = cfg.resolve_seed(env_seed)?;
    let preset = cfg.preset.clone().unwrap_or_else(|| "chunk8".to_string());
    let mut spec = match preset.as_str() {
        "chunk8" => DatasetSpec::chunk8(seed),
        "fullband8" => DatasetSpec::fullband8(seed),
        other => {
            return Err(Error::config(format!(
                "unknown preset `{other}` (expected `chunk8` or `fullband8`)"
            )))
        }
    };
    if let Some(n_fft) = cfg.n_fft {
        spec.n_fft = n_fft;
    }
    if let Some(g) = cfg.g {
        spec.g = g;
        // A monitored-chunk preset keeps watching the chunk that holds its
        // candidate subcarriers, whatever the chunk geometry.
        if spec.monitored_chunk.is_some() {
            spec.monitored_chunk = Some(spec.chunk_of(spec.candidate_set[0]));
        }
    }
    if let Some(lo) = cfg.snr_min {
        spec.snr_db.0 = lo;
    }
    if let Some(hi) = cfg.snr_max {
        spec.snr_db.1 = hi;
    }
    if let Some(lo) = cfg.power_min {
        spec.power_db_rel.0 = lo;
    }
    if let Some(hi) = cfg.power_max {
        spec.power_db_rel.1 = hi;
    }
    spec.validate()?;
    let n_records = cfg.n_records.unwrap_or(20_000);
    if n_records == 0 {
        return Err(Error::config("--n-records must be positive"));
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("dataset.bin"));

    let resolved = RunConfig {
        preset: Some(preset.clone()),
        n_records: Some(n_records),
        n_fft: Some(spec.n_fft),
        g: Some(spec.g),
        snr_min: Some(spec.snr_db.0),
        snr_max: Some(spec.snr_db.1),
        power_min: Some(spec.power_db_rel.0),
        power_max: Some(spec.power_db_rel.1),
        seed: Some(seed),
        out: Some(out.clone()),
        ..RunConfig::default()
    };
    resolved.write_sidecar(&out)?;
    let summary = build_dataset(&spec, n_records, &out, &preset)?;
    print_json(&summary)
}

#[derive(Serialize)]
struct TrainSummary {
    dataset: PathBuf,
    records: usize,
    epochs_run: usize,
    best_epoch: usize,
    stopped_early: bool,
    best_val_loss: f64,
    best_val_acc: f64,
    weights_out: PathBuf,
    history_out: PathBuf,
}

fn cmd_train(cfg: RunConfig, env_seed: Option<&str>) -> Result<()> {
    let seed = cfg.resolve_seed(env_seed)?;
    let dataset_path = cfg.dataset.clone().unwrap_or_else(|| PathBuf::from("dataset.bin"));
    let out_weights = cfg
        .out_weights
        .clone()
        .unwrap_or_else(|| PathBuf::from("weights.json"));
    let history_out = cfg
        .history_out
        .clone()
        .unwrap_or_else(|| PathBuf::from("history.csv"));
    let train_cfg = TrainConfig {
        learning_rate: cfg.lr.unwrap_or(0.01),
        batch_size: cfg.batch_size.unwrap_or(64),
        max_epochs: cfg.epochs.unwrap_or(100),
        patience: cfg.patience.unwrap_or(5),
        seed,
        split: SplitFractions::default(),
    };
    train_cfg.validate()?;
    let dataset = load_dataset(&dataset_path)?;
    if let Some(expected) = cfg.chunk_bins {
        if expected != dataset.header.chunk_len as usize {
            return Err(Error::config(format!(
                "--chunk-bins {expected} does not match the dataset's chunk width {}",
                dataset.header.chunk_len
            )));
        }
    }

    let resolved = RunConfig {
        dataset: Some(dataset_path.clone()),
        chunk_bins: Some(dataset.header.chunk_len as usize),
        lr: Some(train_cfg.learning_rate),
        epochs: Some(train_cfg.max_epochs),
        patience: Some(train_cfg.patience),
        batch_size: Some(train_cfg.batch_size),
        seed: Some(seed),
        out_weights: Some(out_weights.clone()),
        history_out: Some(history_out.clone()),
        ..RunConfig::default()
    };
    resolved.write_sidecar(&out_weights)?;

    let (model, history) = train(&dataset, &ModelConfig::default(), &train_cfg)?;
    save_weights(&model, &out_weights)?;
    write_history_csv(&history, &history_out)?;
    let best = history.epochs[history.best_epoch - 1];
    print_json(&TrainSummary {
        dataset: dataset_path,
        records: dataset.records.len(),
        epochs_run: history.epochs_run(),
        best_epoch: history.best_epoch,
        stopped_early: history.stopped_early,
        best_val_loss: best.val_loss,
        best_val_acc: best.val_acc,
        weights_out: out_weights,
        history_out,
    })
}

#[derive(Serialize)]
struct EvalSummary {
    weights: PathBuf,
    dataset: PathBuf,
    split: String,
    examples: usize,
    accuracy: f64,
    per_class: Vec<ClassMetrics>,
    confusion_out: PathBuf,
}

fn cmd_eval(cfg: RunConfig) -> Result<()> {
    let weights_path = cfg.weights.clone().unwrap_or_else(|| PathBuf::from("weights.json"));
    let dataset_path = cfg.dataset.clone().unwrap_or_else(|| PathBuf::from("dataset.bin"));
    let confusion_out = cfg
        .confusion_out
        .clone()
        .unwrap_or_else(|| PathBuf::from("confusion.csv"));
    let split = cfg.split.clone().unwrap_or_else(|| "test".to_string());

    let model = load_weights(&weights_path)?;
    let dataset = load_dataset(&dataset_path)?;
    if model.meta.input_len != dataset.header.chunk_len as usize {
        return Err(Error::config(format!(
            "model takes {}-bin inputs but the dataset has {}-bin records",
            model.meta.input_len, dataset.header.chunk_len
        )));
    }
    if model.meta.num_classes != dataset.header.num_classes as usize {
        return Err(Error::config(format!(
            "model has {} classes but the dataset has {}",
            model.meta.num_classes, dataset.header.num_classes
        )));
    }
    let indices: Vec<usize> = match split.as_str() {
        "all" => (0..dataset.records.len()).collect(),
        "train" | "val" | "test" => {
            let splits = split_dataset(&dataset, &SplitFractions::default())?;
            match split.as_str() {
                "train" => splits.train,
                "val" => splits.val,
                _ => splits.test,
            }
        }
        other => {
            return Err(Error::config(format!(
                "unknown split `{other}` (expected train, val, test, or all)"
            )))
        }
    };

    let resolved = RunConfig {
        weights: Some(weights_path.clone()),
        dataset: Some(dataset_path.clone()),
        split: Some(split.clone()),
        confusion_out: Some(confusion_out.clone()),
        ..RunConfig::default()
    };
    resolved.write_sidecar(&confusion_out)?;

    let report = evaluate(&model, &dataset.records, &indices)?;
    write_confusion_csv(&report, &confusion_out)?;
    print_json(&EvalSummary {
        weights: weights_path,
        dataset: dataset_path,
        split,
        examples: report.n_examples,
        accuracy: report.accuracy,
        per_class: report.per_class,
        confusion_out,
    })
}

fn cmd_sweep(cfg: RunConfig, env_seed: Option<&str>) -> Result<()> {
    let seed = cfg.resolve_seed(env_seed)?;
    let weights_path = cfg.weights.clone().unwrap_or_else(|| PathBuf::from("weights.json"));
    let report_out = cfg
        .report_out
        .clone()
        .unwrap_or_else(|| PathBuf::from("reports.csv"));
    let stats_out = cfg
        .stats_out
        .clone()
        .unwrap_or_else(|| PathBuf::from("stream_stats.json"));
    let duration_s = cfg.duration_s.unwrap_or(1.0);

    let model = load_weights(&weights_path)?;
    let n_fft = cfg.n_fft.unwrap_or(256);
    if n_fft % model.meta.input_len != 0 {
        return Err(Error::config(format!(
            "FFT size {n_fft} is not a multiple of the model's {}-bin input",
            model.meta.input_len
        )));
    }
    let g = n_fft / model.meta.input_len;
    if let Some(requested) = cfg.g {
        if requested != g {
            return Err(Error::config(format!(
                "--g {requested} implies {}-bin chunks but the model takes {} bins",
                n_fft / requested.max(1),
                model.meta.input_len
            )));
        }
    }
    let sweep = SweepConfig {
        n_fft,
        g,
        ..SweepConfig::default()
    };
    sweep.validate()?;

    let source_name = cfg.source.clone().unwrap_or_else(|| "synthetic".to_string());
    let source = match source_name.as_str() {
        "synthetic" => StreamSource::Synthetic {
            jam_subcarrier: cfg.jam_subcarrier,
            snr_db: cfg.snr_db.unwrap_or(20.0),
            power_db_rel: cfg.power_db_rel.unwrap_or(10.0),
        },
        "file" => StreamSource::File(cfg.file.clone().ok_or_else(|| {
            Error::config("--source file needs --file <path to raw f32 I/Q>")
        })?),
        other => {
            return Err(Error::config(format!(
                "unknown source `{other}` (expected `synthetic` or `file`)"
            )))
        }
    };
    let stream_cfg = StreamConfig {
        n_captures: captures_for_duration(duration_s, &sweep)?,
        sweep,
        pacing: if cfg.max_rate == Some(true) {
            Pacing::MaxRate
        } else {
            Pacing::Realtime
        },
        sense_min_service: cfg.sense_min_service_us.map(Duration::from_micros),
        seed,
        ..StreamConfig::default()
    };
    stream_cfg.validate()?;

    let resolved = RunConfig {
        weights: Some(weights_path),
        duration_s: Some(duration_s),
        g: Some(g),
        n_fft: Some(n_fft),
        source: Some(source_name),
        file: cfg.file.clone(),
        jam_subcarrier: cfg.jam_subcarrier,
        snr_db: cfg.snr_db.or(Some(20.0)),
        power_db_rel: cfg.power_db_rel.or(Some(10.0)),
        max_rate: Some(cfg.max_rate == Some(true)),
        sense_min_service_us: cfg.sense_min_service_us,
        seed: Some(seed),
        report_out: Some(report_out.clone()),
        stats_out: Some(stats_out.clone()),
        ..RunConfig::default()
    };
    resolved.write_sidecar(&stats_out)?;

    let mut report_writer = std::io::BufWriter::new(std::fs::File::create(&report_out)?);
    writeln!(report_writer, "{}", report_csv_header(g))?;
    let mut write_err: Option<std::io::Error> = None;
    let stats = run_stream(&stream_cfg, &source, Arc::new(model), |report| {
        if write_err.is_none() {
            if let Err(e) = writeln!(report_writer, "{}", report.to_csv_row()) {
                write_err = Some(e);
            }
        }
    })?;
    report_writer.flush()?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    write_json(&stats, &stats_out)?;
    print_json(&stats)
}

fn cmd_bench(cfg: RunConfig, env_seed: Option<&str>) -> Result<()> {
    let seed = cfg.resolve_seed(env_seed)?;
    let reps = cfg.reps.unwrap_or(1000);
    let bench_out = cfg.bench_out.clone().unwrap_or_else(|| PathBuf::from("bench.csv"));
    let summary_out = cfg
        .summary_out
        .clone()
        .unwrap_or_else(|| PathBuf::from("bench_summary.json"));
    if reps == 0 {
        return Err(Error::config("--reps must be positive"));
    }
    let mut extra_models = Vec::new();
    for (label, path) in [("weights", &cfg.weights), ("baseline", &cfg.baseline)] {
        if let Some(path) = path {
            extra_models.push((format!("{label}:{}", path.display()), load_weights(path)?));
        }
    }

    let resolved = RunConfig {
        weights: cfg.weights.clone(),
        baseline: cfg.baseline.clone(),
        reps: Some(reps),
        seed: Some(seed),
        bench_out: Some(bench_out.clone()),
        summary_out: Some(summary_out.clone()),
        ..RunConfig::default()
    };
    resolved.write_sidecar(&bench_out)?;

    let mut report: RealtimeReport = realtime_report(reps, seed)?;
    for (name, model) in &extra_models {
        let stats = measure_latency(model, 1, reps, seed)?;
        report.bench.push(BenchRow::from_stats(name.clone(), &stats));
    }
    write_bench_csv(&report.bench, &bench_out)?;
    write_realtime_csv(&report.rows, &bench_out.with_extension("realtime.csv"))?;
    write_json(&report, &summary_out)?;

    let mut table = format!(
        "{:>2} {:>5} {:>8} {:>11} {:>12} {:>13} {:>13} {:>8} {:>13} {:>13} {:>11} {:>7}",
        "G",
        "bins",
        "classes",
        "ref_params",
        "base_params",
        "chunk_p50_us",
        "base_p50_us",
        "speedup",
        "sweep_p50_us",
        "sweep_p95_us",
        "capture_us",
        "budget"
    );
    for r in &report.rows {
        table.push('\n');
        table.push_str(&format!(
            "{:>2} {:>5} {:>8} {:>11} {:>12} {:>13.2} {:>13.2} {:>8.2} {:>13.2} {:>13.2} {:>11.1} {:>7}",
            r.g,
            r.chunk_bins,
            r.num_classes,
            r.reference_params,
            r.baseline_params,
            r.chunk_p50_us,
            r.baseline_chunk_p50_us,
            r.speedup,
            r.sweep_p50_us,
            r.sweep_p95_us,
            r.capture_us,
            if r.meets_budget { "pass" } else { "FAIL" }
        ));
    }
    emit(&table)
}
