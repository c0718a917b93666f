//! `qnd`: simulate, calibrate, decode and benchmark repetitive spin readout.
//!
//! Every subcommand reads an optional strict JSON config; command-line flags
//! override values from the file, which override built-in defaults.

mod failure;
mod tables;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qnd_core::calibration::{default_grid, optimize_readout_time, CalibrationResult, CalibrationSettings};
use qnd_core::experiments::{
    fit_preparation_error, fit_t1, read_manifest, run_suite, write_suite, DecodeMode, FitResult, SuiteConfig,
};
use qnd_core::hmm::{decode_with_clamp, majority_vote, ObservationModel, Priors, QubitState, ReadoutRecord};
use qnd_core::sim::{extended_f64, io as trace_io, simulate_run, RunRecord, SimConfig};
use qnd_core::table::write_csv;

use failure::{Failure, Outcome};

#[derive(Parser)]
#[command(name = "qnd", version, about = "Repetitive QND spin readout: simulation, calibration and HMM decoding")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate labelled trace batches with ground truth.
    Simulate(SimulateArgs),
    /// Choose the readout time and build peak histograms from a labelled batch.
    Calibrate(CalibrateArgs),
    /// Infer initial states of readout records.
    Decode(DecodeArgs),
    /// Run an experiment suite and write figure datasets, curves and fits.
    Benchmark(BenchmarkArgs),
    /// Fit an exponential decay jointly to spin-up probabilities of both preparations.
    FitT1(FitT1Args),
    /// Fit the preparation error relating two tidy error curves.
    FitPrepError(FitPrepArgs),
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Outcome<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", p.display())))
        }
    }
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::data(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Outcome<String> {
    serde_json::to_string(value).map_err(|e| Failure::data(e.to_string()))
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
enum Preparation {
    One,
    Zero,
    #[default]
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateConfig {
    sim: SimConfig,
    /// Trials per prepared state.
    n_trials: usize,
    n_cycles: usize,
    prepared: Preparation,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            sim: SimConfig::default(),
            n_trials: 1000,
            n_cycles: 1,
            prepared: Preparation::Both,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trace batch; `.bin` selects the binary layout. Ground truth goes to `<stem>.truth.csv`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    prepared: Option<Preparation>,
}

fn simulate(args: SimulateArgs) -> Outcome<()> {
    let mut cfg: SimulateConfig = load_config(args.config.as_deref())?;
    cfg.n_trials = args.trials.unwrap_or(cfg.n_trials);
    cfg.n_cycles = args.cycles.unwrap_or(cfg.n_cycles);
    cfg.sim.master_seed = args.seed.unwrap_or(cfg.sim.master_seed);
    cfg.prepared = args.prepared.unwrap_or(cfg.prepared);
    cfg.sim.validate().map_err(Failure::config)?;
    if cfg.n_trials == 0 {
        return Err(Failure::config("n_trials must be >= 1"));
    }
    if cfg.n_cycles == 0 {
        return Err(Failure::config("n_cycles must be >= 1"));
    }

    // Trials of the second state continue the index range, so every trial has its own streams.
    let states: Vec<QubitState> = match cfg.prepared {
        Preparation::One => vec![QubitState::One],
        Preparation::Zero => vec![QubitState::Zero],
        Preparation::Both => vec![QubitState::One, QubitState::Zero],
    };
    let n = cfg.n_trials as u64;
    let jobs: Vec<(u64, QubitState)> = states
        .iter()
        .enumerate()
        .flat_map(|(k, &x0)| (0..n).map(move |t| (k as u64 * n + t, x0)))
        .collect();
    let runs: Vec<(u64, RunRecord)> = jobs
        .par_iter()
        .map(|&(trial, x0)| Ok((trial, simulate_run(x0, cfg.n_cycles, &cfg.sim, trial)?)))
        .collect::<qnd_core::Result<_>>()?;

    let config_json = to_json(&cfg)?;
    trace_io::write_traces(&args.out, &config_json, &runs)?;
    let truth = trace_io::truth_path(&args.out);
    trace_io::write_truth(&truth, &config_json, &runs)?;
    info!("wrote {} trials to {} and {}", runs.len(), args.out.display(), truth.display());
    Ok(())
}

// ---------------------------------------------------------------- calibrate

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CalibrateConfig {
    n_bins: usize,
    pseudo_count: f64,
    llr_clamp: f64,
    /// Readout-time candidates (s); every sample instant when absent.
    t_r_grid: Option<Vec<f64>>,
    /// Sample period (s); taken from the batch's embedded configuration when absent.
    dt_sample: Option<f64>,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        let s = CalibrationSettings::default();
        CalibrateConfig {
            n_bins: s.n_bins,
            pseudo_count: s.pseudo_count,
            llr_clamp: s.llr_clamp,
            t_r_grid: None,
            dt_sample: None,
        }
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trace batch written by `simulate`; labels come from its `.truth.csv`.
    #[arg(long)]
    traces: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Error rates at every grid point as CSV.
    #[arg(long)]
    sweep_out: Option<PathBuf>,
    /// Comma-separated readout times (s).
    #[arg(long, value_delimiter = ',')]
    t_r_grid: Option<Vec<f64>>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    pseudo_count: Option<f64>,
    #[arg(long)]
    dt_sample: Option<f64>,
}

/// Calibration file: the result plus the configuration that produced it.
#[derive(Serialize, Deserialize)]
struct CalibrationFile {
    config: serde_json::Value,
    result: CalibrationResult,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CalibrationInput {
    Wrapped(CalibrationFile),
    Bare(CalibrationResult),
}

fn read_calibration(path: &Path) -> Outcome<CalibrationResult> {
    let text = fs::read_to_string(path).map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))?;
    let result = match serde_json::from_str::<CalibrationInput>(&text) {
        Ok(CalibrationInput::Wrapped(f)) => f.result,
        Ok(CalibrationInput::Bare(r)) => r,
        Err(e) => return Err(Failure::data(format!("{}: not a calibration file: {e}", path.display()))),
    };
    result.validate().map_err(Failure::data)?;
    Ok(result)
}

fn calibrate(args: CalibrateArgs) -> Outcome<()> {
    let mut cfg: CalibrateConfig = load_config(args.config.as_deref())?;
    cfg.n_bins = args.bins.unwrap_or(cfg.n_bins);
    cfg.pseudo_count = args.pseudo_count.unwrap_or(cfg.pseudo_count);
    if args.t_r_grid.is_some() {
        cfg.t_r_grid = args.t_r_grid;
    }
    if args.dt_sample.is_some() {
        cfg.dt_sample = args.dt_sample;
    }
    let settings = CalibrationSettings {
        n_bins: cfg.n_bins,
        pseudo_count: cfg.pseudo_count,
        llr_clamp: cfg.llr_clamp,
    };
    settings.validate().map_err(Failure::config)?;

    let batch = trace_io::read_traces(&args.traces)?;
    let truth_path = trace_io::truth_path(&args.traces);
    if !truth_path.exists() {
        return Err(Failure::data(format!("missing labels: {} not found", truth_path.display())));
    }
    let truth = trace_io::read_truth(&truth_path)?;
    let dt = match cfg.dt_sample {
        Some(dt) => dt,
        None => {
            let embedded = batch
                .config
                .as_deref()
                .ok_or_else(|| Failure::config("batch has no embedded config; pass --dt-sample"))?;
            let value: serde_json::Value =
                serde_json::from_str(embedded).map_err(|e| Failure::data(format!("embedded config: {e}")))?;
            value
                .pointer("/sim/dt_sample")
                .and_then(|v| v.as_f64())
                .ok_or_else(|| Failure::data("embedded config lacks sim.dt_sample"))?
        }
    };
    cfg.dt_sample = Some(dt);

    // First-cycle traces labelled by the prepared state.
    let labels: std::collections::HashMap<u64, QubitState> =
        truth.iter().filter(|r| r.cycle == 0).map(|r| (r.trial, r.prepared_state)).collect();
    let (mut traces1, mut traces0) = (Vec::new(), Vec::new());
    for t in batch.traces.iter().filter(|t| t.cycle == 0) {
        match labels.get(&t.trial) {
            Some(QubitState::One) => traces1.push(t.to_trace(dt)),
            Some(QubitState::Zero) => traces0.push(t.to_trace(dt)),
            None => return Err(Failure::data(format!("missing label for trial {}", t.trial))),
        }
    }
    if traces1.is_empty() || traces0.is_empty() {
        return Err(Failure::data("missing labels: calibration needs traces of both prepared states"));
    }
    let n_samples = traces1.iter().chain(&traces0).map(|t| t.samples.len()).min().unwrap_or(0);
    let grid = cfg.t_r_grid.clone().unwrap_or_else(|| default_grid(dt, n_samples));
    let calibration = optimize_readout_time(&traces1, &traces0, &grid, &settings)?;

    let config_value = serde_json::json!({ "calibrate": cfg, "traces": batch.config.as_deref().and_then(|c| serde_json::from_str::<serde_json::Value>(c).ok()) });
    write_json_file(
        &args.out,
        &CalibrationFile {
            config: config_value.clone(),
            result: calibration.result.clone(),
        },
    )?;
    if let Some(path) = &args.sweep_out {
        write_csv(path, &to_json(&config_value)?, &calibration.sweep)?;
    }
    info!(
        "t_r = {:.3e} s, eps1 = {:.4}, eps0 = {:.4}",
        calibration.result.t_r_opt, calibration.result.eps1, calibration.result.eps0
    );
    Ok(())
}

// ---------------------------------------------------------------- decode

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DecodeConfig {
    mode: DecodeMode,
    #[serde(with = "extended_f64")]
    t1_logical: f64,
    /// Prior probability of |1>; |0> gets the rest.
    prior_one: f64,
    /// Binary error rates for hard decoding; the calibration's are used when absent.
    eps1: Option<f64>,
    eps0: Option<f64>,
    llr_clamp: Option<f64>,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            mode: DecodeMode::Soft,
            t1_logical: SimConfig::default().t1_logical,
            prior_one: 0.5,
            eps1: None,
            eps0: None,
            llr_clamp: None,
        }
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON array of readout records.
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long)]
    mode: Option<DecodeMode>,
    /// Logical relaxation time (s); `inf` disables relaxation.
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    prior_one: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum DecodedRecord {
    Filter {
        lambda_log: f64,
        decision: QubitState,
        per_cycle_lambda: Vec<f64>,
    },
    Vote {
        decision: QubitState,
        /// Ones minus zeros.
        vote_margin: i64,
        per_cycle_decision: Vec<QubitState>,
    },
}

fn decode_records(args: DecodeArgs) -> Outcome<()> {
    let mut cfg: DecodeConfig = load_config(args.config.as_deref())?;
    cfg.mode = args.mode.unwrap_or(cfg.mode);
    if args.t1.is_some() && cfg.mode == DecodeMode::Majority {
        warn!("majority mode ignores --t1");
    }
    cfg.t1_logical = args.t1.unwrap_or(cfg.t1_logical);
    cfg.prior_one = args.prior_one.unwrap_or(cfg.prior_one);
    cfg.eps1 = args.eps1.or(cfg.eps1);
    cfg.eps0 = args.eps0.or(cfg.eps0);
    if !(cfg.t1_logical > 0.0) {
        return Err(Failure::config("t1 must be > 0"));
    }
    let priors = Priors::new(cfg.prior_one, 1.0 - cfg.prior_one).map_err(Failure::config)?;

    let text = fs::read_to_string(&args.records)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", args.records.display())))?;
    let records: Vec<ReadoutRecord> = if text.trim().is_empty() {
        Vec::new()
    } else {
        serde_json::from_str(&text).map_err(|e| Failure::data(format!("{}: {e}", args.records.display())))?
    };
    let calibration = args.calibration.as_deref().map(read_calibration).transpose()?;

    let model = match cfg.mode {
        DecodeMode::Soft => Some(
            calibration
                .as_ref()
                .ok_or_else(|| Failure::config("soft decoding needs --calibration"))?
                .observation_model()?,
        ),
        DecodeMode::Hard => Some(match (cfg.eps1, cfg.eps0, &calibration) {
            (Some(e1), Some(e0), _) => ObservationModel::binary(e1, e0).map_err(Failure::config)?,
            (None, None, Some(c)) => c.binary_model()?,
            (None, None, None) => return Err(Failure::config("hard decoding needs --calibration or --eps1/--eps0")),
            _ => return Err(Failure::config("give both --eps1 and --eps0")),
        }),
        DecodeMode::Majority => None,
    };
    let expected_kind = if cfg.mode == DecodeMode::Soft { "peak" } else { "binary" };
    let clamp = cfg
        .llr_clamp
        .or(calibration.as_ref().map(|c| c.llr_clamp))
        .unwrap_or(qnd_core::hmm::DEFAULT_LLR_CLAMP);

    let results: Vec<DecodedRecord> = records
        .par_iter()
        .map(|record| -> qnd_core::Result<DecodedRecord> {
            if record.observations.kind() != expected_kind {
                return Err(qnd_core::Error::KindMismatch {
                    expected: expected_kind,
                    found: record.observations.kind(),
                });
            }
            match &model {
                Some(m) => {
                    let r = decode_with_clamp(record, m, cfg.t1_logical, priors, clamp)?;
                    Ok(DecodedRecord::Filter {
                        lambda_log: r.lambda_log,
                        decision: r.decision,
                        per_cycle_lambda: r.per_cycle_lambda,
                    })
                }
                None => {
                    let bits: Vec<QubitState> = record
                        .observations
                        .iter()
                        .map(|o| match o {
                            qnd_core::hmm::Observation::Binary(b) => b,
                            qnd_core::hmm::Observation::Peak(_) => unreachable!("kind checked"),
                        })
                        .collect();
                    let per_cycle_decision =
                        (1..=bits.len()).map(|n| majority_vote(&bits[..n])).collect::<qnd_core::Result<Vec<_>>>()?;
                    let ones = bits.iter().filter(|b| b.is_one()).count() as i64;
                    Ok(DecodedRecord::Vote {
                        decision: *per_cycle_decision.last().ok_or(qnd_core::Error::EmptyInput("empty record"))?,
                        vote_margin: 2 * ones - bits.len() as i64,
                        per_cycle_decision,
                    })
                }
            }
        })
        .collect::<qnd_core::Result<_>>()?;

    let output = serde_json::json!({ "config": cfg, "results": results });
    match &args.out {
        Some(path) => write_json_file(path, &output),
        None => {
            println!("{}", serde_json::to_string_pretty(&output).map_err(|e| Failure::data(e.to_string()))?);
            Ok(())
        }
    }
}

// ---------------------------------------------------------------- benchmark

#[derive(Clone, Copy, ValueEnum)]
enum SuitePreset {
    PaperDefaults,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Suite configuration (JSON).
    #[arg(long, conflicts_with_all = ["suite", "from_manifest"])]
    config: Option<PathBuf>,
    /// Built-in suite.
    #[arg(long, value_enum, conflicts_with = "from_manifest")]
    suite: Option<SuitePreset>,
    /// Rerun the configuration recorded in a previous manifest.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Write into a non-empty output directory.
    #[arg(long)]
    force: bool,
    /// Figure datasets only.
    #[arg(long)]
    plot_data: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn benchmark(args: BenchmarkArgs) -> Outcome<()> {
    let mut cfg = if let Some(path) = &args.from_manifest {
        read_manifest(path).map_err(Failure::config)?.config
    } else if let Some(SuitePreset::PaperDefaults) = args.suite {
        SuiteConfig::paper_defaults()
    } else {
        load_config::<SuiteConfig>(args.config.as_deref())?
    };
    if let Some(n) = args.trials {
        cfg.base.n_trials_per_state = n;
    }
    if let Some(seed) = args.seed {
        cfg.base.sim.master_seed = seed;
    }
    cfg.validate().map_err(Failure::config)?;

    if args.out_dir.exists() {
        let occupied = fs::read_dir(&args.out_dir)
            .map_err(|e| Failure::config(format!("{}: {e}", args.out_dir.display())))?
            .next()
            .is_some();
        if occupied && !args.force {
            return Err(Failure::config(format!(
                "{} is not empty; pass --force to overwrite",
                args.out_dir.display()
            )));
        }
    } else {
        fs::create_dir_all(&args.out_dir)
            .map_err(|e| Failure::data(format!("cannot create {}: {e}", args.out_dir.display())))?;
    }

    let out = run_suite(&cfg)?;
    let files = write_suite(&args.out_dir, &cfg, &out, args.plot_data)?;
    info!("wrote {} files to {}", files.len(), args.out_dir.display());
    let f = &out.fits;
    info!(
        "noise sigma {:.4}, preparation error {:.4} / {:.4}",
        f.noise.sigma, f.preparation_error.state1.parameters[0].value, f.preparation_error.state0.parameters[0].value
    );
    Ok(())
}

// ---------------------------------------------------------------- fits

#[derive(Args)]
struct FitT1Args {
    /// CSV with a time column and spin-up probability columns for both preparations.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "time_s")]
    time_col: String,
    #[arg(long, default_value = "single_prep1")]
    p1_col: String,
    #[arg(long, default_value = "single_prep0")]
    p0_col: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, value: &serde_json::Value) -> Outcome<()> {
    match out {
        Some(path) => write_json_file(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).map_err(|e| Failure::data(e.to_string()))?);
            Ok(())
        }
    }
}

fn fit_t1_command(args: FitT1Args) -> Outcome<()> {
    let table = tables::read_columns(&args.input)?;
    let times = table.numeric(&args.time_col)?;
    let p1 = table.numeric(&args.p1_col)?;
    let p0 = table.numeric(&args.p0_col)?;
    let fit = fit_t1(&times, &p1, &p0).map_err(Failure::from_fit_input)?;
    let config = serde_json::json!({
        "time_col": args.time_col, "p1_col": args.p1_col, "p0_col": args.p0_col, "source_config": table.config,
    });
    emit(args.out.as_deref(), &serde_json::json!({ "config": config, "fit": fit }))
}

#[derive(Args)]
struct FitPrepArgs {
    /// Tidy error curve (mode, prepared_state, N, eps, stderr) with preparation errors.
    #[arg(long)]
    experiment: PathBuf,
    /// Tidy error curve of the same setup with perfect preparation.
    #[arg(long)]
    simulated: PathBuf,
    #[arg(long, default_value = "hard")]
    mode: DecodeMode,
    /// Row filter on a `run` column, applied to both files when present.
    #[arg(long)]
    experiment_run: Option<String>,
    #[arg(long)]
    simulated_run: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fit_prep_command(args: FitPrepArgs) -> Outcome<()> {
    let exp = tables::read_columns(&args.experiment)?;
    let sim = tables::read_columns(&args.simulated)?;
    let mut fits: Vec<(String, FitResult)> = Vec::new();
    for state in ["1", "0"] {
        let e = exp.curve(args.mode.as_str(), state, args.experiment_run.as_deref())?;
        let s = sim.curve(args.mode.as_str(), state, args.simulated_run.as_deref())?;
        let common: Vec<usize> = e.keys().filter(|n| s.contains_key(n)).copied().collect();
        if common.is_empty() {
            return Err(Failure::data(format!("no common N for prepared state {state}")));
        }
        let xe: Vec<f64> = common.iter().map(|n| e[n]).collect();
        let xs: Vec<f64> = common.iter().map(|n| s[n]).collect();
        fits.push((state.to_string(), fit_preparation_error(&xe, &xs).map_err(Failure::from_fit_input)?));
    }
    let average = fits.iter().map(|(_, f)| f.parameters[0].value).sum::<f64>() / fits.len() as f64;
    let config = serde_json::json!({
        "mode": args.mode,
        "experiment_run": args.experiment_run,
        "simulated_run": args.simulated_run,
        "experiment_config": exp.config,
        "simulated_config": sim.config,
    });
    let by_state: serde_json::Map<String, serde_json::Value> = fits
        .into_iter()
        .map(|(k, f)| Ok((k, serde_json::to_value(f).map_err(|e| Failure::data(e.to_string()))?)))
        .collect::<Outcome<_>>()?;
    emit(
        args.out.as_deref(),
        &serde_json::json!({ "config": config, "fits": by_state, "average_eta": average }),
    )
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::config("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Decode(a) => decode_records(a),
        Command::Benchmark(a) => benchmark(a),
        Command::FitT1(a) => fit_t1_command(a),
        Command::FitPrepError(a) => fit_prep_command(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
