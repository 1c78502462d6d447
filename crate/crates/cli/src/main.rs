use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capo::auxiliary::load_external_predictions;
use capo::experiment::report::{BenchReport, SweepReport};
use capo::experiment::{evaluate_saved, parse_grid, AuxSpec, ExperimentConfig, Harness, SavedModel};
use capo::{Dataset, Error, Execution, Measure, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "capo",
    version,
    about = "Train linear classifiers for multivariate measures and adapt auxiliary classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plain linear training with cross-validated C.
    Train(RunArgs),
    /// Adapt auxiliary classifiers (--aux) with cross-validated C.
    Adapt(RunArgs),
    /// Apply a saved model to a data file.
    Eval(EvalArgs),
    /// One fit per C (and B, with auxiliaries) without cross-validation.
    Sweep(RunArgs),
    /// Inference counts of plain vs adapted training per C.
    Bench(RunArgs),
}

fn measure_arg(s: &str) -> std::result::Result<Measure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A whole grid given as one argument.
#[derive(Clone)]
struct Grid(Vec<f64>);

fn grid_arg(s: &str) -> std::result::Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn aux_arg(s: &str) -> std::result::Result<AuxSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training file (SVMlight format).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Test file, read only after training.
    #[arg(long)]
    test: Option<PathBuf>,
    /// err, f1, prbep or auc.
    #[arg(long, value_parser = measure_arg)]
    measure: Option<Measure>,
    /// C grid: `1,2,4` or `2^-7:2^7`.
    #[arg(short = 'C', value_parser = grid_arg)]
    c: Option<Grid>,
    /// B value (a grid for sweep).
    #[arg(short = 'B', value_parser = grid_arg)]
    b: Option<Grid>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Auxiliary classifier: tree:depth=12, sgd:lambda=1e-4, pred:<path>,
    /// pred:train=<path>,test=<path>. Repeatable.
    #[arg(long, value_parser = aux_arg)]
    aux: Vec<AuxSpec>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Constant feature value appended to every example; 0 disables it.
    #[arg(long)]
    bias: Option<f64>,
    /// Max-abs scale features using the training file.
    #[arg(long)]
    scale: bool,
    /// Worker threads; 0 uses all cores, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Directory for report.json, report.txt, timings.json and model.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with code 4 if any final training run did not converge.
    #[arg(long)]
    strict: bool,
    /// Write per-iteration records of the final fit to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Predictions for external auxiliaries on --data, in model order
    /// (`pred:<path>`). Repeatable.
    #[arg(long, value_parser = aux_arg)]
    aux: Vec<AuxSpec>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.data) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(data)) => ExperimentConfig::new(data),
            (None, None) => return Err(Error::Config("either --config or --data is required".into())),
        };
        if let Some(v) = &self.data {
            cfg.data = v.clone();
        }
        if let Some(v) = &self.test {
            cfg.test = Some(v.clone());
        }
        if let Some(v) = self.measure {
            cfg.measure = v;
        }
        if let Some(v) = &self.c {
            cfg.c = v.0.clone();
        }
        if let Some(v) = &self.b {
            cfg.b = v.0.clone();
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.max_iterations {
            cfg.max_iterations = v;
        }
        if !self.aux.is_empty() {
            cfg.aux = self.aux.clone();
        }
        if let Some(v) = self.folds {
            cfg.folds = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.bias {
            cfg.bias = v;
        }
        cfg.scale |= self.scale;
        cfg.strict |= self.strict;
        Ok(cfg)
    }

    fn harness(&self) -> Result<Harness> {
        let harness = Harness::new(self.config()?, execution(self.jobs))?;
        Ok(match &self.trace {
            Some(path) => harness.with_trace(path),
            None => harness,
        })
    }
}

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

/// 2 for usage or configuration problems, 3 for anything wrong with the
/// data, predictions or model files.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parameter(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn execution(jobs: usize) -> Execution {
    if jobs == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Error::Io { path, source: e })
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
}

fn out_dir(out: &Option<PathBuf>) -> Result<Option<&Path>> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

/// Runs a command, returning whether every final fit converged and whether
/// `--strict` was requested.
fn run(command: Command) -> Result<(bool, bool)> {
    match command {
        Command::Train(args) => fit(args, false),
        Command::Adapt(args) => fit(args, true),
        Command::Sweep(args) => {
            let harness = args.harness()?;
            let strict = harness.config().strict;
            let report: SweepReport = Execution::with_jobs(args.jobs, || harness.sweep())?;
            let table = report.to_table();
            print!("{table}");
            if let Some(dir) = out_dir(&args.out)? {
                write_json(dir, "report.json", &report)?;
                write_text(dir, "report.txt", &table)?;
            }
            Ok((report.rows.iter().all(|r| r.converged), strict))
        }
        Command::Bench(args) => {
            let harness = args.harness()?;
            let strict = harness.config().strict;
            let report: BenchReport = Execution::with_jobs(args.jobs, || harness.bench())?;
            let table = report.to_table();
            print!("{table}");
            if let Some(dir) = out_dir(&args.out)? {
                write_json(dir, "report.json", &report)?;
                write_text(dir, "report.txt", &table)?;
            }
            let converged = report.rows.iter().all(|r| r.plain_converged && r.adapted_converged);
            Ok((converged, strict))
        }
        Command::Eval(args) => {
            let model = SavedModel::load(&args.model)?;
            let data = Dataset::load(&args.data)?;
            let external = args
                .aux
                .iter()
                .map(|spec| match spec {
                    AuxSpec::Pred { train, test: None } => load_external_predictions(train, data.len()),
                    other => Err(Error::Config(format!(
                        "eval only takes pred:<path> auxiliaries, got `{other}`"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            let report = Execution::with_jobs(args.jobs, || {
                evaluate_saved(&model, &data, &external, execution(args.jobs))
            })?;
            let table = report.to_table();
            print!("{table}");
            if let Some(dir) = out_dir(&args.out)? {
                write_json(dir, "report.json", &report)?;
                write_text(dir, "report.txt", &table)?;
            }
            Ok((true, false))
        }
    }
}

fn fit(args: RunArgs, adapt: bool) -> Result<(bool, bool)> {
    let harness = args.harness()?;
    let strict = harness.config().strict;
    let outcome = Execution::with_jobs(args.jobs, || if adapt { harness.adapt() } else { harness.train() })?;
    let table = outcome.report.to_table();
    print!("{table}");
    if let Some(dir) = out_dir(&args.out)? {
        write_json(dir, "report.json", &outcome.report)?;
        write_text(dir, "report.txt", &table)?;
        write_json(dir, "timings.json", &outcome.timings)?;
        outcome.model.save(dir.join("model.json"))?;
    }
    Ok((outcome.report.training.converged, strict))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((converged, strict)) => {
            if strict && !converged {
                eprintln!("error: training did not converge");
                return ExitCode::from(EXIT_NOT_CONVERGED);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
