//! The `frailtykit` command line: `fit`, `simulate`, `mc-study`, `compare`.
//!
//! [`dispatch`] parses an argument vector, runs the command and returns the
//! process exit code: 0 on success, 1 for invalid input or usage, 2 for a
//! numerical failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use frailtykit::inference::{fit_model, FitConfig};
use frailtykit::io::{self, CompareReport, FitReport, RunInfo};
use frailtykit::model::{BaselineChoice, Frailty};
use frailtykit::rng::stream_rng;
use frailtykit::simulation::{run_monte_carlo, McmcFitter, Scenario, Simulator};
use frailtykit::{Error, ErrorKind};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FRAILTYKIT_THREADS";

const DEFAULT_INTERVALS: usize = 5;
const DEFAULT_DEGREE: usize = 5;

#[derive(Debug, Parser)]
#[command(name = "frailtykit", version, about = "Bayesian frailty survival models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to a CSV data set.
    Fit(FitArgs),
    /// Simulate one data set from a scenario.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo parameter-recovery study.
    McStudy(McStudyArgs),
    /// Rank fitted models by WAIC.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Pe,
    Bp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FrailtyArg {
    Gamma,
    None,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "gamma")]
    frailty: FrailtyArg,
    /// Number of PE intervals, cut at event-time quantiles [default: 5].
    #[arg(long)]
    intervals: Option<usize>,
    /// Bernstein degree [default: 5].
    #[arg(long)]
    degree: Option<usize>,
    /// Bernstein support end [default: 1.01 x largest time].
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    iter: usize,
    #[arg(long, default_value_t = 5_000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 4)]
    chains: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Credible level of the equal-tailed intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Also write every retained draw to `draws.csv`.
    #[arg(long)]
    draws: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct McStudyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the scenario's replica count.
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// `fit_report.json` files of the runs to rank.
    #[arg(long, num_args = 1.., required = true)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Runs the command line given by `argv` (program name first).
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Validation => EXIT_VALIDATION,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    }
}

/// Reads [`THREADS_ENV`]; `None` when unset.
pub fn thread_limit() -> Result<Option<usize>, Error> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let threads = thread_limit()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match cli.command {
        Command::Fit(a) => fit(a),
        Command::Simulate(a) => simulate(a),
        Command::McStudy(a) => mc_study(a),
        Command::Compare(a) => compare(a),
    })
}

fn prepare_out(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn read_scenario(path: &Path) -> Result<Scenario, Error> {
    Scenario::from_json(&fs::read_to_string(path)?)
}

fn fit(a: FitArgs) -> Result<(), Error> {
    let baseline = match a.model {
        ModelArg::Pe => {
            if a.degree.is_some() || a.tau.is_some() {
                return Err(Error::Config("--degree and --tau apply to --model bp only".into()));
            }
            BaselineChoice::Pe {
                intervals: a.intervals.unwrap_or(DEFAULT_INTERVALS),
            }
        }
        ModelArg::Bp => {
            if a.intervals.is_some() {
                return Err(Error::Config("--intervals applies to --model pe only".into()));
            }
            BaselineChoice::Bp {
                degree: a.degree.unwrap_or(DEFAULT_DEGREE),
                tau: a.tau,
            }
        }
    };
    let frailty = match a.frailty {
        FrailtyArg::Gamma => Frailty::Gamma,
        FrailtyArg::None => Frailty::None,
    };
    let config = FitConfig {
        chains: a.chains,
        iterations: a.iter,
        burnin: a.burnin,
        thin: a.thin,
        seed: a.seed,
        level: a.level,
        ..FitConfig::default()
    };
    config.validate()?;
    let data = io::read_dataset(&a.data)?;
    let spec = baseline.build(&data, frailty)?;
    log::info!("fitting {} to {} records in {} clusters", spec.label(), data.len(), data.n_clusters());

    let start = Instant::now();
    let draws = fit_model(&data, &spec, &config, None)?;
    let waic = match draws.pointwise_ll.as_deref().map(frailtykit::waic) {
        Some(Ok(w)) => Some(w),
        Some(Err(e)) => {
            log::warn!("WAIC unavailable: {e}");
            None
        }
        None => None,
    };
    let elapsed = start.elapsed().as_secs_f64();
    let report = FitReport::new(&data, &spec, &config, &draws, waic, elapsed)?;
    if let Some(d) = &report.diagnostics {
        if d.max_rhat > 1.1 {
            log::warn!("largest split R-hat is {:.3}; chains may not have converged", d.max_rhat);
        }
    }

    prepare_out(&a.out)?;
    fs::write(a.out.join("fit_report.json"), report.to_json()?)?;
    fs::write(a.out.join("posterior_summary.csv"), report.summary_csv()?)?;
    if a.draws {
        fs::write(a.out.join("draws.csv"), io::draws_csv(&draws)?)?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), Error> {
    let scenario = read_scenario(&a.config)?;
    let data = Simulator::new(&scenario)?.simulate(&mut stream_rng(scenario.seed, 0))?;
    prepare_out(&a.out)?;
    io::write_dataset(a.out.join("dataset.csv"), &data, Some(scenario.seed))
}

fn mc_study(a: McStudyArgs) -> Result<(), Error> {
    let scenario = read_scenario(&a.config)?;
    let replicas = a.replicas.unwrap_or(scenario.replicas);
    let fitter = McmcFitter::for_scenario(&scenario);
    let study = run_monte_carlo(&scenario, &fitter, replicas)?;
    prepare_out(&a.out)?;
    fs::write(a.out.join("mc_metrics.csv"), io::mc_metrics_csv(&study)?)?;
    fs::write(a.out.join("replicas.csv"), io::replicas_csv(&study)?)?;
    if study.study_failed {
        return Err(Error::StudyFailure {
            failed: study.failed,
            total: replicas,
        });
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<(), Error> {
    if a.runs.len() < 2 {
        return Err(Error::IncomparableModels(format!(
            "compare needs at least two runs, got {}",
            a.runs.len()
        )));
    }
    let reports = a
        .runs
        .iter()
        .map(FitReport::read)
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(r) = reports.iter().find(|r| r.data != reports[0].data) {
        return Err(Error::IncomparableModels(format!(
            "run `{}` was fitted to a different data set",
            r.label
        )));
    }
    let mut named = Vec::with_capacity(reports.len());
    let mut runs = Vec::with_capacity(reports.len());
    for (path, r) in a.runs.iter().zip(&reports) {
        let waic = r.waic.clone().ok_or_else(|| {
            Error::IncomparableModels(format!("{} has no WAIC", path.display()))
        })?;
        let duplicate = reports.iter().filter(|o| o.label == r.label).count() > 1;
        let name = if duplicate {
            format!("{} ({})", r.label, path.display())
        } else {
            r.label.clone()
        };
        runs.push(RunInfo {
            source: path.display().to_string(),
            model: name.clone(),
            seed: r.seed,
        });
        named.push((name, waic));
    }
    let rows = frailtykit::compare(&named)?;
    prepare_out(&a.out)?;
    fs::write(a.out.join("waic_compare.json"), CompareReport::new(runs, rows).to_json()?)?;
    Ok(())
}
