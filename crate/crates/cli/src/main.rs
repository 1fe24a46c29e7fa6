//! `delayspi`: generate benchmark traces, estimate SPI, run heuristics,
//! forecasts, grid sweeps, horizon and data-length curves.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 numerical.

mod ranges;

use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use delayspi::dynamics::{generate_benchmark_trace, GenerationProtocol, System};
use delayspi::forecast::{rolling_forecast, ForecastConfig, HorizonMode};
use delayspi::heuristics::{ami_first_minimum_tau, fnn_dimension, FnnOptions, HeuristicResult, HeuristicStatus};
use delayspi::info::{spi, Estimator, EstimatorKind, SpiRequest};
use delayspi::io::{
    load_timeseries_csv, write_curve, write_diagnostic, write_forecast, write_heatmap_csv, write_json, write_json_file,
    write_timeseries_csv, GridDocument,
};
use delayspi::sweep::{data_length_curve, grid_sweep, horizon_curves, HorizonFamily, MaseSetup, SweepOptions};
use delayspi::{ReconstructionParams, TimeSeries};

use ranges::IntList;

#[derive(Parser)]
#[command(
    name = "delayspi",
    version,
    about = "Delay-reconstruction parameters by shared prediction information"
)]
struct Cli {
    /// Seed for tie-breaking jitter and initial-state perturbation.
    #[arg(long, global = true, display_order = 900, default_value_t = 42)]
    seed: u64,

    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true, display_order = 901)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate or iterate a benchmark system and write the observed trace.
    Generate(GenerateArgs),
    /// SPI of one (m, tau, p) reconstruction.
    Spi(SpiArgs),
    /// SPI (and optionally MASE) over an (m, tau) grid.
    Sweep(SweepArgs),
    /// First-minimum AMI delay and false-nearest-neighbor dimension.
    Heuristics(HeuristicsArgs),
    /// Rolling analogue forecast over a held-out tail, scored by MASE.
    Forecast(ForecastArgs),
    /// SPI against prediction horizon.
    Horizon(HorizonArgs),
    /// SPI on growing prefixes of a series.
    Datalength(DataLengthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemName {
    Lorenz63,
    Lorenz96,
    Henon,
    Logistic,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    system: SystemName,
    /// Lorenz 96 ring size.
    #[arg(long, default_value_t = 22)]
    k: usize,
    /// Lorenz 96 forcing.
    #[arg(long, default_value_t = 5.0)]
    f: f64,
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    #[arg(long, default_value_t = 28.0)]
    rho: f64,
    #[arg(long, default_value_t = 8.0 / 3.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.4)]
    a: f64,
    #[arg(long, default_value_t = 0.3)]
    b: f64,
    /// Logistic parameter.
    #[arg(long, default_value_t = 3.65)]
    r: f64,
    #[arg(long, default_value_t = GenerationProtocol::DEFAULT_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = GenerationProtocol::DEFAULT_DISCARD)]
    discard: usize,
    /// Step size for flows; 0.015625 is 1/64. Maps always use 1.
    #[arg(long)]
    dt: Option<f64>,
    /// State component to record.
    #[arg(long, default_value_t = 0)]
    observable: usize,
    /// Half-width of a seeded uniform nudge added to the initial state.
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
    /// Trace CSV; a JSON sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorName {
    Ksg,
    Box,
}

#[derive(Args)]
struct SpiArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    tau: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    knn: usize,
    #[arg(long, value_enum, default_value_t = EstimatorName::Ksg)]
    estimator: EstimatorName,
    /// Box-kernel bandwidth.
    #[arg(long)]
    r: Option<f64>,
}

/// Forecast settings shared by `sweep` and `forecast`.
#[derive(Args)]
struct ForecastFlags {
    /// Training length; defaults to 90% of the series.
    #[arg(long)]
    train: Option<usize>,
    /// Analogues averaged per forecast.
    #[arg(long, default_value_t = 1)]
    neighbors: usize,
    /// Temporal exclusion window; defaults to (m-1)*tau + p.
    #[arg(long)]
    exclusion: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Direct)]
    mode: Mode,
    /// Keep the analogue library fixed at the training data.
    #[arg(long)]
    frozen: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Direct,
    Chained,
}

impl ForecastFlags {
    fn config(&self) -> ForecastConfig {
        ForecastConfig {
            num_neighbors: self.neighbors,
            exclusion_window: self.exclusion,
            rebuild_every_step: !self.frozen,
            horizon_mode: match self.mode {
                Mode::Direct => HorizonMode::DirectPStep,
                Mode::Chained => HorizonMode::RollingOneStep,
            },
        }
    }

    fn split(&self, len: usize, test: Option<usize>) -> Result<(usize, usize), Failure> {
        let train = self.train.unwrap_or(len * 9 / 10);
        if train >= len {
            return Err(Failure::Usage(format!(
                "--train {train} leaves no test samples out of {len}"
            )));
        }
        Ok((train, test.unwrap_or(len - train)))
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    /// Dimensions, e.g. 2..15.
    #[arg(long)]
    m: IntList,
    /// Delays, e.g. 1..50.
    #[arg(long)]
    tau: IntList,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    knn: usize,
    /// Also forecast every cell and record MASE.
    #[arg(long)]
    mase: bool,
    #[command(flatten)]
    forecast: ForecastFlags,
    /// Plateau width for the SPI selection.
    #[arg(long, default_value_t = delayspi::sweep::DEFAULT_PLATEAU_FRACTION)]
    plateau: f64,
    /// Long-form heatmap CSV.
    #[arg(long)]
    out: PathBuf,
    /// Grid document with matrices, extremes and the selection.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct HeuristicsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 60)]
    tau_max: usize,
    #[arg(long, default_value_t = delayspi::heuristics::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 15)]
    m_max: usize,
    /// Delay for the FNN scan; defaults to the AMI choice.
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long, default_value_t = delayspi::heuristics::DEFAULT_RTOL)]
    rtol: f64,
    #[arg(long, default_value_t = delayspi::heuristics::DEFAULT_ATOL)]
    atol: f64,
    #[arg(long, default_value_t = delayspi::heuristics::DEFAULT_FNN_THRESHOLD)]
    threshold: f64,
    /// AMI curve as `tau,ami`.
    #[arg(long)]
    ami_out: Option<PathBuf>,
    /// FNN curve as `m,fnn_fraction`.
    #[arg(long)]
    fnn_out: Option<PathBuf>,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    tau: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Test length; defaults to everything after the training part.
    #[arg(long)]
    test: Option<usize>,
    #[command(flatten)]
    forecast: ForecastFlags,
    /// Predictions CSV (`index,prediction,truth`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HorizonArgs {
    #[arg(long)]
    input: PathBuf,
    /// One value, or a list when `--tau` is a single value.
    #[arg(long)]
    m: IntList,
    #[arg(long)]
    tau: IntList,
    /// Horizons, e.g. 1..100.
    #[arg(long)]
    p: IntList,
    #[arg(long, default_value_t = 4)]
    knn: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DataLengthArgs {
    #[arg(long)]
    input: PathBuf,
    /// Ascending prefix lengths, e.g. 10000,20000,50000.
    #[arg(long)]
    lengths: IntList,
    #[arg(long)]
    m: IntList,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    knn: usize,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<delayspi::Error> for Failure {
    fn from(e: delayspi::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else if matches!(e, delayspi::Error::InvalidParameter(_)) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| io_failure(path, e))
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    write_json(value, io::stdout().lock())?;
    Ok(())
}

fn load(path: &Path) -> Result<TimeSeries, Failure> {
    load_timeseries_csv(path).map_err(|e| match e {
        delayspi::Error::Io(msg) => Failure::Data(format!("{}: {msg}", path.display())),
        other => other.into(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Generate(a) => generate(a, cli.seed),
        Command::Spi(a) => spi_cmd(a, cli.seed),
        Command::Sweep(a) => sweep(a, cli.seed),
        Command::Heuristics(a) => heuristics(a),
        Command::Forecast(a) => forecast(a),
        Command::Horizon(a) => horizon(a),
        Command::Datalength(a) => datalength(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    name: &'a str,
    system: System,
    protocol: &'a GenerationProtocol,
    seed: u64,
    perturb: f64,
    length: usize,
    sample_step: f64,
}

fn generate(a: &GenerateArgs, seed: u64) -> Outcome {
    let system = match a.system {
        SystemName::Lorenz63 => System::Lorenz63 {
            sigma: a.sigma,
            rho: a.rho,
            beta: a.beta,
        },
        SystemName::Lorenz96 => System::Lorenz96 { k: a.k, forcing: a.f },
        SystemName::Henon => System::Henon { a: a.a, b: a.b },
        SystemName::Logistic => System::Logistic { r: a.r },
    };
    if !(a.perturb >= 0.0 && a.perturb.is_finite()) {
        return Err(Failure::Usage("--perturb must be a non-negative number".into()));
    }
    let base = GenerationProtocol::standard(&system);
    let mut initial = system.default_initial_state();
    if a.perturb > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut initial {
            *v += a.perturb * (2.0 * rng.random::<f64>() - 1.0);
        }
    }
    let protocol = GenerationProtocol {
        total_steps: a.steps,
        discard: a.discard,
        dt: if system.is_flow() { a.dt.unwrap_or(base.dt) } else { 1.0 },
        observable_index: a.observable,
        initial_state: Some(initial),
    };
    let ts = generate_benchmark_trace(&system, &protocol)?;
    write_timeseries_csv(&ts, &a.out)?;
    let sidecar = Sidecar {
        name: ts.name(),
        system,
        protocol: &protocol,
        seed,
        perturb: a.perturb,
        length: ts.len(),
        sample_step: ts.sample_step(),
    };
    write_json_file(&sidecar, a.out.with_extension("json"))?;
    Ok(())
}

#[derive(Serialize)]
struct SpiOutput {
    value_nats: f64,
    value_bits: f64,
    estimator: EstimatorKind,
    n_samples: usize,
}

fn spi_cmd(a: &SpiArgs, seed: u64) -> Outcome {
    let estimator = match (a.estimator, a.r) {
        (EstimatorName::Ksg, _) => Estimator::Ksg { k: a.knn },
        (EstimatorName::Box, Some(r)) => Estimator::BoxKernel { r },
        (EstimatorName::Box, None) => return Err(Failure::Usage("--estimator box needs --r".into())),
    };
    let ts = load(&a.input)?;
    let req = SpiRequest {
        params: ReconstructionParams::new(a.m, a.tau, a.p)?,
        estimator,
        seed,
    };
    let est = spi(&ts, &req)?;
    print_json(&SpiOutput {
        value_nats: est.value,
        value_bits: est.bits(),
        estimator: est.estimator,
        n_samples: est.n_samples,
    })
}

fn sweep(a: &SweepArgs, seed: u64) -> Outcome {
    let ts = load(&a.input)?;
    let mut opts = SweepOptions::spi_only(a.p);
    opts.estimator = Estimator::Ksg { k: a.knn };
    opts.seed = seed;
    if a.mase {
        let (train, test) = a.forecast.split(ts.len(), None)?;
        opts.mase = Some(MaseSetup {
            train,
            test,
            config: a.forecast.config(),
        });
    }
    let grid = grid_sweep(&ts, &a.m.0, &a.tau.0, &opts)?;
    write_heatmap_csv(&grid, &a.out)?;
    let doc = GridDocument::new(grid, a.plateau);
    if let Some(path) = &a.json {
        write_json_file(&doc, path)?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        selection: &'a Option<delayspi::sweep::Selection>,
        spi_argmax: &'a Option<delayspi::sweep::Cell>,
        mase_argmin: &'a Option<delayspi::sweep::Cell>,
        failed_cells: usize,
    }
    print_json(&Summary {
        selection: &doc.selection,
        spi_argmax: &doc.spi_argmax,
        mase_argmin: &doc.mase_argmin,
        failed_cells: doc.grid.failures.len(),
    })?;
    if doc.selection.is_none() {
        return Err(Failure::Numerical("every grid cell failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct Choice {
    value: Option<usize>,
    status: HeuristicStatus,
}

impl From<&HeuristicResult> for Choice {
    fn from(r: &HeuristicResult) -> Self {
        Self {
            value: r.value,
            status: r.status,
        }
    }
}

#[derive(Serialize)]
struct HeuristicsOutput {
    tau: Choice,
    /// Delay the FNN scan used; `None` when AMI failed and none was given.
    fnn_tau: Option<usize>,
    m: Option<Choice>,
}

fn heuristics(a: &HeuristicsArgs) -> Outcome {
    let ts = load(&a.input)?;
    let ami = ami_first_minimum_tau(&ts, a.tau_max, a.bins)?;
    if let Some(path) = &a.ami_out {
        write_diagnostic(["tau", "ami"], &ami.diagnostic_curve, create(path)?)?;
    }
    let fnn_tau = a.tau.or(ami.value);
    let fnn = match fnn_tau {
        Some(tau) => {
            let opts = FnnOptions {
                rtol: a.rtol,
                atol: a.atol,
                threshold: a.threshold,
            };
            Some(fnn_dimension(&ts, tau, a.m_max, &opts)?)
        }
        None => None,
    };
    if let (Some(path), Some(f)) = (&a.fnn_out, &fnn) {
        write_diagnostic(["m", "fnn_fraction"], &f.diagnostic_curve, create(path)?)?;
    }
    print_json(&HeuristicsOutput {
        tau: (&ami).into(),
        fnn_tau,
        m: fnn.as_ref().map(Choice::from),
    })
}

fn forecast(a: &ForecastArgs) -> Outcome {
    let ts = load(&a.input)?;
    let params = ReconstructionParams::new(a.m, a.tau, a.p)?;
    let (train, test) = a.forecast.split(ts.len(), a.test)?;
    let result = rolling_forecast(&ts, params, train, test, &a.forecast.config())?;
    if let Some(path) = &a.out {
        write_forecast(train, &result.predictions, &result.truth, create(path)?)?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        params: &'a ReconstructionParams,
        config: &'a ForecastConfig,
        train: usize,
        test: usize,
        mase: f64,
    }
    print_json(&Summary {
        params: &result.params,
        config: &result.config,
        train,
        test,
        mase: result.mase,
    })
}

fn horizon(a: &HorizonArgs) -> Outcome {
    let family = match (a.m.single(), a.tau.single()) {
        (Some(m), _) => HorizonFamily::FixedM {
            m,
            tau_values: a.tau.0.clone(),
        },
        (None, Some(tau)) => HorizonFamily::FixedTau {
            tau,
            m_values: a.m.0.clone(),
        },
        (None, None) => return Err(Failure::Usage("one of --m and --tau must be a single value".into())),
    };
    let ts = load(&a.input)?;
    let rows = horizon_curves(&ts, &family, &a.p.0, a.knn)?;
    write_curve(&rows, create(&a.out)?)?;
    Ok(())
}

fn datalength(a: &DataLengthArgs) -> Outcome {
    let ts = load(&a.input)?;
    let rows = data_length_curve(&ts, &a.lengths.0, &a.m.0, a.tau, a.p, a.knn)?;
    write_curve(&rows, create(&a.out)?)?;
    Ok(())
}
