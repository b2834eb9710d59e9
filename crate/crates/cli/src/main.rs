use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use log::{debug, info, warn};
use rayon::prelude::*;
use serde::Serialize;

use rcmc::analysis::{evaluate_record, record_inputs, ExactOracle, Precision, DENSE_LIMIT};
use rcmc::io::{
    build_canonical, read_matrix, read_network, read_vector, synthesize, write_error_report, write_matrix,
    write_network, write_trajectory, write_vector, SynthParams,
};
use rcmc::{project_pi, run, PiMetric, RateMatrix, RunOptions, TimeMethod, Tolerances, Variant};

#[derive(Parser)]
#[command(name = "rcmc", version, about = "Rate constant matrix contraction for stiff master equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the contraction and write the trajectory as CSV.
    Run(RunArgs),
    /// Check the rate-matrix axioms and report every violation.
    Validate(SystemArgs),
    /// Compare a run against the exact solution and the error bounds.
    Bounds(BoundsArgs),
    /// Project a vector onto the probability simplex in the π-norm.
    Project(ProjectArgs),
    /// Generate a random kinetic network.
    Synth(SynthArgs),
    /// Convert a network file to the coordinate matrix format.
    Convert(ConvertArgs),
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// Network JSON file.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    network: Option<PathBuf>,
    /// Coordinate matrix file with a `pi` block.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Couplings with K_ij / π_i below this ratio are dropped.
    #[arg(long, default_value_t = 1e-200)]
    truncation: f64,
    /// Relative tolerance of the axiom checks.
    #[arg(long, default_value_t = 1e-10)]
    tol_rel: f64,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// A (diagonal V_TT) or B (π-orthogonal projector).
    #[arg(long = "type", default_value = "A")]
    variant: Variant,
    /// diag, eigen or gershgorin.
    #[arg(long, default_value = "diag")]
    time_method: TimeMethod,
    /// Stop once the reference time exceeds this many seconds.
    #[arg(long, default_value_t = f64::INFINITY)]
    t_max: f64,
    /// Identifier of the state holding all initial mass.
    #[arg(long, conflicts_with = "initial_file", required_unless_present = "initial_file")]
    initial: Option<String>,
    /// File with the initial distribution, one value per state.
    #[arg(long)]
    initial_file: Option<PathBuf>,
    /// Output file (standard output when omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Significant digits of the exact reference solution (up to 31).
    #[arg(long, default_value_t = 15)]
    precision_digits: u32,
    /// Largest system accepted by the dense reference solver.
    #[arg(long, default_value_t = DENSE_LIMIT)]
    dense_limit: usize,
}

#[derive(Args)]
struct ProjectArgs {
    /// Vector to project.
    #[arg(long)]
    input: PathBuf,
    /// Stationary weights defining the metric.
    #[arg(long)]
    pi: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    edge_density: f64,
    /// kJ/mol.
    #[arg(long, default_value_t = 50.0)]
    energy_spread: f64,
    /// kJ/mol above the higher endpoint.
    #[arg(long, default_value_t = 80.0)]
    barrier_spread: f64,
    /// Kelvin.
    #[arg(long, default_value_t = 300.0)]
    temperature: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, default_value_t = 1e-200)]
    truncation: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_rel: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Resolved settings of a `run` or `bounds` invocation.
#[derive(Debug, Serialize)]
struct RunConfig {
    variant: String,
    time_method: String,
    t_max: f64,
    initial: String,
    tolerances: Tolerances,
    output: Option<PathBuf>,
    precision_digits: Option<u32>,
}

struct System {
    rates: RateMatrix<f64>,
    ids: Vec<String>,
}

/// Failures that are about the input data rather than how the tool was called.
#[derive(Debug)]
struct DataError(rcmc::Error);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for DataError {}

fn data<T>(r: rcmc::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| match e {
        rcmc::Error::Io(_) | rcmc::Error::Parse(_) => anyhow::Error::new(e),
        other => anyhow::Error::new(DataError(other)),
    })
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn tolerances(a: &SystemArgs) -> Tolerances {
    Tolerances { tol_rel: a.tol_rel, truncation_ratio: a.truncation, ..Default::default() }
}

fn load_system(a: &SystemArgs) -> anyhow::Result<System> {
    let tol = tolerances(a);
    if let Some(path) = &a.network {
        let net = data(read_network(open(path)?))?;
        let sys = data(build_canonical(&net, &tol))?;
        if sys.state_map.len() < net.n() {
            warn!("{} of {} states removed by truncation", net.n() - sys.state_map.len(), net.n());
        }
        Ok(System { rates: sys.rates, ids: sys.state_ids })
    } else {
        let path = a.matrix.as_ref().ok_or_else(|| anyhow!("either --network or --matrix is required"))?;
        let rates = data(read_matrix(open(path)?, &tol))?;
        let ids = (1..=rates.n()).map(|i| i.to_string()).collect();
        Ok(System { rates, ids })
    }
}

fn initial_vector(a: &RunArgs, sys: &System) -> anyhow::Result<Vec<f64>> {
    if let Some(path) = &a.initial_file {
        let p = data(read_vector(open(path)?))?;
        if p.len() != sys.rates.n() {
            bail!("initial vector has {} entries, system has {}", p.len(), sys.rates.n());
        }
        return Ok(p);
    }
    let id = a.initial.as_deref().unwrap_or_default();
    let i = sys.ids.iter().position(|s| s == id).ok_or_else(|| anyhow!("no state with id {id:?}"))?;
    let mut p = vec![0.0; sys.rates.n()];
    p[i] = 1.0;
    Ok(p)
}

fn run_options(a: &RunArgs) -> RunOptions {
    RunOptions {
        variant: a.variant,
        time_method: a.time_method,
        t_max: a.t_max,
        tol: tolerances(&a.system),
        ..Default::default()
    }
}

fn run_config(a: &RunArgs, precision_digits: Option<u32>) -> RunConfig {
    RunConfig {
        variant: a.variant.to_string(),
        time_method: a.time_method.to_string(),
        t_max: a.t_max,
        initial: match (&a.initial, &a.initial_file) {
            (Some(id), _) => format!("state {id}"),
            (None, Some(f)) => f.display().to_string(),
            (None, None) => String::new(),
        },
        tolerances: tolerances(&a.system),
        output: a.output.clone(),
        precision_digits,
    }
}

fn cmd_run(a: &RunArgs) -> anyhow::Result<()> {
    debug!("config: {}", serde_json::to_string(&run_config(a, None))?);
    let sys = load_system(&a.system)?;
    let p = initial_vector(a, &sys)?;
    let traj = data(run(&sys.rates, &p, &run_options(a)))?;
    if !traj.time_violations.is_empty() {
        warn!("reference time decreased at steps {:?}", traj.time_violations);
    }
    info!("{} snapshots over {} states", traj.entries.len(), sys.rates.n());
    let mut out = sink(a.output.as_deref())?;
    data(write_trajectory(&mut out, &traj, &sys.ids))?;
    out.flush()?;
    Ok(())
}

fn cmd_validate(a: &SystemArgs) -> anyhow::Result<()> {
    let sys = load_system(a)?;
    println!("ok: {} states, {} stored entries", sys.rates.n(), sys.rates.k().nnz());
    Ok(())
}

fn cmd_bounds(a: &BoundsArgs) -> anyhow::Result<()> {
    debug!("config: {}", serde_json::to_string(&run_config(&a.run, Some(a.precision_digits)))?);
    let precision = data(Precision::from_digits(a.precision_digits))?;
    let sys = load_system(&a.run.system)?;
    let p = initial_vector(&a.run, &sys)?;
    let opts = RunOptions { keep_unprojected: true, ..run_options(&a.run) };
    let traj = data(run(&sys.rates, &p, &opts))?;
    let oracle = data(ExactOracle::new(&sys.rates, precision, a.dense_limit))?;
    let eb = oracle.basis_f64();
    let inputs = data(record_inputs(&sys.rates, &traj, &opts.tol))?;
    let offmax = sys.rates.max_scaled_offdiag();
    let records: Vec<_> = inputs
        .par_iter()
        .map(|inp| {
            let exact = oracle.exact_solution(&p, inp.t);
            evaluate_record(&eb, inp, &p, &exact, offmax, a.run.variant)
        })
        .collect();
    let above = records.iter().filter(|r| !r.precision_limited && r.pi_err > r.bound_b + 1e-9).count();
    if above > 0 {
        warn!("{above} snapshots have an error above the type B bound");
    }
    let mut out = sink(a.run.output.as_deref())?;
    data(write_error_report(&mut out, &records))?;
    out.flush()?;
    Ok(())
}

fn cmd_project(a: &ProjectArgs) -> anyhow::Result<()> {
    let w = data(read_vector(open(&a.input)?))?;
    let pi = data(read_vector(open(&a.pi)?))?;
    if w.len() != pi.len() {
        bail!("vector has {} entries, pi has {}", w.len(), pi.len());
    }
    let m = data(PiMetric::new(pi))?;
    let r = project_pi(&w, &m);
    info!("support size {}, multiplier {:e}", r.support_size, r.mu);
    let mut out = sink(a.output.as_deref())?;
    data(write_vector(&mut out, &r.q))?;
    out.flush()?;
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> anyhow::Result<()> {
    let net = data(synthesize(&SynthParams {
        n: a.n,
        edge_density: a.edge_density,
        energy_spread_kjmol: a.energy_spread,
        barrier_spread_kjmol: a.barrier_spread,
        temperature: a.temperature,
        seed: a.seed,
    }))?;
    let mut out = sink(a.output.as_deref())?;
    data(write_network(&mut out, &net))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_convert(a: &ConvertArgs) -> anyhow::Result<()> {
    let sys = load_system(&SystemArgs {
        network: Some(a.network.clone()),
        matrix: None,
        truncation: a.truncation,
        tol_rel: a.tol_rel,
    })?;
    let mut out = sink(a.output.as_deref())?;
    data(write_matrix(&mut out, &sys.rates))?;
    out.flush()?;
    Ok(())
}

fn configure_threads() {
    if let Ok(v) = std::env::var("RCMC_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    warn!("cannot set thread count: {e}");
                }
            }
            _ => warn!("ignoring RCMC_THREADS={v:?}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Project(a) => cmd_project(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Convert(a) => cmd_convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<DataError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
