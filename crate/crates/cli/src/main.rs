//! `parklab`: tables, constants, sweeps, simulations and validation.
//!
//! Exit codes: 0 success, 1 validation failure or runtime error, 2 usage
//! error (including parameter values the library rejects).

mod format;

use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use parklab::montecarlo::{run_mc, z_moments, SimConfig, SimStats};
use parklab::report::{compute_brackets, compute_report, ConstantsReport};
use parklab::solver::{solve_m, solve_m2, solve_mprime, solve_uniform_mprime};
use parklab::validation::{run_all, ValidationOptions};
use parklab::{ParkError, Params, SegmentedGrid, TailMethod};
use serde::Serialize;

use format::fmt17;

#[derive(Parser)]
#[command(name = "parklab", version, about = "Saturation statistics of the varying-rate parking process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "M")]
    M,
    #[value(name = "Mprime")]
    Mprime,
    #[value(name = "M2")]
    M2,
    #[value(name = "uniformMprime")]
    UniformMprime,
}

#[derive(Clone, Copy, ValueEnum)]
enum TailArg {
    Crude,
    Envelope,
}

impl From<TailArg> for TailMethod {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::Crude => TailMethod::Crude,
            TailArg::Envelope => TailMethod::Envelope,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print a solved grid as CSV `x,value,segment`.
    Table {
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = parklab::params::DEFAULT_HORIZON)]
        n: usize,
        #[arg(long, default_value_t = parklab::params::DEFAULT_RESOLUTION)]
        m: usize,
    },
    /// Print bracketed C, B, D as JSON.
    Constants {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = parklab::params::DEFAULT_HORIZON)]
        n: usize,
        #[arg(long, default_value_t = parklab::params::DEFAULT_RESOLUTION)]
        m: usize,
        #[arg(long, value_enum, default_value = "envelope")]
        tail: TailArg,
    },
    /// Brackets over a uniform lambda grid as CSV. Envelope tails below
    /// lambda=3 and crude tails from 3 on, unless --tail is given.
    Sweep {
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = parklab::params::DEFAULT_HORIZON)]
        n: usize,
        #[arg(long, default_value_t = parklab::params::DEFAULT_RESOLUTION)]
        m: usize,
        #[arg(long, value_enum)]
        tail: Option<TailArg>,
    },
    /// Monte Carlo statistics of the car count as JSON.
    Simulate {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        length: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also report moments of the count standardized by solver values.
        #[arg(long)]
        zref: bool,
    },
    /// Run the acceptance checks; exit 1 if any fails.
    Validate {
        #[arg(long)]
        quick: bool,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<ParkError> for Failure {
    fn from(e: ParkError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Table { lambda, kind, n, m } => cmd_table(lambda, kind, n, m),
        Command::Constants { lambda, n, m, tail } => cmd_constants(lambda, n, m, tail.into()),
        Command::Sweep { lambda_min, lambda_max, steps, n, m, tail } => {
            cmd_sweep(lambda_min, lambda_max, steps, n, m, tail.map(Into::into))
        }
        Command::Simulate { lambda, length, trials, seed, zref } => cmd_simulate(lambda, length, trials, seed, zref),
        Command::Validate { quick, corrupt } => cmd_validate(ValidationOptions { quick, corrupt }),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `PARKLAB_THREADS` caps the Monte Carlo worker count; 0 or unset is automatic.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("PARKLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().with_context(|| format!("PARKLAB_THREADS must be an integer, got {raw:?}"))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn require_lambda(lambda: Option<f64>) -> Result<f64, Failure> {
    lambda.ok_or_else(|| Failure::Usage("--lambda is required for this kind".into()))
}

fn solve_kind(lambda: Option<f64>, kind: KindArg, n: usize, m: usize) -> Result<SegmentedGrid, Failure> {
    Ok(match kind {
        KindArg::UniformMprime => solve_uniform_mprime(n, m)?,
        KindArg::M => solve_m(&Params::new(require_lambda(lambda)?, n, m)?),
        KindArg::Mprime => solve_mprime(&Params::new(require_lambda(lambda)?, n, m)?),
        KindArg::M2 => {
            let p = Params::new(require_lambda(lambda)?, n, m)?;
            solve_m2(&p, &solve_m(&p))?
        }
    })
}

fn cmd_table(lambda: Option<f64>, kind: KindArg, n: usize, m: usize) -> CmdResult {
    let grid = solve_kind(lambda, kind, n, m)?;
    let mut out = io::BufWriter::new(io::stdout().lock());
    writeln!(out, "x,value,segment")?;
    for k in 0..grid.horizon() {
        let seg = grid.segment(k);
        for (j, &v) in seg.iter().enumerate() {
            // a shared integer abscissa is printed once unless the value jumps there
            if j == 0 && k > 0 && grid.segment(k - 1)[m] == v {
                continue;
            }
            writeln!(out, "{},{},{k}", fmt17(grid.node_x(k, j)), fmt17(v))?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ConstantsJson {
    lambda: f64,
    n: usize,
    m: usize,
    tail_method: TailMethod,
    c_lo: f64,
    c_hi: f64,
    b_lo: f64,
    b_hi: f64,
    d_lo: f64,
    d_hi: f64,
    envelope_inf: Option<f64>,
    envelope_sup: Option<f64>,
    quadrature_halving_delta: f64,
    uniform_substitution: bool,
}

impl From<ConstantsReport> for ConstantsJson {
    fn from(r: ConstantsReport) -> Self {
        Self {
            lambda: r.lambda,
            n: r.horizon_n,
            m: r.resolution_m,
            tail_method: r.tail_method,
            c_lo: r.c.lo,
            c_hi: r.c.hi,
            b_lo: r.b.lo,
            b_hi: r.b.hi,
            d_lo: r.d.lo,
            d_hi: r.d.hi,
            envelope_inf: r.envelope_inf,
            envelope_sup: r.envelope_sup,
            quadrature_halving_delta: r.quadrature_halving_delta,
            uniform_substitution: r.uniform_substitution,
        }
    }
}

fn cmd_constants(lambda: f64, n: usize, m: usize, tail: TailMethod) -> CmdResult {
    let report = compute_report(lambda, n, m, tail)?;
    let json = serde_json::to_string_pretty(&ConstantsJson::from(report)).context("serializing report")?;
    println!("{json}");
    Ok(ExitCode::SUCCESS)
}

fn sweep_method(lambda: f64, forced: Option<TailMethod>) -> TailMethod {
    forced.unwrap_or(if lambda < 3.0 { TailMethod::Envelope } else { TailMethod::Crude })
}

fn cmd_sweep(lo: f64, hi: f64, steps: usize, n: usize, m: usize, tail: Option<TailMethod>) -> CmdResult {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Failure::Usage(format!("--lambda-min must be below --lambda-max, got {lo} and {hi}")));
    }
    if steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let lambdas: Vec<f64> = if steps == 1 {
        vec![lo]
    } else {
        (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
    };
    let mut out = io::BufWriter::new(io::stdout().lock());
    writeln!(out, "lambda,c_lo,c_hi,b_lo,b_hi,d_lo,d_hi,method")?;
    for lambda in lambdas {
        let method = sweep_method(lambda, tail);
        let r = compute_brackets(lambda, n, m, method)?;
        let nums = [lambda, r.c.lo, r.c.hi, r.b.lo, r.b.hi, r.d.lo, r.d.hi].map(fmt17);
        writeln!(out, "{},{}", nums.join(","), method.name())?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SimulateJson {
    lambda: f64,
    length: f64,
    seed: u64,
    #[serde(flatten)]
    stats: SimStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<ZJson>,
}

#[derive(Serialize)]
struct ZJson {
    m_ref: f64,
    var_ref: f64,
    skewness: f64,
    excess_kurtosis: f64,
}

/// Reference horizon up to which mean and variance come from solved grids;
/// beyond it the asymptotic lines are used.
const ZREF_SOLVE_LIMIT: f64 = 40.0;

fn reference_moments(lambda: f64, length: f64) -> Result<(f64, f64), Failure> {
    if length <= ZREF_SOLVE_LIMIT {
        let n = (length.ceil() as usize).max(3);
        let p = Params::new(lambda, n, 128)?;
        let m = solve_m(&p);
        let m2 = solve_m2(&p, &m)?;
        let mean = m.value_at(length)?;
        Ok((mean, m2.value_at(length)? - mean * mean))
    } else {
        let r = compute_brackets(lambda, 12, 256, TailMethod::Envelope)?;
        Ok((length * r.c.midpoint() + r.b.midpoint(), length * r.d.midpoint()))
    }
}

fn cmd_simulate(lambda: f64, length: f64, trials: u64, seed: u64, zref: bool) -> CmdResult {
    let config = SimConfig::new(lambda, length, trials, seed)?;
    let stats = run_mc(&config);
    let z = if zref {
        let (m_ref, var_ref) = reference_moments(lambda, length)?;
        let (skewness, excess_kurtosis) = z_moments(&stats, m_ref, var_ref)?;
        Some(ZJson { m_ref, var_ref, skewness, excess_kurtosis })
    } else {
        None
    };
    let json = serde_json::to_string_pretty(&SimulateJson { lambda, length, seed, stats, z }).context("serializing statistics")?;
    println!("{json}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(opts: ValidationOptions) -> CmdResult {
    let reports = run_all(&opts);
    let mut out = io::stdout().lock();
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} passed, {failed} failed", reports.len() - failed)?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
