use std::path::PathBuf;
use std::process::ExitCode;

use chirplab::experiments::{
    emit, emit_reports, run_bump_check, run_identities, run_records, run_select_a, Context, Format, J0Policy,
    RunConfig, Scenario, WORKERS_ENV,
};
use chirplab::signal::BumpKind;
use chirplab::{Error, Report};
use clap::{Args, Parser, Subcommand};

/// Chirp potentials, multilinear scattering expansions and exact transfer
/// matrices for the 1D Dirac system.
#[derive(Parser, Debug)]
#[command(name = "chirplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bump normalization, transform bounds and the block-transform closed form.
    BumpCheck(Common),
    /// Search for A and re-check its condition on a finer grid.
    SelectA(Common),
    /// Growth of |T2(F,F)| with N: region point, sup over x, weak-L2 estimator.
    T2max(Common),
    /// Growth of |T3(F,F,F)(k,+inf)| with N and its four-way split.
    T3inf(Common),
    /// Exact |a|, |b| of the scattering problem over the same runs as t2max.
    Bounded(Common),
    /// The consolidated identity battery on a single N.
    Verify(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Comma-separated perfect squares >= 16.
    #[arg(long, value_name = "N,N,...")]
    n_list: Option<String>,
    /// j0 as a fraction of N (e.g. 1.75) or a fixed integer index.
    #[arg(long)]
    j0: Option<String>,
    /// Grid refinement over the phase-resolution bound.
    #[arg(long, default_value_t = RunConfig::DEFAULT_OVERSAMPLE)]
    oversample: f64,
    /// Tolerance overrides, `name=value[,name=value]`.
    #[arg(long, value_name = "NAME=VALUE,...")]
    tol: Option<String>,
    /// Use this A instead of searching for it.
    #[arg(long)]
    a_override: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads; defaults to the environment variable, then the core count.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Directory for W_m and a/b profile CSVs.
    #[arg(long, value_name = "DIR")]
    dump_profiles: Option<PathBuf>,
    /// Keep every n-th node in dumped profiles.
    #[arg(long, default_value_t = 64)]
    profile_stride: usize,
    /// Fill the walltime_ms column (output then varies between runs).
    #[arg(long)]
    timing: bool,
    #[arg(long, default_value = "exp")]
    bump: String,
    /// k samples of the weak-L2 estimator on [A, 2A].
    #[arg(long, default_value_t = RunConfig::DEFAULT_WEAK_POINTS)]
    weak_points: usize,
}

fn config(scenario: Scenario, c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::new(scenario);
    if let Some(list) = &c.n_list {
        cfg.n_list = RunConfig::parse_n_list(list)?;
    }
    if let Some(j0) = &c.j0 {
        cfg.j0 = Some(j0.parse::<J0Policy>()?);
    }
    cfg.oversample = c.oversample;
    if let Some(t) = &c.tol {
        cfg.tolerances.apply(t)?;
    }
    cfg.a_override = c.a_override;
    cfg.out = c.out.clone();
    cfg.format = c.format.parse::<Format>()?;
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    cfg.dump_profiles = c.dump_profiles.clone();
    cfg.profile_stride = c.profile_stride;
    cfg.timing = c.timing;
    cfg.bump = c.bump.parse::<BumpKind>()?;
    cfg.weak_points = c.weak_points;
    cfg.validate()?;
    Ok(cfg)
}

fn reports_exit(reports: &[Report]) -> ExitCode {
    if reports.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(scenario: Scenario, common: &Common) -> Result<ExitCode, Error> {
    let cfg = config(scenario, common)?;
    let out = cfg.out.as_deref();
    match scenario {
        Scenario::SelectA => {
            let reports = run_select_a(&cfg)?;
            emit_reports(&reports, cfg.format, out)?;
            Ok(reports_exit(&reports))
        }
        Scenario::BumpCheck => {
            let reports = run_bump_check(&cfg, &Context::new(&cfg)?)?;
            emit_reports(&reports, cfg.format, out)?;
            Ok(reports_exit(&reports))
        }
        Scenario::Identities => {
            let reports = run_identities(&cfg, &Context::new(&cfg)?)?;
            emit_reports(&reports, cfg.format, out)?;
            Ok(reports_exit(&reports))
        }
        Scenario::T2Growth | Scenario::T3Growth | Scenario::Boundedness => {
            let records = run_records(&cfg, &Context::new(&cfg)?)?;
            emit(&records, cfg.format, out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, common) = match &cli.command {
        Command::BumpCheck(c) => (Scenario::BumpCheck, c),
        Command::SelectA(c) => (Scenario::SelectA, c),
        Command::T2max(c) => (Scenario::T2Growth, c),
        Command::T3inf(c) => (Scenario::T3Growth, c),
        Command::Bounded(c) => (Scenario::Boundedness, c),
        Command::Verify(c) => (Scenario::Identities, c),
    };
    match run(scenario, common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("chirplab {}: {e}", scenario.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
