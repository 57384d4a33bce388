use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netcrit::bench::{self, CaseSource, EpsilonRule, RunMode, RunReport, RunSpec, THREADS_ENV};
use netcrit::benchmarks::{by_name, DtPolicy, KnownCritical, CASE_NAMES};
use netcrit::Error;

/// Critical values of eikonal equations on networks.
#[derive(Parser)]
#[command(name = "netcrit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep dx for one case and algorithm, writing a CSV table.
    Run(RunArgs),
    /// Run algorithms 1 and 2 on the same sweep and report the iteration reduction.
    Compare(CompareArgs),
    /// List the built-in cases.
    Cases,
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// TOML run spec; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in case name.
    #[arg(long, conflicts_with = "network")]
    case: Option<String>,
    /// Network description file (TOML).
    #[arg(long, requires_all = ["model", "beta0"])]
    network: Option<PathBuf>,
    /// Model on every arc of --network: quadratic or quadratic-offset:<b>.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    beta0: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    dx: Option<Vec<f64>>,
    /// beta0-ratio, half-dx or dx-56.
    #[arg(long)]
    dt_policy: Option<DtPolicy>,
    /// eps = fraction * dx.
    #[arg(long, conflicts_with = "epsilon")]
    epsilon_fraction: Option<f64>,
    /// Absolute eps.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Run exactly this many outer iterations.
    #[arg(long)]
    fixed_k: Option<usize>,
    /// Iteration cap in tolerance mode.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Write zero wall times for reproducible files.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// 1 (time average) or 2 (layer increment).
    #[arg(long)]
    algorithm: Option<u8>,
    /// Results table; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-iteration convergence trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Layers v(., kT) for the listed k.
    #[arg(long)]
    snapshots: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Option<Vec<usize>>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Baseline spec file; pairs with --config-b instead of the shared flags.
    #[arg(long, requires = "config_b", conflicts_with = "config")]
    config_a: Option<PathBuf>,
    #[arg(long, requires = "config_a")]
    config_b: Option<PathBuf>,
    /// Comparison table; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl SpecArgs {
    fn build(&self, algorithm: Option<u8>) -> Result<RunSpec, Error> {
        let mut spec = match &self.config {
            Some(path) => RunSpec::load(path)?,
            None => {
                let case = match (&self.case, &self.network) {
                    (Some(name), _) => CaseSource::Named(name.clone()),
                    (None, Some(path)) => CaseSource::File {
                        network: path.clone(),
                        model: self.model.clone().unwrap_or_default(),
                        beta0: self.beta0.unwrap_or(f64::NAN),
                    },
                    (None, None) => {
                        return Err(Error::Config("need --config, --case or --network".into()))
                    }
                };
                let dx = self
                    .dx
                    .clone()
                    .ok_or_else(|| Error::Config("need --dx".into()))?;
                RunSpec {
                    case,
                    ..RunSpec::new("", algorithm.unwrap_or(2), dx)
                }
            }
        };
        if self.config.is_some() {
            if let Some(name) = &self.case {
                spec.case = CaseSource::Named(name.clone());
            }
            if let Some(dx) = &self.dx {
                spec.dx_list = dx.clone();
            }
        }
        if let Some(a) = algorithm {
            spec.algorithm = a;
        }
        if let Some(p) = self.dt_policy {
            spec.dt_policy = p;
        }
        if let Some(f) = self.epsilon_fraction {
            spec.epsilon = EpsilonRule::FractionOfDx(f);
        }
        if let Some(e) = self.epsilon {
            spec.epsilon = EpsilonRule::Absolute(e);
        }
        if let Some(k) = self.fixed_k {
            spec.mode = RunMode::FixedK;
            spec.fixed_k = Some(k);
        }
        if let Some(k) = self.max_iterations {
            spec.max_iterations = Some(k);
        }
        spec.deterministic |= self.deterministic;
        spec.validate()?;
        Ok(spec)
    }
}

fn report_failures(report: &RunReport) -> bool {
    for (dx, e) in &report.failures {
        eprintln!("netcrit: row dx = {dx} failed: {e}");
    }
    report.failures.is_empty()
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode, Error> {
    let mut spec = args.spec.build(args.algorithm)?;
    if args.output.is_some() {
        spec.output = args.output.clone();
    }
    if args.trace.is_some() {
        spec.trace = args.trace.clone();
    }
    if args.snapshots.is_some() {
        spec.snapshots = args.snapshots.clone();
    }
    if let Some(k) = &args.snapshot_times {
        spec.snapshot_times = k.clone();
    }
    spec.validate()?;
    let report = bench::run(&spec)?;
    bench::write_artifacts(&spec, &report)?;
    if spec.output.is_none() {
        bench::write_table(io::stdout().lock(), &report.table())?;
    }
    Ok(if report_failures(&report) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn quiet(spec: RunSpec) -> RunSpec {
    RunSpec {
        output: None,
        trace: None,
        snapshots: None,
        snapshot_times: Vec::new(),
        ..spec
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<ExitCode, Error> {
    let (a, b) = match (&args.config_a, &args.config_b) {
        (Some(pa), Some(pb)) => (RunSpec::load(pa)?, RunSpec::load(pb)?),
        _ => {
            let a = args.spec.build(Some(1))?;
            let b = RunSpec {
                algorithm: 2,
                ..a.clone()
            };
            (a, b)
        }
    };
    a.validate()?;
    b.validate()?;
    let cmp = bench::compare(&quiet(a), &quiet(b))?;
    match &args.output {
        Some(path) => bench::write_comparison(
            std::fs::File::create(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
            &cmp,
        )?,
        None => bench::write_comparison(io::stdout().lock(), &cmp)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_cases() -> Result<ExitCode, Error> {
    println!("name,beta0,critical_value,kind");
    for name in CASE_NAMES {
        let case = by_name(name)?;
        let (value, kind) = match &case.known {
            KnownCritical::Exact(c) => (c.to_string(), "exact"),
            KnownCritical::Reference { value, .. } => (value.to_string(), "reference"),
            KnownCritical::Unknown => (String::new(), "unknown"),
        };
        println!("{name},{},{value},{kind}", case.beta0);
    }
    Ok(ExitCode::SUCCESS)
}

fn init_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} = {raw:?} is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = init_threads().and_then(|()| match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Cases => cmd_cases(),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("netcrit: {e}");
            ExitCode::from(bench::exit_code(&e) as u8)
        }
    }
}
