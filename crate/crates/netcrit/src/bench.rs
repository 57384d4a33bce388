//! Refinement sweeps, algorithm comparisons and their CSV artifacts.
//!
//! A [`RunSpec`] names a case (built-in or a network file plus a uniform
//! model), an algorithm, a decreasing list of `dx` and the rules that turn
//! each `dx` into a time step and a tolerance. [`run`] produces one
//! [`RunRow`] per `dx`; [`compare`] pairs the iteration counts of two specs.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmarks::{by_name, delta_t_policy, BenchmarkCase, DtPolicy, KnownCritical};
use crate::critical::{self, Algorithm, AlgorithmParams, CriticalRunResult, StopMode};
use crate::error::{Error, Result};
use crate::hamiltonians::{ArcHamiltonian, HamiltonianModel};
use crate::network::{build_grid, NetworkFile};
use crate::scheme::{Scheme, SolverConfig};

/// Environment variable read by the CLI for the worker thread count.
pub const THREADS_ENV: &str = "NETCRIT_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseSource {
    /// Registry name such as `triangle-dep`.
    Named(String),
    /// Network description file with a uniform model on every arc.
    File {
        network: PathBuf,
        model: String,
        beta0: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonRule {
    FractionOfDx(f64),
    Absolute(f64),
}

impl EpsilonRule {
    pub fn resolve(self, dx: f64) -> f64 {
        match self {
            EpsilonRule::FractionOfDx(f) => f * dx,
            EpsilonRule::Absolute(e) => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    #[default]
    Tolerance,
    FixedK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub case: CaseSource,
    /// 1 (time average) or 2 (layer increment).
    pub algorithm: u8,
    pub dx_list: Vec<f64>,
    #[serde(default = "default_policy")]
    pub dt_policy: DtPolicy,
    #[serde(default = "default_epsilon")]
    pub epsilon: EpsilonRule,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub fixed_k: Option<usize>,
    /// Cap in tolerance mode.
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub trace: Option<PathBuf>,
    /// Outer iterations `k` whose layers `v(., kT)` are written to `snapshots`.
    #[serde(default)]
    pub snapshot_times: Vec<usize>,
    #[serde(default)]
    pub snapshots: Option<PathBuf>,
    /// Writes zero wall times so identical specs give identical files.
    #[serde(default)]
    pub deterministic: bool,
}

fn default_policy() -> DtPolicy {
    DtPolicy::Beta0Ratio
}

fn default_epsilon() -> EpsilonRule {
    EpsilonRule::FractionOfDx(0.1)
}

impl RunSpec {
    pub fn new(case: &str, algorithm: u8, dx_list: Vec<f64>) -> Self {
        Self {
            case: CaseSource::Named(case.into()),
            algorithm,
            dx_list,
            dt_policy: default_policy(),
            epsilon: default_epsilon(),
            mode: RunMode::Tolerance,
            fixed_k: None,
            max_iterations: None,
            output: None,
            trace: None,
            snapshot_times: Vec::new(),
            snapshots: None,
            deterministic: false,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        Algorithm::from_number(self.algorithm)?;
        if self.dx_list.is_empty() {
            return Err(Error::Config("dx_list is empty".into()));
        }
        if self
            .dx_list
            .iter()
            .any(|&dx| !(dx > 0.0) || !dx.is_finite())
        {
            return Err(Error::Config("dx values must be positive".into()));
        }
        if self.dx_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("dx_list must be strictly decreasing".into()));
        }
        match self.mode {
            RunMode::FixedK if !matches!(self.fixed_k, Some(k) if k > 0) => {
                return Err(Error::Config("fixed-k mode needs fixed_k > 0".into()));
            }
            RunMode::Tolerance => {
                let eps = match self.epsilon {
                    EpsilonRule::FractionOfDx(f) | EpsilonRule::Absolute(f) => f,
                };
                if !(eps > 0.0) || !eps.is_finite() {
                    return Err(Error::Config(format!(
                        "epsilon must be positive, got {eps}"
                    )));
                }
            }
            _ => {}
        }
        if !self.snapshot_times.is_empty() && self.snapshots.is_none() {
            return Err(Error::Config("snapshot_times need a snapshots path".into()));
        }
        Ok(())
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub case: String,
    pub algorithm: u8,
    pub dx: f64,
    /// Effective step `T / ceil(T / dt)`.
    pub dt: f64,
    pub epsilon: f64,
    pub k: usize,
    pub c_estimate: f64,
    pub c_reference: Option<f64>,
    pub abs_error: Option<f64>,
    pub stop_reason: String,
    pub wall_ms: f64,
}

/// One line of a convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub dx: f64,
    pub k: usize,
    pub upper: f64,
    pub lower: f64,
    pub midpoint: f64,
    pub half_gap: f64,
    pub error_vs_reference: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SnapshotRow {
    dx: f64,
    k: usize,
    t: f64,
    node: usize,
    value: f64,
}

/// A full row: the table line plus the underlying run.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub row: RunRow,
    pub result: CriticalRunResult,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<RowOutcome>,
    /// `(dx, error)` for rows that failed.
    pub failures: Vec<(f64, Error)>,
}

impl RunReport {
    pub fn table(&self) -> Vec<RunRow> {
        self.rows.iter().map(|r| r.row.clone()).collect()
    }
}

/// Uniform model `mu^2 / 2 + b` on every arc of a user network; `c = b`.
fn uniform_case(path: &Path, model: &str, beta0: f64) -> Result<BenchmarkCase> {
    let offset = match model.split_once(':') {
        None if model == "quadratic" => 0.0,
        Some(("quadratic-offset", b)) => b
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad offset in model {model:?}")))?,
        _ => {
            return Err(Error::Config(format!(
                "unknown model {model:?}; expected quadratic or quadratic-offset:<b>"
            )))
        }
    };
    let network = NetworkFile::load(path)?.build()?;
    let arcs = (0..network.num_arcs())
        .map(|_| ArcHamiltonian::quadratic(0.5, |_| 0.0, move |_| offset))
        .collect();
    let model = HamiltonianModel::new(model, &network, arcs, beta0)?;
    Ok(BenchmarkCase {
        name: format!("{}:{}", path.display(), model.name()),
        network,
        model,
        beta0,
        known: KnownCritical::Exact(offset),
        default_policies: vec![DtPolicy::Beta0Ratio],
    })
}

pub fn resolve_case(source: &CaseSource) -> Result<BenchmarkCase> {
    match source {
        CaseSource::Named(name) => by_name(name),
        CaseSource::File {
            network,
            model,
            beta0,
        } => uniform_case(network, model, *beta0),
    }
}

/// Runs one refinement level of `spec` on `case`.
pub fn run_row(spec: &RunSpec, case: &BenchmarkCase, dx: f64) -> Result<RowOutcome> {
    let algorithm = Algorithm::from_number(spec.algorithm)?;
    let dt = delta_t_policy(spec.dt_policy, &case.network, dx, case.beta0);
    let grid = build_grid(
        &case.network,
        dx,
        dt,
        1.0,
        case.beta0,
        spec.dt_policy.is_admissible(),
    )?;
    let bounds = case.model.compute_critical_bounds(&case.network)?;
    let scheme = Scheme::new(&case.model, &grid, SolverConfig::from_bounds(&bounds))?;
    let epsilon = spec.epsilon.resolve(dx);
    let mut params = match spec.mode {
        RunMode::Tolerance => AlgorithmParams::tolerance(epsilon),
        RunMode::FixedK => AlgorithmParams::fixed_iterations(spec.fixed_k.unwrap_or(0)),
    };
    if spec.mode == RunMode::Tolerance {
        params.max_iterations = spec.max_iterations;
    }
    params.snapshot_iterations = spec.snapshot_times.clone();
    let result = critical::run(&scheme, bounds.a0, &params, algorithm)?;
    let reference = case.target();
    let row = RunRow {
        case: case.name.clone(),
        algorithm: spec.algorithm,
        dx,
        dt: grid.time_step(),
        epsilon: if params.mode == StopMode::Tolerance {
            epsilon
        } else {
            0.0
        },
        k: result.iterations,
        c_estimate: result.estimate,
        c_reference: reference,
        abs_error: reference.map(|c| (result.estimate - c).abs()),
        stop_reason: result.stop_reason.as_str().into(),
        wall_ms: if spec.deterministic {
            0.0
        } else {
            result.wall_ms()
        },
    };
    Ok(RowOutcome { row, result })
}

/// Runs every `dx` of `spec`; failing rows are collected, not fatal.
pub fn run(spec: &RunSpec) -> Result<RunReport> {
    spec.validate()?;
    let case = resolve_case(&spec.case)?;
    let mut report = RunReport::default();
    for &dx in &spec.dx_list {
        match run_row(spec, &case, dx) {
            Ok(outcome) => report.rows.push(outcome),
            Err(e) => report.failures.push((dx, e)),
        }
    }
    Ok(report)
}

pub fn trace_rows(outcome: &RowOutcome, deterministic: bool) -> Vec<TraceRow> {
    let r = &outcome.result;
    let reference = outcome.row.c_reference;
    (0..r.iterations)
        .map(|i| {
            let midpoint = 0.5 * (r.upper_seq[i] + r.lower_seq[i]);
            TraceRow {
                dx: outcome.row.dx,
                k: i + 1,
                upper: r.upper_seq[i],
                lower: r.lower_seq[i],
                midpoint,
                half_gap: r.half_gap_seq[i],
                error_vs_reference: reference.map(|c| (midpoint - c).abs()),
                wall_ms: if deterministic { 0.0 } else { r.elapsed_ms[i] },
            }
        })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_records<T: Serialize>(out: impl Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the results table with its header row.
pub fn write_table(out: impl Write, rows: &[RunRow]) -> Result<()> {
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "case",
            "algorithm",
            "dx",
            "dt",
            "epsilon",
            "k",
            "c_estimate",
            "c_reference",
            "abs_error",
            "stop_reason",
            "wall_ms",
        ])
        .map_err(csv_error)?;
        w.flush()?;
        return Ok(());
    }
    write_records(out, rows)
}

pub fn write_trace(out: impl Write, rows: &[TraceRow]) -> Result<()> {
    write_records(out, rows)
}

pub fn write_snapshots(out: impl Write, report: &RunReport) -> Result<()> {
    let mut rows = Vec::new();
    for o in &report.rows {
        for (k, layer) in &o.result.snapshots {
            for (node, &value) in layer.values().iter().enumerate() {
                rows.push(SnapshotRow {
                    dx: o.row.dx,
                    k: *k,
                    t: *k as f64 * o.result.outer_period,
                    node,
                    value,
                });
            }
        }
    }
    write_records(out, &rows)
}

pub fn read_table(input: impl std::io::Read) -> Result<Vec<RunRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<RunRow>, _>>()
        .map_err(csv_error)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the table, trace and snapshot files requested by `spec`.
pub fn write_artifacts(spec: &RunSpec, report: &RunReport) -> Result<()> {
    if let Some(path) = &spec.output {
        write_table(create(path)?, &report.table())?;
    }
    if let Some(path) = &spec.trace {
        let rows: Vec<TraceRow> = report
            .rows
            .iter()
            .flat_map(|o| trace_rows(o, spec.deterministic))
            .collect();
        write_trace(create(path)?, &rows)?;
    }
    if let Some(path) = &spec.snapshots {
        write_snapshots(create(path)?, report)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub dx: f64,
    pub k_a: usize,
    pub k_b: usize,
    /// `100 (1 - k_b / k_a)`.
    pub reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub mean_reduction_pct: f64,
}

/// Runs both specs and pairs their iteration counts per `dx`.
pub fn compare(spec_a: &RunSpec, spec_b: &RunSpec) -> Result<Comparison> {
    if spec_a.case != spec_b.case || spec_a.dx_list != spec_b.dx_list {
        return Err(Error::Config(
            "compared specs must share the case and the dx list".into(),
        ));
    }
    let a = run(spec_a)?;
    let b = run(spec_b)?;
    if let Some((_, e)) = a.failures.into_iter().chain(b.failures).next() {
        return Err(e);
    }
    let rows: Vec<CompareRow> = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(x, y)| CompareRow {
            dx: x.row.dx,
            k_a: x.row.k,
            k_b: y.row.k,
            reduction_pct: 100.0 * (1.0 - y.row.k as f64 / x.row.k as f64),
        })
        .collect();
    let mean_reduction_pct = rows.iter().map(|r| r.reduction_pct).sum::<f64>() / rows.len() as f64;
    Ok(Comparison {
        rows,
        mean_reduction_pct,
    })
}

/// Writes the paired rows followed by a `mean` row.
pub fn write_comparison(out: impl Write, cmp: &Comparison) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dx", "k_a", "k_b", "reduction_pct"])
        .map_err(csv_error)?;
    for r in &cmp.rows {
        w.write_record([
            r.dx.to_string(),
            r.k_a.to_string(),
            r.k_b.to_string(),
            format!("{:.2}", r.reduction_pct),
        ])
        .map_err(csv_error)?;
    }
    w.write_record([
        "mean".to_string(),
        String::new(),
        String::new(),
        format!("{:.2}", cmp.mean_reduction_pct),
    ])
    .map_err(csv_error)?;
    w.flush()?;
    Ok(())
}

/// Process exit code for an error: 1 for configuration, 2 for numerics.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFiniteLayer { .. }
        | Error::NonCoercive { .. }
        | Error::EmptyFeasibleSet { .. } => 2,
        _ => 1,
    }
}
