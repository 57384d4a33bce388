//! Critical value estimates from the large-time behavior of the scheme.
//!
//! Both algorithms evolve `v(., kT)` by whole outer periods and bracket `c`
//! between an upper and a lower sequence:
//!
//! * time average: `(phi - v(., kT)) / (kT)`,
//! * layer increment: `(v(., (k-1)T) - v(., kT)) / T`.
//!
//! The raw extrema are improved monotonically (the upper bound never grows,
//! the lower bound never drops below its previous value or `a0`) and the run
//! stops once the gap is below `2 eps`. The estimate is the midpoint.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::HamiltonianModel;
use crate::network::{GridFunction, Network, SpaceTimeGrid};
use crate::scheme::{Scheme, SolverConfig};

/// Iteration cap used in tolerance mode when none is given.
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Bounds from `(phi - v(., kT)) / (kT)`; a priori error `O(1/k)`.
    TimeAverage,
    /// Bounds from successive layers `(v(., (k-1)T) - v(., kT)) / T`.
    Increment,
}

impl Algorithm {
    pub fn number(self) -> u8 {
        match self {
            Algorithm::TimeAverage => 1,
            Algorithm::Increment => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Algorithm::TimeAverage),
            2 => Ok(Algorithm::Increment),
            _ => Err(Error::Config(format!(
                "unknown algorithm {n}, expected 1 or 2"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMode {
    /// Stop once `upper - lower < 2 eps` or at `max_iterations`.
    Tolerance,
    /// Run exactly `max_iterations` iterations.
    FixedIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ToleranceMet,
    IterationCap,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::ToleranceMet => "tolerance_met",
            StopReason::IterationCap => "iteration_cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmParams {
    /// `phi`; zero when absent.
    pub initial_datum: Option<GridFunction>,
    /// Outer period `T`; must equal the grid horizon.
    pub outer_period: f64,
    /// `eps`.
    pub tolerance: f64,
    pub max_iterations: Option<usize>,
    pub mode: StopMode,
    /// Iterations `k` whose layers `v(., kT)` are kept.
    pub snapshot_iterations: Vec<usize>,
}

impl AlgorithmParams {
    pub fn tolerance(eps: f64) -> Self {
        Self {
            initial_datum: None,
            outer_period: 1.0,
            tolerance: eps,
            max_iterations: None,
            mode: StopMode::Tolerance,
            snapshot_iterations: Vec::new(),
        }
    }

    pub fn fixed_iterations(k: usize) -> Self {
        Self {
            initial_datum: None,
            outer_period: 1.0,
            tolerance: 0.0,
            max_iterations: Some(k),
            mode: StopMode::FixedIterations,
            snapshot_iterations: Vec::new(),
        }
    }

    pub fn with_initial_datum(mut self, phi: GridFunction) -> Self {
        self.initial_datum = Some(phi);
        self
    }

    pub fn with_max_iterations(mut self, k: usize) -> Self {
        self.max_iterations = Some(k);
        self
    }

    pub fn with_outer_period(mut self, t: f64) -> Self {
        self.outer_period = t;
        self
    }

    fn cap(&self) -> Result<usize> {
        match (self.mode, self.max_iterations) {
            (_, Some(0)) => Err(Error::InvalidParameter {
                name: "max_iterations",
                value: 0.0,
            }),
            (StopMode::FixedIterations, None) => Err(Error::Config(
                "fixed-iteration mode needs max_iterations".into(),
            )),
            (_, Some(k)) => Ok(k),
            (StopMode::Tolerance, None) => Ok(DEFAULT_MAX_ITERATIONS),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRunResult {
    pub algorithm: Algorithm,
    /// Midpoint of the final bracket.
    pub estimate: f64,
    /// Improved upper bounds, one per iteration.
    pub upper_seq: Vec<f64>,
    /// Improved lower bounds, one per iteration.
    pub lower_seq: Vec<f64>,
    pub half_gap_seq: Vec<f64>,
    /// Unimproved extrema.
    pub raw_upper_seq: Vec<f64>,
    pub raw_lower_seq: Vec<f64>,
    /// Cumulative wall time in milliseconds after each iteration.
    pub elapsed_ms: Vec<f64>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub a0: f64,
    pub outer_period: f64,
    /// `v(., kT)`.
    pub final_layer: GridFunction,
    /// `v(., (k-1)T)`.
    pub previous_layer: GridFunction,
    /// `(k, v(., kT))` for the requested snapshot iterations that were reached.
    pub snapshots: Vec<(usize, GridFunction)>,
}

impl CriticalRunResult {
    pub fn midpoints(&self) -> Vec<f64> {
        self.upper_seq
            .iter()
            .zip(&self.lower_seq)
            .map(|(u, l)| 0.5 * (u + l))
            .collect()
    }

    pub fn wall_ms(&self) -> f64 {
        self.elapsed_ms.last().copied().unwrap_or(0.0)
    }
}

/// Max and min of `(a - b) * scale` in node order.
fn extrema(a: &[f64], b: &[f64], scale: f64) -> (f64, f64) {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * scale)
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), v| {
            (hi.max(v), lo.min(v))
        })
}

/// Runs `algorithm` on a prepared scheme with lower bound `a0`.
pub fn run(
    scheme: &Scheme<'_>,
    a0: f64,
    params: &AlgorithmParams,
    algorithm: Algorithm,
) -> Result<CriticalRunResult> {
    let grid = scheme.grid();
    let t = params.outer_period;
    if !(t > 0.0) || (t - grid.horizon()).abs() > 1e-12 * grid.horizon() {
        return Err(Error::PeriodMismatch {
            params: t,
            grid: grid.horizon(),
        });
    }
    if params.mode == StopMode::Tolerance && !(params.tolerance > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            value: params.tolerance,
        });
    }
    let cap = params.cap()?;
    let phi = match &params.initial_datum {
        Some(phi) => phi.clone(),
        None => GridFunction::zeros(grid),
    };
    if phi.len() != grid.num_nodes() {
        return Err(Error::LayerSize {
            expected: grid.num_nodes(),
            found: phi.len(),
        });
    }
    phi.check_finite()?;

    let steps = grid.num_time_layers();
    let start = Instant::now();
    let mut out = CriticalRunResult {
        algorithm,
        estimate: f64::NAN,
        upper_seq: Vec::new(),
        lower_seq: Vec::new(),
        half_gap_seq: Vec::new(),
        raw_upper_seq: Vec::new(),
        raw_lower_seq: Vec::new(),
        elapsed_ms: Vec::new(),
        iterations: 0,
        stop_reason: StopReason::IterationCap,
        a0,
        outer_period: t,
        final_layer: phi.clone(),
        previous_layer: phi.clone(),
        snapshots: Vec::new(),
    };
    if params.snapshot_iterations.contains(&0) {
        out.snapshots.push((0, phi.clone()));
    }
    let mut upper: Option<f64> = None;
    let mut lower = a0;
    let mut prev = phi.clone();
    for k in 1..=cap {
        let cur = scheme.advance(&prev, steps)?;
        let (raw_hi, raw_lo) = match algorithm {
            Algorithm::TimeAverage => extrema(phi.values(), cur.values(), 1.0 / (k as f64 * t)),
            Algorithm::Increment => extrema(prev.values(), cur.values(), 1.0 / t),
        };
        let u = upper.map_or(raw_hi, |u| u.min(raw_hi));
        upper = Some(u);
        lower = lower.max(raw_lo);

        out.raw_upper_seq.push(raw_hi);
        out.raw_lower_seq.push(raw_lo);
        out.upper_seq.push(u);
        out.lower_seq.push(lower);
        out.half_gap_seq.push(0.5 * (u - lower));
        out.elapsed_ms.push(start.elapsed().as_secs_f64() * 1e3);
        out.iterations = k;
        if params.snapshot_iterations.contains(&k) {
            out.snapshots.push((k, cur.clone()));
        }
        out.previous_layer = std::mem::replace(&mut prev, cur);

        let gap = u - lower;
        let met = match params.mode {
            StopMode::Tolerance => gap < 2.0 * params.tolerance,
            StopMode::FixedIterations => false,
        };
        if met || gap <= 0.0 {
            out.stop_reason = StopReason::ToleranceMet;
            break;
        }
    }
    out.final_layer = prev;
    out.estimate = 0.5 * (upper.expect("at least one iteration") + lower);
    Ok(out)
}

fn run_on(
    model: &HamiltonianModel,
    net: &Network,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
    params: &AlgorithmParams,
    algorithm: Algorithm,
) -> Result<CriticalRunResult> {
    let bounds = model.compute_critical_bounds(net)?;
    let scheme = Scheme::new(model, grid, config.clone())?;
    run(&scheme, bounds.a0, params, algorithm)
}

/// Time-average estimate.
pub fn algorithm1(
    model: &HamiltonianModel,
    net: &Network,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
    params: &AlgorithmParams,
) -> Result<CriticalRunResult> {
    run_on(model, net, grid, config, params, Algorithm::TimeAverage)
}

/// Layer-increment estimate.
pub fn algorithm2(
    model: &HamiltonianModel,
    net: &Network,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
    params: &AlgorithmParams,
) -> Result<CriticalRunResult> {
    run_on(model, net, grid, config, params, Algorithm::Increment)
}

/// `v(., kT) + c kT`, an approximate solution of the critical equation.
pub fn corrector_estimate(
    result: &CriticalRunResult,
    final_layer: &GridFunction,
    k: usize,
    outer_period: f64,
) -> GridFunction {
    final_layer.shifted(result.estimate * k as f64 * outer_period)
}
