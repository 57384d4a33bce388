//! Semi-Lagrangian scheme on the network grid.
//!
//! At an arc node `s` the update is
//!
//! ```text
//! S[f](s) = min_{lambda in Lambda(s)} I[f](s - dt lambda) + dt L~(s, lambda),
//! Lambda(s) = [max((s - |arc|) / dt, -beta0), min(s / dt, beta0)]
//! ```
//!
//! and a vertex takes the smallest update over its incident arcs, clipped by
//! `f(x) - c_x dt`. Arcs whose head is the vertex are evaluated at
//! `s = |arc|` of the stored orientation, which by the compatibility identity
//! equals the reverse-direction update at `s = 0`.
//!
//! The objective is convex in `lambda` between consecutive breakpoints where
//! the foot `s - dt lambda` crosses a grid node. The [`Minimizer::Exact`]
//! strategy evaluates every breakpoint and, on each piece with interpolant
//! slope `p`, the stationary point `lambda* = dH/dmu(s, p)` through the
//! Fenchel identity. [`Minimizer::Sampled`] scans breakpoints plus uniform
//! fill-ins and refines the winning bracket by golden section.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{CriticalBounds, Direction, HamiltonianModel};
use crate::network::{GridFunction, Network, SpaceTimeGrid};
use crate::optim::golden_section;

pub const DEFAULT_LAMBDA_SAMPLES: usize = 16;
pub const DEFAULT_REFINE_ITERATIONS: usize = 60;
/// Grids with at least this many nodes update arcs on the rayon pool.
pub const PARALLEL_MIN_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Minimizer {
    #[default]
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Uniform fill-in slopes for the sampled minimizer (at least 3).
    pub lambda_samples: usize,
    /// Golden-section steps inside the winning bracket (sampled minimizer).
    pub refine_iterations: usize,
    /// `c_x` per vertex.
    pub flux_limiters: Vec<f64>,
    pub minimizer: Minimizer,
}

impl SolverConfig {
    pub fn new(flux_limiters: Vec<f64>) -> Self {
        Self {
            lambda_samples: DEFAULT_LAMBDA_SAMPLES,
            refine_iterations: DEFAULT_REFINE_ITERATIONS,
            flux_limiters,
            minimizer: Minimizer::Exact,
        }
    }

    /// Uses the minimal flux limiters.
    pub fn from_bounds(bounds: &CriticalBounds) -> Self {
        Self::new(bounds.flux_limiters.clone())
    }

    pub fn with_minimizer(mut self, minimizer: Minimizer) -> Self {
        self.minimizer = minimizer;
        self
    }

    pub fn validate(&self, num_vertices: usize) -> Result<()> {
        if self.lambda_samples < 3 {
            return Err(Error::InvalidParameter {
                name: "lambda_samples",
                value: self.lambda_samples as f64,
            });
        }
        if self.flux_limiters.len() != num_vertices {
            return Err(Error::Config(format!(
                "{} flux limiters for {num_vertices} vertices",
                self.flux_limiters.len()
            )));
        }
        if let Some(c) = self.flux_limiters.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "flux_limiter",
                value: *c,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    /// `(t_m, v(., t_m))` for each requested snapshot time.
    pub layers: Vec<(f64, GridFunction)>,
    /// Layer at `t = N_T dt = T`.
    pub final_layer: GridFunction,
}

/// Piecewise-linear interpolation of `values` on increasing `nodes`.
pub fn interpolate(values: &[f64], nodes: &[f64], s: f64) -> Result<f64> {
    if values.len() != nodes.len() || nodes.len() < 2 {
        return Err(Error::LayerSize {
            expected: nodes.len(),
            found: values.len(),
        });
    }
    let (first, last) = (nodes[0], nodes[nodes.len() - 1]);
    if !(s >= first && s <= last) {
        return Err(Error::OutOfDomain { s, length: last });
    }
    let (j, w) = locate(nodes, s);
    Ok((1.0 - w) * values[j] + w * values[j + 1])
}

/// Cell `j` and weight `w` with `y = (1 - w) nodes[j] + w nodes[j + 1]`.
fn locate(nodes: &[f64], y: f64) -> (usize, f64) {
    let last = nodes.len() - 2;
    let mut j = match nodes.partition_point(|&x| x <= y) {
        0 => 0,
        k => (k - 1).min(last),
    };
    if y < nodes[j] && j > 0 {
        j -= 1;
    }
    let w = ((y - nodes[j]) / (nodes[j + 1] - nodes[j])).clamp(0.0, 1.0);
    (j, w)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    lambda: f64,
    cell: usize,
    keep: f64,
    weight: f64,
    cost: f64,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    cell: usize,
    inv_h: f64,
    /// `s - s_cell`.
    offset: f64,
    lo: f64,
    hi: f64,
}

/// `H(s, .)` frozen at the node.
#[derive(Debug, Clone, Copy)]
enum Local {
    Quadratic {
        curvature: f64,
        shift: f64,
        offset: f64,
    },
    General,
}

#[derive(Debug, Clone)]
struct NodeStencil {
    s: f64,
    lo: f64,
    hi: f64,
    candidates: Vec<Candidate>,
    pieces: Vec<Piece>,
    local: Local,
}

struct StencilInputs<'a> {
    model: &'a HamiltonianModel,
    arc: usize,
    positions: &'a [f64],
    dt: f64,
    minimizer: Minimizer,
    lambda_samples: usize,
}

impl NodeStencil {
    fn build(inp: &StencilInputs<'_>, s: f64) -> Result<Self> {
        let StencilInputs {
            model,
            arc,
            positions,
            dt,
            ..
        } = *inp;
        let n = positions.len() - 1;
        let len = positions[n];
        let beta0 = model.beta0();
        let lo = ((s - len) / dt).max(-beta0);
        let hi = (s / dt).min(beta0);
        if !(lo <= hi) {
            return Err(Error::EmptyFeasibleSet { s });
        }

        // (lambda, foot node if the foot is exactly a grid node)
        let mut lambdas: Vec<(f64, Option<usize>)> = vec![(lo, None), (hi, None)];
        for (j, &sj) in positions.iter().enumerate() {
            let lambda = (s - sj) / dt;
            if lambda > lo && lambda < hi {
                lambdas.push((lambda, Some(j)));
            }
        }
        if inp.minimizer == Minimizer::Sampled {
            let m = inp.lambda_samples;
            for k in 1..m - 1 {
                lambdas.push((lo + (hi - lo) * k as f64 / (m - 1) as f64, None));
            }
        }
        lambdas.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.is_some().cmp(&a.1.is_some())));
        lambdas.dedup_by(|b, a| (b.0 - a.0).abs() <= 1e-14 * a.0.abs().max(1.0));

        let candidates = lambdas
            .iter()
            .map(|&(lambda, node)| {
                let (cell, weight) = match node {
                    Some(j) if j == n => (n - 1, 1.0),
                    Some(j) => (j, 0.0),
                    None => locate(positions, (s - dt * lambda).clamp(0.0, len)),
                };
                Candidate {
                    lambda,
                    cell,
                    keep: 1.0 - weight,
                    weight,
                    cost: dt * model.lagrangian_forward(arc, s, lambda),
                }
            })
            .collect::<Vec<_>>();

        let pieces = match inp.minimizer {
            Minimizer::Sampled => Vec::new(),
            Minimizer::Exact => candidates
                .windows(2)
                .filter(|w| w[1].lambda > w[0].lambda)
                .map(|w| {
                    let mid = 0.5 * (w[0].lambda + w[1].lambda);
                    let (cell, _) = locate(positions, (s - dt * mid).clamp(0.0, len));
                    Piece {
                        cell,
                        inv_h: 1.0 / (positions[cell + 1] - positions[cell]),
                        offset: s - positions[cell],
                        lo: w[0].lambda,
                        hi: w[1].lambda,
                    }
                })
                .collect(),
        };

        let local = match model.arc(arc).closed_form() {
            Some(q) => Local::Quadratic {
                curvature: q.curvature(),
                shift: q.shift(s),
                offset: q.offset(s),
            },
            None => Local::General,
        };

        Ok(Self {
            s,
            lo,
            hi,
            candidates,
            pieces,
            local,
        })
    }

    #[inline]
    fn eval_exact(&self, model: &HamiltonianModel, arc: usize, dt: f64, f: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for c in &self.candidates {
            let v = c.keep * f[c.cell] + c.weight * f[c.cell + 1] + c.cost;
            best = best.min(v);
        }
        let (mu_lo, mu_hi) = model.truncation().mu_interval;
        for pc in &self.pieces {
            let (a, b) = (f[pc.cell], f[pc.cell + 1]);
            let p = (b - a) * pc.inv_h;
            if !(p > mu_lo && p < mu_hi) {
                continue;
            }
            let (lambda, h) = match self.local {
                Local::Quadratic {
                    curvature,
                    shift,
                    offset,
                } => {
                    let m = p + shift;
                    (2.0 * curvature * m, curvature * m * m + offset)
                }
                Local::General => (
                    model.momentum_derivative(arc, self.s, p),
                    model.hamiltonian_forward(arc, self.s, p),
                ),
            };
            if lambda > pc.lo && lambda < pc.hi {
                best = best.min(a + p * pc.offset - dt * h);
            }
        }
        best
    }

    fn eval_sampled(
        &self,
        model: &HamiltonianModel,
        arc: usize,
        dt: f64,
        positions: &[f64],
        refine_iterations: usize,
        f: &[f64],
    ) -> f64 {
        let values: Vec<f64> = self
            .candidates
            .iter()
            .map(|c| c.keep * f[c.cell] + c.weight * f[c.cell + 1] + c.cost)
            .collect();
        let (k, &best) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("feasible set has at least one slope");
        if refine_iterations == 0 || self.candidates.len() < 2 {
            return best;
        }
        let len = positions[positions.len() - 1];
        let objective = |lambda: f64| {
            let (j, w) = locate(positions, (self.s - dt * lambda).clamp(0.0, len));
            (1.0 - w) * f[j] + w * f[j + 1] + dt * model.lagrangian_forward(arc, self.s, lambda)
        };
        let a = self.candidates[k.saturating_sub(1)].lambda;
        let b = self.candidates[(k + 1).min(self.candidates.len() - 1)].lambda;
        let (_, v) = golden_section(objective, a, b, 0.0, refine_iterations);
        best.min(v)
    }
}

struct ArcPlan {
    arc: usize,
    ids: Vec<usize>,
    positions: Vec<f64>,
    nodes: Vec<NodeStencil>,
}

/// Precomputed scheme for one model, grid and solver configuration.
pub struct Scheme<'a> {
    model: &'a HamiltonianModel,
    grid: &'a SpaceTimeGrid,
    config: SolverConfig,
    dt: f64,
    plans: Vec<ArcPlan>,
    parallel: bool,
}

impl<'a> Scheme<'a> {
    pub fn new(
        model: &'a HamiltonianModel,
        grid: &'a SpaceTimeGrid,
        config: SolverConfig,
    ) -> Result<Self> {
        config.validate(grid.num_vertices())?;
        if model.num_arcs() != grid.num_arcs() {
            return Err(Error::ModelArity {
                expected: grid.num_arcs(),
                found: model.num_arcs(),
            });
        }
        for arc in 0..grid.num_arcs() {
            if model.arc_length(arc) != grid.arc_length(arc) {
                return Err(Error::ParameterConstraint(format!(
                    "arc {arc} has length {} in the model and {} in the grid",
                    model.arc_length(arc),
                    grid.arc_length(arc)
                )));
            }
        }
        if (model.beta0() - grid.beta0()).abs() > 1e-12 * grid.beta0() {
            return Err(Error::ParameterConstraint(format!(
                "model beta0 = {} differs from grid beta0 = {}",
                model.beta0(),
                grid.beta0()
            )));
        }

        let dt = grid.time_step();
        let mut plans = Vec::with_capacity(grid.num_arcs());
        for arc in 0..grid.num_arcs() {
            let n = grid.nodes_per_arc()[arc];
            let positions: Vec<f64> = (0..=n).map(|i| grid.node_position(arc, i)).collect();
            let ids = (0..=n).map(|i| grid.node_index_unchecked(arc, i)).collect();
            let inputs = StencilInputs {
                model,
                arc,
                positions: &positions,
                dt,
                minimizer: config.minimizer,
                lambda_samples: config.lambda_samples,
            };
            let nodes = positions
                .iter()
                .map(|&s| NodeStencil::build(&inputs, s))
                .collect::<Result<Vec<_>>>()?;
            plans.push(ArcPlan {
                arc,
                ids,
                positions,
                nodes,
            });
        }
        let parallel = grid.num_nodes() >= PARALLEL_MIN_NODES && rayon::current_num_threads() > 1;
        Ok(Self {
            model,
            grid,
            config,
            dt,
            plans,
            parallel,
        })
    }

    /// Effective step `T / N_T`.
    pub fn time_step(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        self.grid
    }

    pub fn model(&self) -> &HamiltonianModel {
        self.model
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Slope range searched at node `i` of `arc`.
    pub fn feasible_range(&self, arc: usize, i: usize) -> Result<(f64, f64)> {
        let plan = self.plans.get(arc).ok_or(Error::ArcOutOfRange(arc))?;
        let node = plan.nodes.get(i).ok_or(Error::NodeOutOfRange(i))?;
        Ok((node.lo, node.hi))
    }

    fn arc_pass(&self, plan: &ArcPlan, f: &[f64], out: &mut Vec<f64>) {
        let local: Vec<f64> = plan.ids.iter().map(|&id| f[id]).collect();
        out.clear();
        out.extend(plan.nodes.iter().map(|node| match self.config.minimizer {
            Minimizer::Exact => node.eval_exact(self.model, plan.arc, self.dt, &local),
            Minimizer::Sampled => node.eval_sampled(
                self.model,
                plan.arc,
                self.dt,
                &plan.positions,
                self.config.refine_iterations,
                &local,
            ),
        }));
    }

    /// Arc updates `S_arc[f](s_i)` for `i = 0..=N`, before the vertex step.
    pub fn arc_updates(&self, f: &GridFunction, arc: usize) -> Result<Vec<f64>> {
        self.check_layer(f)?;
        let plan = self.plans.get(arc).ok_or(Error::ArcOutOfRange(arc))?;
        let mut out = Vec::new();
        self.arc_pass(plan, f.values(), &mut out);
        Ok(out)
    }

    fn check_layer(&self, f: &GridFunction) -> Result<()> {
        if f.len() != self.grid.num_nodes() {
            return Err(Error::LayerSize {
                expected: self.grid.num_nodes(),
                found: f.len(),
            });
        }
        f.check_finite()
    }

    fn step_into(&self, f: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        let nv = self.grid.num_vertices();
        for v in 0..nv {
            out[v] = f[v] - self.config.flux_limiters[v] * self.dt;
        }
        let mut scatter = |plan: &ArcPlan, upd: &[f64]| {
            let n = upd.len() - 1;
            out[plan.ids[0]] = out[plan.ids[0]].min(upd[0]);
            out[plan.ids[n]] = out[plan.ids[n]].min(upd[n]);
            for i in 1..n {
                out[plan.ids[i]] = upd[i];
            }
        };
        if self.parallel {
            let updates: Vec<Vec<f64>> = self
                .plans
                .par_iter()
                .map(|plan| {
                    let mut buf = Vec::with_capacity(plan.nodes.len());
                    self.arc_pass(plan, f, &mut buf);
                    buf
                })
                .collect();
            for (plan, upd) in self.plans.iter().zip(&updates) {
                scatter(plan, upd);
            }
        } else {
            for plan in &self.plans {
                self.arc_pass(plan, f, scratch);
                scatter(plan, scratch);
            }
        }
    }

    /// One step `S[f]` of the scheme.
    pub fn step(&self, f: &GridFunction) -> Result<GridFunction> {
        self.advance(f, 1)
    }

    /// `S^steps[f]`; fails on the first non-finite layer.
    pub fn advance(&self, f: &GridFunction, steps: usize) -> Result<GridFunction> {
        self.check_layer(f)?;
        let mut cur = f.values().to_vec();
        let mut next = vec![0.0; cur.len()];
        let mut scratch = Vec::new();
        for _ in 0..steps {
            self.step_into(&cur, &mut next, &mut scratch);
            if let Some(node) = next.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteLayer { node });
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(GridFunction::from_raw(cur))
    }

    /// Marches `N_T` steps from `phi`, keeping the layers at the requested
    /// grid times.
    pub fn evolve(&self, phi: &GridFunction, snapshot_times: &[f64]) -> Result<EvolutionResult> {
        let n_t = self.grid.num_time_layers();
        let mut marks = Vec::with_capacity(snapshot_times.len());
        for &t in snapshot_times {
            let m = (t / self.dt).round();
            if !(m >= 0.0 && m <= n_t as f64) || (t - m * self.dt).abs() > 1e-9 * self.dt {
                return Err(Error::NotGridTime(t));
            }
            marks.push((m as usize, t));
        }
        let mut layers = Vec::with_capacity(marks.len());
        let mut cur = phi.clone();
        self.check_layer(&cur)?;
        let mut done = 0;
        let mut order: Vec<usize> = (0..marks.len()).collect();
        order.sort_by_key(|&i| marks[i].0);
        let mut taken = vec![None; marks.len()];
        for i in order {
            let (m, _) = marks[i];
            cur = self.advance(&cur, m - done)?;
            done = m;
            taken[i] = Some(cur.clone());
        }
        for (i, layer) in taken.into_iter().enumerate() {
            layers.push((marks[i].1, layer.expect("every snapshot is visited")));
        }
        let final_layer = self.advance(&cur, n_t - done)?;
        Ok(EvolutionResult {
            layers,
            final_layer,
        })
    }
}

fn check_network(model: &HamiltonianModel, net: &Network) -> Result<()> {
    if model.num_arcs() != net.num_arcs() {
        return Err(Error::ModelArity {
            expected: net.num_arcs(),
            found: model.num_arcs(),
        });
    }
    Ok(())
}

/// One step of the scheme; builds the stencils on every call.
pub fn full_step(
    model: &HamiltonianModel,
    net: &Network,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
    f: &GridFunction,
) -> Result<GridFunction> {
    check_network(model, net)?;
    Scheme::new(model, grid, config.clone())?.step(f)
}

/// Evolution over the grid horizon from `phi`.
pub fn evolve(
    model: &HamiltonianModel,
    net: &Network,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
    phi: &GridFunction,
    snapshot_times: &[f64],
) -> Result<EvolutionResult> {
    check_network(model, net)?;
    Scheme::new(model, grid, config.clone())?.evolve(phi, snapshot_times)
}

/// Arc update at an arbitrary `s` for values `f` on the uniform nodes
/// `i |arc| / N`, `N = f.len() - 1`, listed along `direction`.
pub fn arc_update(
    model: &HamiltonianModel,
    arc: usize,
    direction: Direction,
    f: &[f64],
    s: f64,
    dt: f64,
) -> Result<f64> {
    if arc >= model.num_arcs() {
        return Err(Error::ArcOutOfRange(arc));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
        });
    }
    if f.len() < 2 {
        return Err(Error::LayerSize {
            expected: 2,
            found: f.len(),
        });
    }
    let len = model.arc_length(arc);
    if !(s >= 0.0 && s <= len) {
        return Err(Error::OutOfDomain { s, length: len });
    }
    let n = f.len() - 1;
    let positions: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                len
            } else {
                i as f64 * len / n as f64
            }
        })
        .collect();
    let (values, s) = match direction {
        Direction::Forward => (f.to_vec(), s),
        Direction::Reverse => (f.iter().rev().copied().collect(), len - s),
    };
    let inputs = StencilInputs {
        model,
        arc,
        positions: &positions,
        dt,
        minimizer: Minimizer::Exact,
        lambda_samples: DEFAULT_LAMBDA_SAMPLES,
    };
    Ok(NodeStencil::build(&inputs, s)?.eval_exact(model, arc, dt, &values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::ArcHamiltonian;
    use crate::network::{build_grid, build_network, ArcSpec};

    fn segment() -> Network {
        build_network(&[vec![0.0], vec![1.0]], &[ArcSpec::new(0, 1)]).unwrap()
    }

    fn square(shift: f64) -> HamiltonianModel {
        HamiltonianModel::new(
            "square",
            &segment(),
            vec![ArcHamiltonian::from_fn(move |_, mu| mu * mu + shift)],
            4.0,
        )
        .unwrap()
    }

    #[test]
    fn interpolation() {
        let nodes = [0.0, 0.5, 1.0];
        assert_eq!(interpolate(&[0.0, 1.0, 2.0], &nodes, 0.25).unwrap(), 0.5);
        assert_eq!(interpolate(&[3.0, -1.0, 2.0], &nodes, 0.5).unwrap(), -1.0);
        assert_eq!(interpolate(&[3.0, -1.0, 2.0], &nodes, 1.0).unwrap(), 2.0);
        let v = interpolate(&[1.0, 2.0, 3.0], &nodes, 0.8).unwrap();
        assert!((v - 2.6).abs() < 1e-15);
        assert!(interpolate(&[0.0, 1.0, 2.0], &nodes, 1.1).is_err());
    }

    #[test]
    fn zero_datum_stays_zero() {
        let m = square(0.0);
        for s in [0.0, 0.3, 1.0] {
            let v = arc_update(&m, 0, Direction::Forward, &[0.0; 5], s, 0.05).unwrap();
            assert!(v.abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn constant_lagrangian_offset() {
        let m = square(-1.0);
        let v = arc_update(&m, 0, Direction::Forward, &[0.0; 5], 0.5, 0.05).unwrap();
        assert!((v - 0.05).abs() < 1e-15);
    }

    #[test]
    fn affine_datum_follows_characteristics() {
        let m = square(0.0);
        let f: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let dt = 0.02;
        // lambda* = 2 is feasible where s / dt >= 2
        let v = arc_update(&m, 0, Direction::Forward, &f, 0.5, dt).unwrap();
        assert!((v - (0.5 - dt)).abs() < 1e-14);
        // near s = 0 the slope is clipped to s / dt
        let s = 0.0;
        let v = arc_update(&m, 0, Direction::Forward, &f, s, dt).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn reverse_matches_forward_mirror() {
        let m = HamiltonianModel::new(
            "drift",
            &segment(),
            vec![ArcHamiltonian::from_fn(|s, mu| (mu + 2.0 * s).powi(2))],
            12.0,
        )
        .unwrap();
        let f: Vec<f64> = (0..=8).map(|i| ((i * 7 % 5) as f64) * 0.1).collect();
        let rev: Vec<f64> = f.iter().rev().copied().collect();
        for (i, s) in [0.0, 0.25, 0.5, 1.0].into_iter().enumerate() {
            let a = arc_update(&m, 0, Direction::Reverse, &rev, s, 0.01).unwrap();
            let b = arc_update(&m, 0, Direction::Forward, &f, 1.0 - s, 0.01).unwrap();
            assert_eq!(a, b, "case {i}");
        }
    }

    #[test]
    fn feasible_ranges_are_clipped() {
        let net = segment();
        let m = square(0.0);
        let g = build_grid(&net, 0.25, 0.05, 1.0, 4.0, true).unwrap();
        let scheme = Scheme::new(&m, &g, SolverConfig::new(vec![0.0, 0.0])).unwrap();
        let dt = scheme.time_step();
        for i in 0..=4 {
            let s = g.node_position(0, i);
            let (lo, hi) = scheme.feasible_range(0, i).unwrap();
            assert_eq!(lo, ((s - 1.0) / dt).max(-4.0));
            assert_eq!(hi, (s / dt).min(4.0));
        }
    }

    #[test]
    fn config_is_validated() {
        let mut c = SolverConfig::new(vec![0.0]);
        assert!(c.validate(1).is_ok());
        assert!(c.validate(2).is_err());
        c.lambda_samples = 2;
        assert!(c.validate(1).is_err());
    }

    #[test]
    fn snapshots_must_be_grid_times() {
        let net = segment();
        let m = square(-1.0);
        let g = build_grid(&net, 0.25, 0.05, 1.0, 4.0, true).unwrap();
        let scheme = Scheme::new(&m, &g, SolverConfig::new(vec![-1.0, -1.0])).unwrap();
        let phi = GridFunction::zeros(&g);
        assert!(matches!(
            scheme.evolve(&phi, &[0.123]),
            Err(Error::NotGridTime(_))
        ));
        let r = scheme.evolve(&phi, &[0.5, 0.0]).unwrap();
        assert_eq!(r.layers[0].0, 0.5);
        assert!(r.layers[0]
            .1
            .values()
            .iter()
            .all(|v| (v - 0.5).abs() < 1e-12));
        assert!(r.layers[1].1.values().iter().all(|&v| v == 0.0));
        assert!(r
            .final_layer
            .values()
            .iter()
            .all(|v| (v - 1.0).abs() < 1e-12));
    }
}
