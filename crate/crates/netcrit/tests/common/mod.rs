//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use netcrit::benchmarks::{self, BenchmarkCase, DtPolicy, KnownCritical};
use netcrit::hamiltonians::{ArcHamiltonian, HamiltonianModel};
use netcrit::network::{build_grid, build_network, ArcSpec, GridFunction, Network, SpaceTimeGrid};
use netcrit::scheme::{Minimizer, Scheme, SolverConfig};

pub const BETA0: f64 = 2.0;
pub const DX: f64 = 0.1;
pub const DT: f64 = 0.05;
/// Node count of the path grid: 3 vertices, 9 + 6 interior nodes.
pub const NODES: usize = 18;

/// Two arcs: 0 -> 1 of length 1, 1 -> 2 of length 0.7.
pub fn path() -> Network {
    build_network(
        &[vec![0.0], vec![1.0], vec![1.7]],
        &[ArcSpec::new(0, 1), ArcSpec::new(1, 2)],
    )
    .unwrap()
}

/// `(mu + s/2)^2 - 1` and `mu^2/2 + 0.3`.
pub fn path_model(net: &Network) -> HamiltonianModel {
    let arcs = vec![
        ArcHamiltonian::from_fn(|s, mu| (mu + 0.5 * s).powi(2) - 1.0),
        ArcHamiltonian::from_fn(|_, mu| 0.5 * mu * mu + 0.3),
    ];
    HamiltonianModel::new("path", net, arcs, BETA0).unwrap()
}

fn path_lagrangian(arc: usize, s: f64, lambda: f64) -> f64 {
    match arc {
        0 => lambda * lambda / 4.0 - 0.5 * s * lambda + 1.0,
        _ => 0.5 * lambda * lambda - 0.3,
    }
}

/// `a_arc = -1, 0.3`; vertex 1 touches both arcs.
pub const PATH_LIMITERS: [f64; 3] = [-1.0, 0.3, 0.3];

pub struct Fixture {
    pub net: Network,
    pub model: HamiltonianModel,
    pub grid: SpaceTimeGrid,
}

pub fn fixture() -> Fixture {
    let net = path();
    let model = path_model(&net);
    let grid = build_grid(&net, DX, DT, 1.0, BETA0, true).unwrap();
    assert_eq!(grid.num_nodes(), NODES);
    Fixture { net, model, grid }
}

fn lerp(values: &[f64], len: f64, y: f64) -> f64 {
    let n = values.len() - 1;
    let x = (y / len * n as f64).clamp(0.0, n as f64);
    let j = (x.floor() as usize).min(n - 1);
    let w = x - j as f64;
    (1.0 - w) * values[j] + w * values[j + 1]
}

/// `min_lambda f(s - lambda dt) + dt L(s, lambda)` by a dense scan with
/// golden refinement around the best sample.
fn brute_arc_update(arc: usize, len: f64, values: &[f64], s: f64) -> f64 {
    let lo = ((s - len) / DT).max(-BETA0);
    let hi = (s / DT).min(BETA0);
    let cost =
        |lambda: f64| lerp(values, len, s - DT * lambda) + DT * path_lagrangian(arc, s, lambda);
    let n = 400_000;
    let h = (hi - lo) / n as f64;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..=n {
        let v = cost(lo + h * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (
        lo + h * best_i.saturating_sub(1) as f64,
        (lo + h * (best_i + 1) as f64).min(hi),
    );
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (x1, x2) = (b - r * (b - a), a + r * (b - a));
        if cost(x1) < cost(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    best.min(cost(0.5 * (a + b)))
}

pub fn brute_step(fx: &Fixture, f: &GridFunction) -> Vec<f64> {
    let grid = &fx.grid;
    let mut out = f.values().to_vec();
    for (v, c) in PATH_LIMITERS.iter().enumerate() {
        out[v] = f.values()[v] - c * DT;
    }
    for arc in 0..fx.net.num_arcs() {
        let len = fx.net.arcs()[arc].length;
        let n = grid.nodes_per_arc()[arc];
        let values = f.arc_values(grid, arc);
        for i in 0..=n {
            let s = len * i as f64 / n as f64;
            let u = brute_arc_update(arc, len, &values, s);
            let id = grid.node_index(arc, i).unwrap();
            out[id] = if i == 0 || i == n { out[id].min(u) } else { u };
        }
    }
    out
}

pub fn scheme(fx: &Fixture, minimizer: Minimizer) -> Scheme<'_> {
    let config = SolverConfig::new(PATH_LIMITERS.to_vec()).with_minimizer(minimizer);
    Scheme::new(&fx.model, &fx.grid, config).unwrap()
}

pub fn bumpy(grid: &SpaceTimeGrid) -> GridFunction {
    GridFunction::from_fn(grid, |id, _| (1.7 * id as f64).sin() + 0.1 * id as f64)
}

/// `mu^2 - 1` on every arc of the triangle; `c = -1`.
pub fn flat_case(closed_form: bool) -> BenchmarkCase {
    let net = benchmarks::triangle_network();
    let arc = || {
        let h = ArcHamiltonian::quadratic(1.0, |_| 0.0, |_| -1.0);
        if closed_form {
            h
        } else {
            h.without_closed_form()
        }
    };
    let model = HamiltonianModel::new("flat", &net, vec![arc(), arc(), arc()], 4.0).unwrap();
    BenchmarkCase {
        name: "flat".into(),
        network: net,
        model,
        beta0: 4.0,
        known: KnownCritical::Exact(-1.0),
        default_policies: vec![DtPolicy::Beta0Ratio],
    }
}

/// Grid with `dt = min spacing / beta0` and `T = 1`.
pub fn case_grid(case: &BenchmarkCase, dx: f64) -> SpaceTimeGrid {
    let dt = benchmarks::delta_t_policy(DtPolicy::Beta0Ratio, &case.network, dx, case.beta0);
    build_grid(&case.network, dx, dt, 1.0, case.beta0, true).unwrap()
}
