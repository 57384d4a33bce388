mod common;

use common::{case_grid, flat_case};
use netcrit::benchmarks::{
    self, triangle_dependent, triangle_dependent_a, triangle_independent, triangle_independent_a,
    BenchmarkCase,
};
use netcrit::critical::{
    algorithm1, algorithm2, corrector_estimate, run, Algorithm, AlgorithmParams, CriticalRunResult,
    StopReason,
};
use netcrit::network::GridFunction;
use netcrit::scheme::{Scheme, SolverConfig};
use netcrit::Error;
use proptest::prelude::*;

fn solve(
    case: &BenchmarkCase,
    dx: f64,
    params: &AlgorithmParams,
    alg: Algorithm,
) -> CriticalRunResult {
    let grid = case_grid(case, dx);
    let bounds = case.model.compute_critical_bounds(&case.network).unwrap();
    let scheme = Scheme::new(&case.model, &grid, SolverConfig::from_bounds(&bounds)).unwrap();
    run(&scheme, bounds.a0, params, alg).unwrap()
}

#[test]
fn constant_model_is_exact_at_the_first_iteration() {
    for closed_form in [true, false] {
        let case = flat_case(closed_form);
        for alg in [Algorithm::TimeAverage, Algorithm::Increment] {
            let r = solve(&case, 0.1, &AlgorithmParams::tolerance(0.01), alg);
            assert_eq!(r.iterations, 1);
            assert_eq!(r.stop_reason, StopReason::ToleranceMet);
            assert!((r.estimate + 1.0).abs() < 1e-8, "{alg:?}: {}", r.estimate);
            let corr = corrector_estimate(&r, &r.final_layer, r.iterations, 1.0);
            assert!(corr.values().iter().all(|v| v.abs() < 1e-8));
        }
    }
}

#[test]
fn corrector_follows_a_shifted_datum() {
    let case = benchmarks::by_name("triangle-indep").unwrap();
    let grid = case_grid(&case, 0.2);
    let phi = GridFunction::from_fn(&grid, |id, _| 0.1 * (id as f64).cos());
    let params = AlgorithmParams::fixed_iterations(12);
    let bounds = case.model.compute_critical_bounds(&case.network).unwrap();
    let scheme = Scheme::new(&case.model, &grid, SolverConfig::from_bounds(&bounds)).unwrap();
    let a = run(
        &scheme,
        bounds.a0,
        &params.clone().with_initial_datum(phi.clone()),
        Algorithm::Increment,
    )
    .unwrap();
    let b = run(
        &scheme,
        bounds.a0,
        &params.with_initial_datum(phi.shifted(5.0)),
        Algorithm::Increment,
    )
    .unwrap();
    assert!((a.estimate - b.estimate).abs() < 1e-10);
    let ca = corrector_estimate(&a, &a.final_layer, 12, 1.0);
    let cb = corrector_estimate(&b, &b.final_layer, 12, 1.0);
    for (x, y) in ca.values().iter().zip(cb.values()) {
        assert!((y - x - 5.0).abs() < 1e-9);
    }
}

#[test]
fn corrector_settles_on_the_dependent_triangle() {
    let case = benchmarks::by_name("triangle-dep").unwrap();
    let eps = 0.005;
    let r = solve(
        &case,
        0.05,
        &AlgorithmParams::tolerance(eps),
        Algorithm::Increment,
    );
    assert_eq!(r.stop_reason, StopReason::ToleranceMet);
    let k = r.iterations;
    let now = corrector_estimate(&r, &r.final_layer, k, 1.0);
    let before = corrector_estimate(&r, &r.previous_layer, k - 1, 1.0);
    let d = now.sup_distance(&before);
    assert!(d < 2.0 * eps, "successive correctors differ by {d}");
}

#[test]
fn fixed_iterations_run_to_the_cap() {
    let case = benchmarks::by_name("triangle-dep").unwrap();
    let r = solve(
        &case,
        0.2,
        &AlgorithmParams::fixed_iterations(40),
        Algorithm::TimeAverage,
    );
    assert_eq!(r.iterations, 40);
    assert_eq!(r.stop_reason, StopReason::IterationCap);
    assert_eq!(r.upper_seq.len(), 40);
}

#[test]
fn iteration_cap_in_tolerance_mode() {
    let case = benchmarks::by_name("triangle-indep").unwrap();
    let params = AlgorithmParams::tolerance(1e-9).with_max_iterations(7);
    let r = solve(&case, 0.2, &params, Algorithm::TimeAverage);
    assert_eq!((r.iterations, r.stop_reason), (7, StopReason::IterationCap));
}

#[test]
fn period_must_match_the_grid() {
    let case = benchmarks::by_name("triangle-dep").unwrap();
    let grid = case_grid(&case, 0.2);
    let bounds = case.model.compute_critical_bounds(&case.network).unwrap();
    let config = SolverConfig::from_bounds(&bounds);
    let params = AlgorithmParams::tolerance(0.1).with_outer_period(2.0);
    let err = algorithm2(&case.model, &case.network, &grid, &config, &params).unwrap_err();
    assert!(matches!(err, Error::PeriodMismatch { .. }), "{err}");
}

#[test]
fn algorithms_agree_on_builtin_cases() {
    let dx = 0.05;
    let eps = dx / 10.0;
    for name in benchmarks::CASE_NAMES {
        let case = benchmarks::by_name(name).unwrap();
        let grid = case_grid(&case, dx);
        let bounds = case.model.compute_critical_bounds(&case.network).unwrap();
        let config = SolverConfig::from_bounds(&bounds);
        let params = AlgorithmParams::tolerance(eps);
        let a = algorithm1(&case.model, &case.network, &grid, &config, &params).unwrap();
        let b = algorithm2(&case.model, &case.network, &grid, &config, &params).unwrap();
        assert!(
            (a.estimate - b.estimate).abs() <= 4.0 * eps,
            "{name}: {} vs {}",
            a.estimate,
            b.estimate
        );
    }
}

/// Coarse estimate for a triangle case built with an explicit `a`.
fn triangle_estimate(case: BenchmarkCase) -> f64 {
    solve(
        &case,
        0.1,
        &AlgorithmParams::tolerance(0.001),
        Algorithm::Increment,
    )
    .estimate
}

#[test]
fn independent_triangle_depends_on_the_coupling_constant() {
    let (b, c) = (0.0, 1.0);
    let a = triangle_independent_a(b, c);
    assert!((a - 1.0).abs() < 1e-12);
    let base = (triangle_estimate(triangle_independent(a, b, c).unwrap()) - c).abs();
    for factor in [0.9, 1.1] {
        let off = (triangle_estimate(triangle_independent(factor * a, b, c).unwrap()) - c).abs();
        assert!(off > base + 0.01, "A x {factor}: error {off} vs {base}");
    }
}

#[test]
fn dependent_triangle_responds_to_a_larger_coupling_constant() {
    let (b, c) = (0.5, 1.0);
    let a = triangle_dependent_a(b, c);
    assert!((a - 2.0 / 3.0).abs() < 1e-12);
    let base = (triangle_estimate(triangle_dependent(a, b, c).unwrap()) - c).abs();
    let up = (triangle_estimate(triangle_dependent(1.1 * a, b, c).unwrap()) - c).abs();
    assert!(up > base + 0.01, "error {up} vs {base}");
    // Lowering A keeps a_0 = C = 1 on the third arc and the critical value
    // stays at C.
    let down = triangle_dependent(0.9 * a, b, c).unwrap();
    let a0 = down
        .model
        .compute_critical_bounds(&down.network)
        .unwrap()
        .a0;
    assert!((a0 - c).abs() < 1e-9);
    let est = triangle_estimate(down);
    assert!((est - c).abs() <= base + 1e-3, "estimate {est}");
}

fn assert_bracket(r: &CriticalRunResult) {
    for k in 0..r.iterations {
        let (u, l) = (r.upper_seq[k], r.lower_seq[k]);
        assert!(l >= r.a0 && l <= u, "k = {k}: [{l}, {u}]");
        if k > 0 {
            assert!(u <= r.upper_seq[k - 1] && l >= r.lower_seq[k - 1]);
        }
        let m = 0.5 * (u + l);
        assert!(l <= m && m <= u);
    }
    assert!(
        r.lower_seq[r.iterations - 1] <= r.estimate && r.estimate <= r.upper_seq[r.iterations - 1]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bracket_is_monotone_for_any_datum(
        seed in prop::collection::vec(-2.0..2.0f64, 8),
        which in 0usize..4,
        incremental in any::<bool>(),
    ) {
        let case = benchmarks::by_name(benchmarks::CASE_NAMES[which]).unwrap();
        let grid = case_grid(&case, 0.2);
        let phi = GridFunction::from_fn(&grid, |id, _| seed[id % seed.len()]);
        let alg = if incremental { Algorithm::Increment } else { Algorithm::TimeAverage };
        let params = AlgorithmParams::fixed_iterations(25).with_initial_datum(phi);
        assert_bracket(&solve(&case, 0.2, &params, alg));
    }
}
