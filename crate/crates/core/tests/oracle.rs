mod common;

use approx::assert_relative_eq;
use wpbs_core::{grid_oracle, presets, solve, Error, SolveStatus, SolverSettings};

#[test]
fn single_sensor_lattice_picks_the_backscatter_corner() {
    let config = presets::network(1, false);
    let oracle = grid_oracle(&config, 100).unwrap();
    assert_eq!(oracle.allocation.backscatter_times, vec![1.0]);
    let solution = solve(&config, &SolverSettings::default()).unwrap();
    assert_relative_eq!(oracle.objective, solution.objective, max_relative = 1e-9);
}

#[test]
fn refining_the_lattice_never_loses_throughput() {
    let mut rng = common::rng(21);
    for case in 0..4 {
        let config = common::random_config(&mut rng, 2, false, case % 2 == 0);
        let coarse = grid_oracle(&config, 40).unwrap();
        let fine = grid_oracle(&config, 80).unwrap();
        assert!(fine.objective >= coarse.objective, "case {case}");
    }
    let config = presets::fig2_network(0.6);
    assert!(grid_oracle(&config, 100).unwrap().objective >= grid_oracle(&config, 50).unwrap().objective);
}

#[test]
fn unreachable_floor_leaves_an_empty_lattice() {
    let mut config = presets::network(2, false);
    config.sensors[0].energy_floor = 10.0;
    let oracle = grid_oracle(&config, 20).unwrap();
    assert_eq!(oracle.status, SolveStatus::Infeasible);
}

#[test]
fn too_many_sensors_or_too_coarse_a_lattice_is_refused() {
    let config = presets::network(4, false);
    assert!(matches!(
        grid_oracle(&config, 20),
        Err(Error::UnsupportedDimension { .. })
    ));
    let config = presets::network(1, false);
    assert!(grid_oracle(&config, 9).is_err());
}

#[test]
fn solver_sits_between_lattice_and_lattice_plus_tolerance() {
    let mut rng = common::rng(22);
    let settings = SolverSettings::default();
    let mut compared = 0;
    let mut case = 0;
    while compared < 6 {
        let n = 1 + case % 2;
        let config = common::jittered_reference(&mut rng, n, n == 1, true);
        case += 1;
        let solution = solve(&config, &settings).unwrap();
        let oracle = grid_oracle(&config, 200).unwrap();
        if solution.status == SolveStatus::Infeasible {
            assert_eq!(oracle.status, SolveStatus::Infeasible, "case {case}");
            continue;
        }
        assert!(solution.is_optimal(), "case {case}: {:?}", solution.status);
        assert!(solution.objective >= oracle.objective * (1.0 - 1e-9), "case {case}");
        assert!(
            solution.objective <= oracle.objective * (1.0 + 1e-3),
            "case {case}: {solution:?} {oracle:?} {config:?}"
        );
        compared += 1;
    }
}
