mod common;

use approx::assert_relative_eq;
use wpbs_core::feasibility::DEFAULT_TOLERANCE;
use wpbs_core::{check, phase_one, presets, solve, solve_seeded, ConstraintId, SolveStatus, SolverSettings};

#[test]
fn single_sensor_without_shared_slot_backscatters_all_frame() {
    let config = presets::network(1, false);
    let solution = solve(&config, &SolverSettings::default()).unwrap();
    assert_eq!(solution.status, SolveStatus::Optimal);
    assert_relative_eq!(solution.allocation.backscatter_times[0], 1.0, epsilon = 1e-9);
    assert_relative_eq!(solution.allocation.transmit_times[0], 0.0, epsilon = 1e-9);
    assert_relative_eq!(solution.objective, 5000.0, max_relative = 1e-9);
}

#[test]
fn unreachable_energy_floor_is_infeasible_with_witness() {
    let mut config = presets::network(2, true);
    config.sensors[1].energy_floor = 2.0 * config.received_power(1);
    let solution = solve(&config, &SolverSettings::default()).unwrap();
    assert_eq!(solution.status, SolveStatus::Infeasible);
    assert_eq!(solution.infeasibility, Some(ConstraintId::EnergyFloor(1)));
}

#[test]
fn two_sensors_match_the_grid_oracle() {
    let config = presets::network(2, false);
    let settings = SolverSettings::default();
    let solution = solve(&config, &settings).unwrap();
    let oracle = wpbs_core::grid_oracle(&config, 200).unwrap();
    assert!(solution.is_optimal());
    assert_relative_eq!(solution.objective, oracle.objective, max_relative = 1e-3);
    assert!(solution.objective >= oracle.objective * (1.0 - 1e-9));
}

#[test]
fn phase_one_returns_uniform_split_without_floors() {
    let config = presets::network(2, true);
    let alloc = phase_one(&config).unwrap();
    let third = 1.0 / 6.0;
    for n in 0..2 {
        assert_relative_eq!(alloc.backscatter_times[n], third, epsilon = 1e-12);
        assert_relative_eq!(alloc.transmit_times[n], third, epsilon = 1e-12);
    }
    assert_relative_eq!(alloc.shared_harvest_time, third, epsilon = 1e-12);
}

#[test]
fn phase_one_names_the_unreachable_floor() {
    let mut config = presets::network(3, false);
    config.sensors[2].energy_floor = 1.5 * config.received_power(2);
    assert_eq!(phase_one(&config).unwrap_err(), ConstraintId::EnergyFloor(2));
}

#[test]
fn phase_one_finds_strict_interior_of_single_sensor_region() {
    for delta in [0.1, 0.6] {
        let config = presets::fig2_network(delta);
        let alloc = phase_one(&config).unwrap();
        let report = check(&alloc, &config, 0.0).unwrap();
        assert!(report.budget_slack > 0.0);
        assert!(report.power_cap_slack[0] > 0.0);
        assert!(report.energy_floor_slack[0] > 0.0);
    }
}

#[test]
fn outer_iterations_never_lose_throughput() {
    let mut rng = common::rng(11);
    for case in 0..20 {
        let n = [1, 2, 5][case % 3];
        let config = common::random_config(&mut rng, n, case % 2 == 0, true);
        let solution = solve(&config, &SolverSettings::default()).unwrap();
        let scale = wpbs_core::model::throughput_scale(&config);
        for pair in solution.objective_history.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-10 * scale, "case {case}: {pair:?}");
        }
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let mut rng = common::rng(12);
    let config = common::random_config(&mut rng, 5, true, true);
    let settings = SolverSettings::default();
    let a = solve(&config, &settings).unwrap();
    let b = solve(&config, &settings).unwrap();
    assert_eq!(a.status, b.status);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.allocation, b.allocation);
}

#[test]
fn optimal_allocations_pass_the_feasibility_check() {
    let mut rng = common::rng(13);
    let mut checked = 0;
    let mut case = 0;
    while checked < 30 {
        let n = [1, 2, 3, 5, 10][case % 5];
        let config = common::random_config(&mut rng, n, case % 2 == 1, true);
        case += 1;
        let solution = solve(&config, &SolverSettings::default()).unwrap();
        if solution.status == SolveStatus::Infeasible {
            assert!(solution.infeasibility.is_some(), "case {case}");
            continue;
        }
        assert!(solution.is_optimal(), "case {case}: {:?}", solution.status);
        let report = check(&solution.allocation, &config, DEFAULT_TOLERANCE).unwrap();
        assert!(report.feasible, "case {case}: {report:?}");
        checked += 1;
    }
    assert!(case < 60, "too many infeasible draws: {case}");
}

#[test]
fn optimum_is_non_decreasing_in_backscatter_rate() {
    let settings = SolverSettings::default();
    for shared in [false, true] {
        let mut previous = 0.0;
        let mut seed = None;
        for rate in [1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6, 3e6, 1e7] {
            let mut config = presets::network(3, shared);
            config.sensors[1].backscatter_rate = rate;
            let solution = solve_seeded(&config, &settings, seed.as_ref()).unwrap();
            assert!(solution.is_optimal());
            assert!(solution.objective >= previous * (1.0 - 1e-9), "rate {rate}");
            previous = solution.objective;
            seed = Some(solution.allocation);
        }
    }
}

#[test]
fn warm_start_reaches_the_same_optimum() {
    let settings = SolverSettings::default();
    let config = presets::network(4, true);
    let cold = solve(&config, &settings).unwrap();
    let mut neighbour = config.clone();
    neighbour.sensors[0].backscatter_rate *= 1.1;
    let seed = solve(&neighbour, &settings).unwrap().allocation;
    let warm = solve_seeded(&config, &settings, Some(&seed)).unwrap();
    assert!(warm.is_optimal());
    assert_relative_eq!(warm.objective, cold.objective, max_relative = 1e-8);
}

#[test]
fn invalid_settings_are_rejected() {
    let config = presets::network(1, false);
    let settings = SolverSettings {
        barrier_shrink: 1.0,
        ..SolverSettings::default()
    };
    assert!(solve(&config, &settings).is_err());
}
