mod common;

use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use wpbs_core::model::{self, throughput_scale};
use wpbs_core::{check, network_throughput, presets, TimeAllocation};

const SIZES: [usize; 4] = [1, 2, 5, 10];

#[test]
fn gradient_matches_central_differences() {
    let mut rng = common::rng(51);
    let (mut compared, mut unresolvable) = (0, 0);
    for case in 0..200 {
        let n = SIZES[case % 4];
        let config = common::random_config(&mut rng, n, true, false);
        let alloc = common::random_interior(&mut rng, n, true, 1e-2);
        let x = alloc.to_vector();
        let grad = model::gradient(&alloc, &config).unwrap();
        for (i, &g) in grad.iter().enumerate() {
            if g.abs() <= 1e-8 {
                continue;
            }
            let (fd, floor) = common::fd_partial_by_sensor(&config, &x, i, 1e-6);
            // a difference quotient cannot resolve below its rounding floor
            if 10.0 * floor > 1e-5 * g.abs() {
                unresolvable += 1;
                continue;
            }
            compared += 1;
            assert!(
                (fd - g).abs() <= 1e-5 * g.abs(),
                "case {case} coordinate {i}: {g} vs {fd}"
            );
        }
    }
    assert!(
        unresolvable * 20 < compared,
        "{unresolvable} of {compared} coordinates unresolvable"
    );
}

#[test]
fn shared_harvest_time_never_hurts() {
    let mut rng = common::rng(52);
    for case in 0..1000 {
        let n = SIZES[case % 4];
        let config = common::random_config(&mut rng, n, true, false);
        let alloc = common::random_interior(&mut rng, n, true, 0.0);
        let grad = model::gradient(&alloc, &config).unwrap();
        assert!(grad[2 * n] >= 0.0, "case {case}");
    }
}

#[test]
fn quadratic_form_matches_finite_difference_curvature() {
    let mut rng = common::rng(53);
    for case in 0..200 {
        let n = SIZES[case % 4];
        let config = common::random_config(&mut rng, n, true, false);
        let alloc = common::random_interior(&mut rng, n, true, 5e-2);
        let sensor = case % n;
        let v_s: f64 = rand::Rng::random_range(&mut rng, -1.0..1.0);
        let v_t: f64 = rand::Rng::random_range(&mut rng, -1.0..1.0);
        // moving t_0 moves every sensor's harvest time by the same amount
        let mut v = vec![0.0; 2 * n + 1];
        v[2 * n] = v_s;
        v[n + sensor] = v_t;
        let rate = |x: &[f64]| {
            let a = TimeAllocation::from_vector(x).unwrap();
            model::htt_bits(&a, sensor, &config).unwrap()
        };
        let analytic = model::quadratic_form(&alloc, sensor, &config, v_s, v_t).unwrap();
        let fd = common::fd_curvature(rate, &alloc.to_vector(), &v, 1e-3);
        assert!(analytic <= 0.0);
        assert!(
            (fd - analytic).abs() <= 1e-4 * analytic.abs().max(1e-9 * rate(&alloc.to_vector())),
            "case {case}: {analytic} vs {fd}"
        );
    }
}

#[test]
fn finite_difference_hessian_is_negative_semidefinite() {
    let mut rng = common::rng(54);
    for case in 0..200 {
        let n = SIZES[case % 4];
        let config = common::random_config(&mut rng, n, true, false);
        let alloc = common::random_interior(&mut rng, n, true, 5e-2);
        let scale = throughput_scale(&config);
        let f = |x: &[f64]| common::objective(&config, x) / scale;
        let hess = common::fd_hessian(f, &alloc.to_vector(), 1e-4);
        let top = SymmetricEigen::new(hess).eigenvalues.max();
        assert!(top <= 1e-6, "case {case}: {top}");
    }
}

#[test]
fn midpoint_concavity_holds() {
    let mut rng = common::rng(55);
    for case in 0..1000 {
        let n = SIZES[case % 4];
        let config = common::random_config(&mut rng, n, true, false);
        let x = common::random_interior(&mut rng, n, true, 0.0).to_vector();
        let y = common::random_interior(&mut rng, n, true, 0.0).to_vector();
        let lambda: f64 = rand::Rng::random_range(&mut rng, 0.01..0.99);
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let scale = throughput_scale(&config);
        let f = |p: &[f64]| common::objective(&config, p) / scale;
        let gap = f(&mid) - lambda * f(&x) - (1.0 - lambda) * f(&y);
        assert!(gap >= -1e-9, "case {case}: {gap}");
    }
}

#[test]
fn htt_rate_decays_to_zero_at_the_boundary() {
    let config = presets::network(1, true);
    let at = |t: f64| {
        let alloc = TimeAllocation {
            backscatter_times: vec![0.0],
            transmit_times: vec![t],
            shared_harvest_time: 0.5,
        };
        model::htt_bits(&alloc, 0, &config).unwrap()
    };
    let reference = at(0.1);
    let values: Vec<f64> = [1e-3, 1e-6, 1e-9].iter().map(|&t| at(t)).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    assert!(values[2] < 1e-6 * reference);
}

fn sized_config(seed: u64, n: usize) -> (wpbs_core::NetworkConfig, TimeAllocation) {
    let mut rng = common::rng(seed);
    let config = common::random_config(&mut rng, n, true, false);
    let alloc = common::random_interior(&mut rng, n, true, 0.0);
    (config, alloc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn throughput_is_monotone_in_backscatter_rate(seed in any::<u64>(), n in 1usize..6, bumps in prop::collection::vec((0usize..6, 0.0f64..1e4), 10)) {
        let (config, alloc) = sized_config(seed, n);
        let base = network_throughput(&alloc, &config).unwrap();
        prop_assert!(base.network_total >= 0.0);
        for (sensor, bump) in bumps {
            let mut richer = config.clone();
            richer.sensors[sensor % n].backscatter_rate += bump;
            let after = network_throughput(&alloc, &richer).unwrap();
            prop_assert!(after.network_total >= base.network_total);
        }
    }

    #[test]
    fn htt_rate_is_monotone_in_source_power(seed in any::<u64>(), n in 1usize..6, factors in prop::collection::vec(1.0f64..100.0, 10)) {
        let (config, alloc) = sized_config(seed, n);
        let base = network_throughput(&alloc, &config).unwrap().total_htt();
        for factor in factors {
            let mut louder = config.clone();
            louder.source.transmit_power *= factor;
            prop_assert!(network_throughput(&alloc, &louder).unwrap().total_htt() >= base);
        }
    }

    #[test]
    fn shrinking_an_allocation_never_reduces_budget_slack(seed in any::<u64>(), n in 1usize..6, theta in 0.0f64..=1.0) {
        let (config, alloc) = sized_config(seed, n);
        let shrunk = TimeAllocation::from_vector(&alloc.to_vector().iter().map(|v| v * theta).collect::<Vec<_>>()).unwrap();
        let before = check(&alloc, &config, 1e-9).unwrap().budget_slack;
        let after = check(&shrunk, &config, 1e-9).unwrap().budget_slack;
        prop_assert!(after >= before);
    }

    #[test]
    fn feasible_verdicts_survive_raw_re_evaluation(seed in any::<u64>(), n in 1usize..6) {
        let (config, alloc) = sized_config(seed, n);
        let report = check(&alloc, &config, 1e-9).unwrap();
        if report.feasible {
            let total = alloc.backscatter_times.iter().chain(&alloc.transmit_times).sum::<f64>() + alloc.shared_harvest_time;
            prop_assert!(total <= 1.0 + 1e-9 + 1e-12);
            let all_b: f64 = alloc.backscatter_times.iter().sum();
            for i in 0..n {
                let sensor = &config.sensors[i];
                let energy = config.received_power(i) * (alloc.shared_harvest_time + all_b - alloc.backscatter_times[i]);
                prop_assert!(energy / alloc.transmit_times[i] <= sensor.power_cap * (1.0 + 1e-9) + 1e-12);
                prop_assert!(energy >= sensor.energy_floor - 1e-9 - 1e-12);
            }
        }
    }
}
