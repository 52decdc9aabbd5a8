#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpbs_core::{max_attainable_energy, presets, NetworkConfig, TimeAllocation};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random network around the reference parameters. Energy floors are a
/// random fraction of what is attainable when `floors` is set.
pub fn random_config(rng: &mut ChaCha8Rng, n: usize, shared_slot: bool, floors: bool) -> NetworkConfig {
    let mut config = presets::network(n, shared_slot);
    config.source.transmit_power = log_uniform(rng, 0.01, 1.0);
    for s in &mut config.sensors {
        s.link.distance = log_uniform(rng, 2.0, 20.0);
        s.link.harvest_efficiency = rng.random_range(0.05..1.0);
        s.tx_efficiency = rng.random_range(0.1..1.0);
        s.backscatter_efficiency = rng.random_range(0.3..1.0);
        s.backscatter_rate = log_uniform(rng, 1e3, 1e4);
        s.noise_channel_ratio = 1.0 / log_uniform(rng, 1e4, 1e7);
        s.power_cap = log_uniform(rng, 1e-6, 1e-4);
    }
    if floors {
        for i in 0..n {
            let max = max_attainable_energy(&config, i).unwrap();
            config.sensors[i].energy_floor = rng.random_range(0.0..0.3) * max;
        }
    }
    config
}

/// Reference network with every sensor's distance, harvest efficiency and
/// backscatter rate jittered, and optional energy floors.
pub fn jittered_reference(rng: &mut ChaCha8Rng, n: usize, shared_slot: bool, floors: bool) -> NetworkConfig {
    let mut config = presets::network(n, shared_slot);
    for s in &mut config.sensors {
        s.link.distance = rng.random_range(5.0..15.0);
        s.link.harvest_efficiency = rng.random_range(0.3..0.9);
        s.backscatter_rate = rng.random_range(1e3..1e4);
    }
    if floors {
        for i in 0..n {
            let max = max_attainable_energy(&config, i).unwrap();
            config.sensors[i].energy_floor = rng.random_range(0.0..0.3) * max;
        }
    }
    config
}

/// Random point strictly inside the time simplex with every transmit time
/// at least `min_transmit`.
pub fn random_interior(rng: &mut ChaCha8Rng, n: usize, shared_slot: bool, min_transmit: f64) -> TimeAllocation {
    let parts = 2 * n + usize::from(shared_slot) + 1;
    let raw: Vec<f64> = (0..parts).map(|_| -rng.random_range(1e-3f64..1.0).ln()).collect();
    let total: f64 = raw.iter().sum();
    let free = 1.0 - n as f64 * min_transmit;
    assert!(free > 0.0, "minimum transmit time too large for {n} sensors");
    let w: Vec<f64> = raw.iter().map(|r| free * r / total).collect();
    TimeAllocation {
        backscatter_times: w[..n].to_vec(),
        transmit_times: w[n..2 * n].iter().map(|t| t + min_transmit).collect(),
        shared_harvest_time: if shared_slot { w[2 * n] } else { 0.0 },
    }
}

/// Per-sensor total rates at `x`.
pub fn sensor_rates(config: &NetworkConfig, x: &[f64]) -> Vec<f64> {
    let alloc = TimeAllocation::from_vector(x).unwrap();
    wpbs_core::network_throughput(&alloc, config).unwrap().per_sensor_total
}

/// Central difference along coordinate `i`, differencing each sensor's rate
/// separately so that sensors untouched by the coordinate cancel exactly.
/// Also returns the rounding floor `ε Σ|R_n| / h` of the estimate.
pub fn fd_partial_by_sensor(config: &NetworkConfig, x: &[f64], i: usize, h: f64) -> (f64, f64) {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[i] += h;
    minus[i] -= h;
    let (up, down) = (sensor_rates(config, &plus), sensor_rates(config, &minus));
    let mut estimate = 0.0;
    let mut magnitude = 0.0;
    for (u, d) in up.iter().zip(&down) {
        if u != d {
            estimate += (u - d) / (2.0 * h);
            magnitude += u.abs().max(d.abs());
        }
    }
    (estimate, f64::EPSILON * magnitude / h)
}

pub fn objective(config: &NetworkConfig, x: &[f64]) -> f64 {
    let alloc = TimeAllocation::from_vector(x).unwrap();
    wpbs_core::network_throughput(&alloc, config).unwrap().network_total
}

/// Second directional difference with one Richardson extrapolation step.
pub fn fd_curvature<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], v: &[f64], h: f64) -> f64 {
    let second = |h: f64| {
        let at = |t: f64| -> Vec<f64> { x.iter().zip(v).map(|(a, b)| a + t * b).collect() };
        (f(&at(h)) - 2.0 * f(x) + f(&at(-h))) / (h * h)
    };
    (4.0 * second(h / 2.0) - second(h)) / 3.0
}

/// Finite-difference Hessian from function values only.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> nalgebra::DMatrix<f64> {
    let d = x.len();
    let eval = |i: usize, si: f64, j: usize, sj: f64| {
        let mut p = x.to_vec();
        p[i] += si * h;
        p[j] += sj * h;
        f(&p)
    };
    let mut hess = nalgebra::DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let value = (eval(i, 1.0, j, 1.0) - eval(i, 1.0, j, -1.0) - eval(i, -1.0, j, 1.0) + eval(i, -1.0, j, -1.0))
                / (4.0 * h * h);
            hess[(i, j)] = value;
            hess[(j, i)] = value;
        }
    }
    hess
}
