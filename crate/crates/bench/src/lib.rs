//! Fixtures shared by the solver benchmarks.

use wpbs_core::{presets, NetworkConfig, TimeAllocation};

/// `n` default sensors spread between 5 m and 15 m, so their harvest
/// budgets differ and several constraints are active at the optimum.
pub fn spread_network(n: usize, shared_slot: bool) -> NetworkConfig {
    let mut config = presets::network(n, shared_slot);
    for (i, sensor) in config.sensors.iter_mut().enumerate() {
        let fraction = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
        sensor.link.distance = 5.0 + 10.0 * fraction;
    }
    config
}

/// Allocation that splits the frame evenly over every slot.
pub fn uniform_allocation(config: &NetworkConfig) -> TimeAllocation {
    let n = config.len();
    let share = 1.0 / (2 * n + 1) as f64;
    TimeAllocation {
        backscatter_times: vec![share; n],
        transmit_times: vec![share; n],
        shared_harvest_time: share,
    }
}
