//! Time-budget, transmit-power-cap and energy-floor constraints.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, NetworkConfig, TimeAllocation};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Identifies one scalar constraint of the scheduling problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "sensor", rename_all = "snake_case")]
pub enum ConstraintId {
    /// `t_0 + Σ t_b + Σ t_a ≤ 1`.
    Budget,
    BackscatterNonNegative(usize),
    TransmitNonNegative(usize),
    SharedNonNegative,
    /// `E_h ≤ P_cap · t_a`.
    PowerCap(usize),
    /// `E_h ≥ E_0`.
    EnergyFloor(usize),
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintId::Budget => write!(f, "time budget"),
            ConstraintId::BackscatterNonNegative(n) => write!(f, "t_b[{n}] >= 0"),
            ConstraintId::TransmitNonNegative(n) => write!(f, "t_a[{n}] >= 0"),
            ConstraintId::SharedNonNegative => write!(f, "t_0 >= 0"),
            ConstraintId::PowerCap(n) => write!(f, "power cap of sensor {n}"),
            ConstraintId::EnergyFloor(n) => write!(f, "energy floor of sensor {n}"),
        }
    }
}

/// `coeffs · x ≤ bound` over the `[t_b, t_a, t_0]` layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub id: ConstraintId,
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

impl LinearConstraint {
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.bound - dot(&self.coeffs, x)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Every constraint as a linear inequality. The power cap is multiplied
/// through by `t_a`, which leaves the feasible set unchanged for `t_a > 0`
/// and matches the `t_a = 0` convention of [`check`].
pub fn linear_constraints(config: &NetworkConfig) -> Vec<LinearConstraint> {
    let n = config.len();
    let dim = config.dim();
    let shared = 2 * n;
    let mut rows = Vec::with_capacity(4 * n + 2);
    let unit = |i: usize, value: f64| {
        let mut c = vec![0.0; dim];
        c[i] = value;
        c
    };
    for i in 0..n {
        rows.push(LinearConstraint {
            id: ConstraintId::BackscatterNonNegative(i),
            coeffs: unit(i, -1.0),
            bound: 0.0,
        });
    }
    for i in 0..n {
        rows.push(LinearConstraint {
            id: ConstraintId::TransmitNonNegative(i),
            coeffs: unit(n + i, -1.0),
            bound: 0.0,
        });
    }
    rows.push(LinearConstraint {
        id: ConstraintId::SharedNonNegative,
        coeffs: unit(shared, -1.0),
        bound: 0.0,
    });
    rows.push(LinearConstraint {
        id: ConstraintId::Budget,
        coeffs: vec![1.0; dim],
        bound: 1.0,
    });
    for i in 0..n {
        let rx_power = config.received_power(i);
        let mut harvest = vec![0.0; dim];
        for (j, c) in harvest.iter_mut().enumerate().take(n) {
            if j != i {
                *c = rx_power;
            }
        }
        harvest[shared] = rx_power;

        let mut cap = harvest.clone();
        cap[n + i] = -config.sensors[i].power_cap;
        rows.push(LinearConstraint {
            id: ConstraintId::PowerCap(i),
            coeffs: cap,
            bound: 0.0,
        });
        rows.push(LinearConstraint {
            id: ConstraintId::EnergyFloor(i),
            coeffs: harvest.iter().map(|c| -c).collect(),
            bound: -config.sensors[i].energy_floor,
        });
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    /// `1 − t_0 − Σ t_b − Σ t_a`.
    pub budget_slack: f64,
    /// Largest negative time entry (or a nonzero `t_0` with the shared
    /// slot disabled), as a non-negative magnitude.
    pub sign_violation: f64,
    /// `P_cap − E_h / t_a` per sensor. With `t_a = 0` this is `P_cap` when
    /// nothing was harvested and `-∞` otherwise.
    pub power_cap_slack: Vec<f64>,
    /// `E_h − E_0` per sensor.
    pub energy_floor_slack: Vec<f64>,
    pub feasible: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
}

impl ConstraintReport {
    /// Time budget and sign constraints.
    pub fn budget_ok(&self) -> bool {
        self.budget_slack >= -self.tolerance && self.sign_violation <= self.tolerance
    }

    pub fn power_cap_ok(&self) -> bool {
        self.power_cap_slack.iter().all(|&s| s >= -self.tolerance)
    }

    pub fn energy_floor_ok(&self) -> bool {
        self.energy_floor_slack.iter().all(|&s| s >= -self.tolerance)
    }
}

pub fn check(alloc: &TimeAllocation, config: &NetworkConfig, tolerance: f64) -> Result<ConstraintReport> {
    alloc.check_dims(config)?;
    let budget_slack = 1.0 - alloc.total();

    let mut sign_violation = alloc
        .backscatter_times
        .iter()
        .chain(&alloc.transmit_times)
        .chain(std::iter::once(&alloc.shared_harvest_time))
        .fold(0.0f64, |acc, &t| acc.max(-t));
    if !config.shared_harvest_slot_enabled {
        sign_violation = sign_violation.max(alloc.shared_harvest_time.abs());
    }

    let mut power_cap_slack = Vec::with_capacity(config.len());
    let mut energy_floor_slack = Vec::with_capacity(config.len());
    for (n, sensor) in config.sensors.iter().enumerate() {
        let energy = model::harvested_energy(alloc, n, config)?;
        let t_a = alloc.transmit_times[n];
        let cap = if t_a > 0.0 {
            sensor.power_cap - energy / t_a
        } else if energy == 0.0 {
            sensor.power_cap
        } else {
            f64::NEG_INFINITY
        };
        power_cap_slack.push(cap);
        energy_floor_slack.push(energy - sensor.energy_floor);
    }

    let worst_violation = power_cap_slack
        .iter()
        .chain(&energy_floor_slack)
        .chain(std::iter::once(&budget_slack))
        .fold(sign_violation, |acc, &s| acc.max(-s));
    Ok(ConstraintReport {
        budget_slack,
        sign_violation,
        power_cap_slack,
        energy_floor_slack,
        feasible: worst_violation <= tolerance,
        worst_violation,
        tolerance,
    })
}

/// Upper bound on the energy sensor `n` can harvest in one frame.
pub fn max_attainable_energy(config: &NetworkConfig, n: usize) -> Result<f64> {
    config.sensor(n)?;
    let longest_harvest = if config.shared_harvest_slot_enabled || config.len() > 1 {
        1.0
    } else {
        0.0
    };
    Ok(config.received_power(n) * longest_harvest)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPoint {
    pub t_b: f64,
    pub t_a: f64,
    pub t_0: f64,
    pub feasible: bool,
    pub c0_ok: bool,
    pub c1_ok: bool,
    pub c2_ok: bool,
    pub r_sum: f64,
}

/// Evaluates a single-sensor network on a uniform lattice over the time
/// simplex, `grid_resolution` points per axis, row-major in
/// `(t_b, t_a, t_0)`. Infeasible points are kept and flagged.
pub fn sample_region(config: &NetworkConfig, grid_resolution: usize) -> Result<Vec<RegionPoint>> {
    if config.len() != 1 {
        return Err(Error::UnsupportedDimension {
            what: "region sampling",
            max: 1,
            found: config.len(),
        });
    }
    if grid_resolution < 2 {
        return Err(Error::invalid("grid_resolution", "must be at least 2"));
    }
    let last = grid_resolution - 1;
    let step = 1.0 / last as f64;
    let shared_steps = |used: usize| {
        if config.shared_harvest_slot_enabled {
            last - used
        } else {
            0
        }
    };
    let mut points = Vec::new();
    for i in 0..=last {
        for j in 0..=last - i {
            for k in 0..=shared_steps(i + j) {
                let alloc = TimeAllocation {
                    backscatter_times: vec![i as f64 * step],
                    transmit_times: vec![j as f64 * step],
                    shared_harvest_time: k as f64 * step,
                };
                let report = check(&alloc, config, DEFAULT_TOLERANCE)?;
                let r_sum = model::network_throughput(&alloc, config)?.network_total;
                points.push(RegionPoint {
                    t_b: alloc.backscatter_times[0],
                    t_a: alloc.transmit_times[0],
                    t_0: alloc.shared_harvest_time,
                    feasible: report.feasible,
                    c0_ok: report.budget_ok(),
                    c1_ok: report.power_cap_ok(),
                    c2_ok: report.energy_floor_ok(),
                    r_sum,
                });
            }
        }
    }
    Ok(points)
}
