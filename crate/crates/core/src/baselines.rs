//! Comparison policies: harvest-then-transmit only (HM) and backscatter
//! only (BM).

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, NetworkConfig, RateBreakdown, TimeAllocation};
use crate::solver::{self, Layout, Solution, SolveStatus, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Policy {
    /// Backscatter only.
    #[serde(rename = "BM")]
    Backscatter,
    /// Harvest-then-transmit only.
    #[serde(rename = "HM")]
    HarvestThenTransmit,
    /// Joint backscatter / harvest / transmit schedule.
    #[serde(rename = "proposed")]
    Proposed,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Backscatter, Policy::HarvestThenTransmit, Policy::Proposed];

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Backscatter => "BM",
            Policy::HarvestThenTransmit => "HM",
            Policy::Proposed => "proposed",
        }
    }

    pub fn parse(name: &str) -> Option<Policy> {
        match name.to_ascii_lowercase().as_str() {
            "bm" | "backscatter" => Some(Policy::Backscatter),
            "hm" | "htt" => Some(Policy::HarvestThenTransmit),
            "proposed" | "joint" => Some(Policy::Proposed),
            _ => None,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyResult {
    pub policy: Policy,
    pub allocation: TimeAllocation,
    pub breakdown: RateBreakdown,
    pub objective: f64,
    pub status: SolveStatus,
    pub kkt_residual: Option<f64>,
    /// Why the policy could not run, if it could not.
    pub error: Option<String>,
}

impl PolicyResult {
    fn from_solution(policy: Policy, solution: Solution) -> Self {
        PolicyResult {
            policy,
            objective: solution.objective,
            allocation: solution.allocation,
            breakdown: solution.breakdown,
            status: solution.status,
            kkt_residual: solution.kkt_residual,
            error: solution.infeasibility.map(|id| format!("infeasible: {id}")),
        }
    }

    fn failed(policy: Policy, n: usize, error: &Error) -> Self {
        let allocation = TimeAllocation::zeros(n);
        PolicyResult {
            policy,
            breakdown: RateBreakdown {
                backscatter_bits: vec![0.0; n],
                htt_bits: vec![0.0; n],
                per_sensor_total: vec![0.0; n],
                network_total: 0.0,
            },
            allocation,
            objective: 0.0,
            status: SolveStatus::Infeasible,
            kkt_residual: None,
            error: Some(error.to_string()),
        }
    }
}

/// Harvest-then-transmit: every sensor harvests during the shared slot and
/// then transmits in its own slot; nobody backscatters. The shared slot is
/// used whether or not the configuration enables it for the joint policy.
pub fn solve_hm(config: &NetworkConfig, settings: &SolverSettings) -> Result<PolicyResult> {
    config.validate()?;
    settings.validate()?;
    let solution = solver::solve_layout(config, Layout::harvest_then_transmit(config), settings, None);
    Ok(PolicyResult::from_solution(Policy::HarvestThenTransmit, solution))
}

/// Backscatter only: the whole frame goes to the sensor with the largest
/// `η B`, lowest index on ties. Requires zero energy floors.
pub fn solve_bm(config: &NetworkConfig) -> Result<PolicyResult> {
    config.validate()?;
    if let Some(sensor) = config.sensors.iter().position(|s| s.energy_floor > 0.0) {
        return Err(Error::InfeasibleUnderBackscatterOnly { sensor });
    }
    let best = config
        .sensors
        .iter()
        .map(|s| s.backscatter_efficiency * s.backscatter_rate)
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) },
        )
        .0;
    let mut allocation = TimeAllocation::zeros(config.len());
    allocation.backscatter_times[best] = 1.0;
    let breakdown = model::network_throughput(&allocation, config)?;
    Ok(PolicyResult {
        policy: Policy::Backscatter,
        objective: breakdown.network_total,
        allocation,
        breakdown,
        status: SolveStatus::Optimal,
        kkt_residual: None,
        error: None,
    })
}

/// Runs every policy on the same network, in [`Policy::ALL`] order.
/// Per-policy failures become rows with an `error`.
pub fn compare(config: &NetworkConfig, settings: &SolverSettings) -> Result<Vec<PolicyResult>> {
    config.validate()?;
    settings.validate()?;
    let n = config.len();
    let ((proposed, hm), bm) = rayon::join(
        || {
            rayon::join(
                || solver::solve(config, settings).map(|s| PolicyResult::from_solution(Policy::Proposed, s)),
                || solve_hm(config, settings),
            )
        },
        || solve_bm(config),
    );
    let row = |policy, result: Result<PolicyResult>| result.unwrap_or_else(|e| PolicyResult::failed(policy, n, &e));
    Ok(vec![
        row(Policy::Backscatter, bm),
        row(Policy::HarvestThenTransmit, hm),
        row(Policy::Proposed, proposed),
    ])
}
