//! Throughput maximization over the feasible schedules.
//!
//! The objective is concave and every constraint is linear once the power
//! cap is multiplied through by `t_a`, so a log-barrier interior-point
//! method reaches the global optimum. Each solve runs:
//!
//! 1. a phase-one search for a strictly feasible point (maximizing the
//!    smallest normalized slack),
//! 2. the barrier method on the throughput normalized by
//!    [`model::throughput_scale`],
//! 3. active-set polishing to land exactly on the optimal face,
//! 4. an independent KKT check that decides the reported status.

mod barrier;
mod kkt;
mod oracle;
mod polish;
mod program;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::feasibility::{self, ConstraintId};
use crate::model::{self, NetworkConfig, RateBreakdown, TimeAllocation};

use barrier::{BarrierParams, ConvexObjective};
pub(crate) use program::{Layout, Program};

pub use kkt::{verify_kkt, KktReport, ACTIVE_TOLERANCE};
pub use oracle::{grid_oracle, MAX_ORACLE_SENSORS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub barrier_initial: f64,
    pub barrier_shrink: f64,
    pub newton_tolerance: f64,
    pub kkt_tolerance: f64,
    pub max_outer_iterations: usize,
    pub max_newton_iterations: usize,
    pub boundary_epsilon: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            barrier_initial: 1.0,
            barrier_shrink: 0.2,
            newton_tolerance: 1e-10,
            kkt_tolerance: 1e-6,
            max_outer_iterations: 60,
            max_newton_iterations: 50,
            boundary_epsilon: 1e-12,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("barrier_initial", self.barrier_initial),
            ("newton_tolerance", self.newton_tolerance),
            ("kkt_tolerance", self.kkt_tolerance),
            ("boundary_epsilon", self.boundary_epsilon),
        ];
        for (name, value) in positive {
            crate::rf_link::positive(name, value)?;
        }
        if !(self.barrier_shrink > 0.0 && self.barrier_shrink < 1.0) {
            return Err(crate::Error::invalid("barrier_shrink", "must lie in (0, 1)"));
        }
        if self.max_outer_iterations == 0 || self.max_newton_iterations == 0 {
            return Err(crate::Error::invalid("max_iterations", "must be positive"));
        }
        Ok(())
    }

    /// Duality-gap bound at which the barrier stops, on the normalized
    /// objective.
    fn gap_target(&self) -> f64 {
        self.kkt_tolerance * 1e-4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    BoundaryDegenerate,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::BoundaryDegenerate => "boundary-degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub allocation: TimeAllocation,
    pub breakdown: RateBreakdown,
    /// Network throughput, bits per normalized frame.
    pub objective: f64,
    /// KKT residual from [`verify_kkt`]; `None` for lattice solutions.
    pub kkt_residual: Option<f64>,
    pub status: SolveStatus,
    /// Newton steps across all phases (lattice points for the oracle).
    pub iterations: usize,
    pub outer_iterations: usize,
    /// A constraint that cannot be satisfied, when infeasible.
    pub infeasibility: Option<ConstraintId>,
    /// Throughput after each barrier centering step.
    pub objective_history: Vec<f64>,
}

impl Solution {
    pub(crate) fn infeasible(n: usize, witness: ConstraintId, iterations: usize) -> Self {
        let allocation = TimeAllocation::zeros(n);
        Solution {
            breakdown: RateBreakdown {
                backscatter_bits: vec![0.0; n],
                htt_bits: vec![0.0; n],
                per_sensor_total: vec![0.0; n],
                network_total: 0.0,
            },
            allocation,
            objective: 0.0,
            kkt_residual: None,
            status: SolveStatus::Infeasible,
            iterations,
            outer_iterations: 0,
            infeasibility: Some(witness),
            objective_history: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Maximizes network throughput subject to the time budget, power caps and
/// energy floors.
pub fn solve(config: &NetworkConfig, settings: &SolverSettings) -> Result<Solution> {
    solve_seeded(config, settings, None)
}

/// Like [`solve`], but starts the barrier near `seed` when it has the right
/// dimension (e.g. the optimum of a neighbouring sweep point).
pub fn solve_seeded(
    config: &NetworkConfig,
    settings: &SolverSettings,
    seed: Option<&TimeAllocation>,
) -> Result<Solution> {
    config.validate()?;
    settings.validate()?;
    Ok(solve_layout(config, Layout::full(config), settings, seed))
}

/// A strictly feasible schedule, or a constraint that cannot be met.
pub fn phase_one(config: &NetworkConfig) -> std::result::Result<TimeAllocation, ConstraintId> {
    let settings = SolverSettings::default();
    let program = Program::new(config, Layout::full(config))?;
    let (x, _) = interior_point(&program, config, &settings)?;
    Ok(program.allocation(&x))
}

impl ConvexObjective for Program {
    fn value(&self, x: &DVector<f64>) -> f64 {
        Program::value(self, x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        Program::gradient(self, x)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        Program::hessian(self, x)
    }
}

/// Minimize the last coordinate.
struct LastCoordinate(usize);

impl ConvexObjective for LastCoordinate {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x[self.0 - 1]
    }

    fn gradient(&self, _: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.0);
        g[self.0 - 1] = 1.0;
        g
    }

    fn hessian(&self, _: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.0, self.0)
    }
}

/// Returns a point whose normalized slacks are all at least
/// `boundary_epsilon`, plus the Newton steps spent finding it.
fn interior_point(
    program: &Program,
    config: &NetworkConfig,
    settings: &SolverSettings,
) -> std::result::Result<(DVector<f64>, usize), ConstraintId> {
    let layout = program.layout;
    let harvest_possible = layout.shared || (layout.backscatter && config.len() > 1);
    for (n, sensor) in config.sensors.iter().enumerate() {
        let attainable = if harvest_possible {
            config.received_power(n)
        } else {
            0.0
        };
        if sensor.energy_floor > attainable {
            return Err(ConstraintId::EnergyFloor(n));
        }
    }

    let uniform = program.uniform_point();
    if program.slacks(&uniform).min() >= settings.boundary_epsilon {
        return Ok((uniform, 0));
    }

    // minimize σ subject to A x − σ ≤ b
    let k = program.dim();
    let m = program.rows.len();
    let mut a = DMatrix::zeros(m, k + 1);
    a.view_mut((0, 0), (m, k)).copy_from(&program.a);
    a.column_mut(k).fill(-1.0);
    let worst = -program.slacks(&uniform).min();
    let mut x0 = DVector::zeros(k + 1);
    x0.rows_mut(0, k).copy_from(&uniform);
    x0[k] = worst + 1.0;
    let params = BarrierParams {
        mu_initial: settings.barrier_initial,
        mu_shrink: settings.barrier_shrink,
        newton_tolerance: settings.newton_tolerance,
        max_outer: settings.max_outer_iterations,
        max_newton: settings.max_newton_iterations,
        gap_target: 1e-10,
    };
    let outcome = barrier::minimize(&LastCoordinate(k + 1), &a, &program.b, x0, &params, |_| false);
    let x = outcome.x.rows(0, k).into_owned();
    let slack = program.slacks(&x);
    let min_slack = slack.min();
    if min_slack >= settings.boundary_epsilon {
        return Ok((x, outcome.newton_iterations));
    }
    let binding = (0..m).filter(|&r| slack[r] <= min_slack + 1e-9);
    let witness = binding
        .max_by_key(|&r| witness_priority(program.rows[r].id))
        .map(|r| program.rows[r].id)
        .unwrap_or(ConstraintId::Budget);
    Err(witness)
}

fn witness_priority(id: ConstraintId) -> u8 {
    match id {
        ConstraintId::EnergyFloor(_) => 3,
        ConstraintId::PowerCap(_) => 2,
        ConstraintId::Budget => 1,
        _ => 0,
    }
}

pub(crate) fn solve_layout(
    config: &NetworkConfig,
    layout: Layout,
    settings: &SolverSettings,
    seed: Option<&TimeAllocation>,
) -> Solution {
    let n = config.len();
    let mut program = match Program::new(config, layout) {
        Ok(p) => p,
        Err(id) => return Solution::infeasible(n, id, 0),
    };
    let (interior, phase_one_steps) = match interior_point(&program, config, settings) {
        Ok(found) => found,
        Err(id) => return Solution::infeasible(n, id, 0),
    };
    let start = seed
        .filter(|s| s.len() == n)
        .map(|s| 0.99 * program.restrict(&s.to_vector()) + 0.01 * &interior)
        .filter(|x| program.slacks(x).min() >= settings.boundary_epsilon)
        .unwrap_or(interior);

    let params = BarrierParams {
        mu_initial: settings.barrier_initial,
        mu_shrink: settings.barrier_shrink,
        newton_tolerance: settings.newton_tolerance,
        max_outer: settings.max_outer_iterations,
        max_newton: settings.max_newton_iterations,
        gap_target: settings.gap_target(),
    };
    let outcome = barrier::minimize(&program, &program.a.clone(), &program.b.clone(), start, &params, |_| {
        false
    });
    let history: Vec<f64> = outcome.history.iter().map(|v| -v * program.scale).collect();

    let x = polish::polish(&mut program, &outcome.x).unwrap_or_else(|| outcome.x.clone());
    let allocation = program.allocation(&x);
    let breakdown = model::network_throughput(&allocation, config).expect("layout matches config");
    let report = kkt::verify_layout(&allocation, config, layout, settings.kkt_tolerance);
    let feasible = {
        let mut view = config.clone();
        view.shared_harvest_slot_enabled = layout.shared;
        feasibility::check(&allocation, &view, feasibility::DEFAULT_TOLERANCE).is_ok_and(|r| r.feasible)
    };
    let status = if !outcome.converged {
        SolveStatus::MaxIterations
    } else if report.passed && feasible {
        SolveStatus::Optimal
    } else if report.boundary_degenerate {
        SolveStatus::BoundaryDegenerate
    } else {
        SolveStatus::MaxIterations
    };
    Solution {
        objective: breakdown.network_total,
        allocation,
        breakdown,
        kkt_residual: Some(report.residual),
        status,
        iterations: phase_one_steps + outcome.newton_iterations,
        outer_iterations: outcome.outer_iterations,
        infeasibility: None,
        objective_history: history,
    }
}
