//! Optimal time scheduling for wireless-powered backscatter sensor networks.
//!
//! A dedicated RF source powers `N` sensor/gateway pairs. Within a
//! normalized frame each sensor can backscatter the source's carrier to its
//! gateway (one sensor at a time), harvest energy while others backscatter,
//! and spend the harvested energy on an active transmission. [`solve`]
//! finds the throughput-maximizing split of the frame; [`baselines`] holds
//! the harvest-then-transmit-only and backscatter-only reference policies.

pub mod baselines;
pub mod error;
pub mod feasibility;
pub mod model;
pub mod presets;
pub mod rf_link;
pub mod solver;

pub use baselines::{compare, solve_bm, solve_hm, Policy, PolicyResult};
pub use error::{Error, Result};
pub use feasibility::{check, max_attainable_energy, sample_region, ConstraintId, ConstraintReport, RegionPoint};
pub use model::{network_throughput, NetworkConfig, RateBreakdown, SensorParams, TimeAllocation};
pub use rf_link::{LinkParams, SourceParams};
pub use solver::{
    grid_oracle, phase_one, solve, solve_seeded, verify_kkt, KktReport, Solution, SolveStatus, SolverSettings,
};
