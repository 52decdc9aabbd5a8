//! Exhaustive lattice search, the independent reference for [`super::solve`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{self, NetworkConfig, TimeAllocation};

use super::program::{Layout, Program};
use super::{Solution, SolveStatus};

pub const MAX_ORACLE_SENSORS: usize = 3;

/// Best point of the lattice `{count / resolution}` over the time simplex.
///
/// Throughput never decreases when a transmit time grows, and neither do
/// the power-cap slacks, so every lattice point with budget to spare is
/// dominated by the point that hands the remainder to the last sensor's
/// transmit slot. Only that budget face is enumerated. Ties go to the
/// lexicographically smallest `[t_b, t_a, t_0]`.
pub fn grid_oracle(config: &NetworkConfig, resolution: usize) -> Result<Solution> {
    if config.len() > MAX_ORACLE_SENSORS {
        return Err(Error::UnsupportedDimension {
            what: "grid oracle",
            max: MAX_ORACLE_SENSORS,
            found: config.len(),
        });
    }
    if resolution < 10 {
        return Err(Error::invalid(
            "resolution",
            format!("must be at least 10, got {resolution}"),
        ));
    }
    config.validate()?;
    let program = match Program::new(config, Layout::full(config)) {
        Ok(p) => p,
        Err(id) => return Ok(Solution::infeasible(config.len(), id, 0)),
    };

    let n = config.len();
    let free = program.free.clone();
    let filler = free
        .iter()
        .position(|&i| i == 2 * n - 1)
        .expect("last transmit slot is free");
    let enumerated: Vec<usize> = (0..free.len()).filter(|&p| p != filler).collect();
    let coefs = config.coefficients();
    let rows: Vec<(Vec<f64>, f64)> = program
        .rows
        .iter()
        .map(|r| (program.expand(&r.coeffs), r.bound))
        .collect();
    let step = 1.0 / resolution as f64;

    // every sensor's HTT bits depend only on its harvest and transmit
    // lattice counts, so they are tabulated once
    let side = resolution + 1;
    let htt: Vec<Vec<f64>> = coefs
        .iter()
        .map(|c| {
            let mut table = vec![0.0; side * side];
            for harvest in 0..side {
                for transmit in 0..side {
                    table[harvest * side + transmit] =
                        model::htt_term(c.psi, c.snr_per_joule, harvest as f64 * step, transmit as f64 * step);
                }
            }
            table
        })
        .collect();

    let search = Search {
        coefs: &coefs,
        htt: &htt,
        side,
        rows: &rows,
        free: &free,
        enumerated: &enumerated,
        filler,
        resolution,
        step,
        dim: 2 * n + 1,
    };
    let (best, visited) = (0..=resolution)
        .into_par_iter()
        .map(|first| search.subtree(first))
        .reduce(|| (None, 0), |(a, na), (b, nb)| (better(a, b), na + nb));

    let Some(best) = best else {
        let mut empty = Solution::infeasible(n, crate::feasibility::ConstraintId::Budget, visited);
        empty.infeasibility = None;
        return Ok(empty);
    };
    let full: Vec<f64> = best.counts.iter().map(|&c| c as f64 * step).collect();
    let allocation = TimeAllocation::from_vector(&full)?;
    let breakdown = model::network_throughput(&allocation, config)?;
    Ok(Solution {
        objective: breakdown.network_total,
        allocation,
        breakdown,
        kkt_residual: None,
        status: SolveStatus::Optimal,
        iterations: visited,
        outer_iterations: 0,
        infeasibility: None,
        objective_history: Vec::new(),
    })
}

#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    counts: Vec<usize>,
}

fn better(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => {
            if b.value > a.value || (b.value == a.value && b.counts < a.counts) {
                Some(b)
            } else {
                Some(a)
            }
        }
        (a, None) => a,
        (None, b) => b,
    }
}

struct Search<'a> {
    coefs: &'a [model::SensorCoefficients],
    htt: &'a [Vec<f64>],
    side: usize,
    rows: &'a [(Vec<f64>, f64)],
    free: &'a [usize],
    enumerated: &'a [usize],
    filler: usize,
    resolution: usize,
    step: f64,
    dim: usize,
}

impl Search<'_> {
    /// Throughput at a lattice point from the tabulated HTT bits.
    fn value(&self, counts: &[usize]) -> f64 {
        let n = self.coefs.len();
        let total_b: usize = counts[..n].iter().sum();
        let shared = counts[2 * n];
        (0..n)
            .map(|i| {
                let harvest = shared + total_b - counts[i];
                self.coefs[i].backscatter * (counts[i] as f64 * self.step)
                    + self.htt[i][harvest * self.side + counts[n + i]]
            })
            .sum()
    }

    fn subtree(&self, first: usize) -> (Option<Candidate>, usize) {
        let mut counts = vec![0usize; self.dim];
        let mut x = vec![0.0; self.dim];
        let mut best = None;
        let mut visited = 0;
        if let Some(&slot) = self.enumerated.first() {
            counts[self.free[slot]] = first;
            self.descend(1, self.resolution - first, &mut counts, &mut x, &mut best, &mut visited);
        } else if first == 0 {
            self.descend(0, self.resolution, &mut counts, &mut x, &mut best, &mut visited);
        }
        (best, visited)
    }

    fn descend(
        &self,
        depth: usize,
        remaining: usize,
        counts: &mut Vec<usize>,
        x: &mut Vec<f64>,
        best: &mut Option<Candidate>,
        visited: &mut usize,
    ) {
        if depth == self.enumerated.len() {
            counts[self.free[self.filler]] = remaining;
            *visited += 1;
            let value = self.value(counts);
            let replace = match best {
                None => true,
                Some(b) => value > b.value || (value == b.value && counts[..] < b.counts[..]),
            };
            // the row check is the costly part, so it only runs for points
            // that would become the incumbent
            if !replace {
                return;
            }
            for (xi, &c) in x.iter_mut().zip(counts.iter()) {
                *xi = c as f64 * self.step;
            }
            let feasible = self
                .rows
                .iter()
                .all(|(coeffs, bound)| bound - crate::feasibility::dot(coeffs, x) >= -1e-12);
            if feasible {
                *best = Some(Candidate {
                    value,
                    counts: counts.clone(),
                });
            }
            return;
        }
        let slot = self.free[self.enumerated[depth]];
        for c in 0..=remaining {
            counts[slot] = c;
            self.descend(depth + 1, remaining - c, counts, x, best, visited);
        }
        counts[slot] = 0;
    }
}
