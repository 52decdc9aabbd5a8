//! Seeded property suites: concavity, finite-difference derivatives, the
//! grid oracle and KKT certification.
//!
//! The finite-difference checks here only evaluate the throughput; they
//! never call the analytic derivatives they are checking against, so they
//! are independent of the model's own gradient and Hessian code.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpbs_core::model::{self, throughput_scale};
use wpbs_core::{
    check, grid_oracle, max_attainable_energy, network_throughput, phase_one, presets, solve, verify_kkt,
    NetworkConfig, SolverSettings, TimeAllocation,
};

pub const CONCAVITY_TOLERANCE: f64 = -1e-9;
pub const HESSIAN_EIGEN_TOLERANCE: f64 = 1e-6;
pub const GRADIENT_TOLERANCE: f64 = 1e-5;
pub const QUADRATIC_FORM_TOLERANCE: f64 = 1e-4;
pub const ORACLE_GAP_TOLERANCE: f64 = 1e-3;
pub const ORACLE_RESOLUTION: usize = 200;
pub const KKT_TOLERANCE: f64 = 1e-6;

/// Gradient coordinates whose rounding floor hides the tolerance are
/// skipped; at most this fraction may be.
const MAX_UNRESOLVED_FRACTION: f64 = 0.05;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Random network around the reference parameters:
///
/// | quantity | range |
/// |---|---|
/// | source power | 0.01–1 W, log-uniform |
/// | distance | 2–20 m, log-uniform |
/// | harvest efficiency | 0.05–1 |
/// | transmit efficiency | 0.1–1 |
/// | backscatter efficiency | 0.3–1 |
/// | backscatter rate | 1–10 kbit/s, log-uniform |
/// | γ | 1e4–1e7 W⁻¹, log-uniform |
/// | power cap | 1e-6–1e-4 W, log-uniform |
/// | energy floor | 0–30% of the attainable energy, when `floors` |
pub fn random_network(rng: &mut ChaCha8Rng, n: usize, shared_slot: bool, floors: bool) -> NetworkConfig {
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
        add_floors(rng, &mut config);
    }
    config
}

/// Reference network with distance (5–15 m), harvest efficiency (0.3–0.9)
/// and backscatter rate (1–10 kbit/s) jittered per sensor.
pub fn jittered_reference(rng: &mut ChaCha8Rng, n: usize, shared_slot: bool, floors: bool) -> NetworkConfig {
    let mut config = presets::network(n, shared_slot);
    for s in &mut config.sensors {
        s.link.distance = rng.random_range(5.0..15.0);
        s.link.harvest_efficiency = rng.random_range(0.3..0.9);
        s.backscatter_rate = rng.random_range(1e3..1e4);
    }
    if floors {
        add_floors(rng, &mut config);
    }
    config
}

fn add_floors(rng: &mut ChaCha8Rng, config: &mut NetworkConfig) {
    for i in 0..config.len() {
        let max = max_attainable_energy(config, i).expect("index in range");
        config.sensors[i].energy_floor = rng.random_range(0.0..0.3) * max;
    }
}

/// A point strictly inside the feasible set: a random simplex point pulled
/// toward the phase-one interior point until it is strictly feasible, then
/// a random fraction of the way back. `None` when the set is empty.
pub fn feasible_interior(rng: &mut ChaCha8Rng, config: &NetworkConfig) -> Option<TimeAllocation> {
    let anchor = phase_one(config).ok()?.to_vector();
    let n = config.len();
    let shared = config.shared_harvest_slot_enabled;
    let parts = 2 * n + usize::from(shared) + 1;
    let raw: Vec<f64> = (0..parts).map(|_| -rng.random_range(1e-3f64..1.0).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut target = vec![0.0; 2 * n + 1];
    for i in 0..2 * n {
        target[i] = raw[i] / total;
    }
    if shared {
        target[2 * n] = raw[2 * n] / total;
    }
    let at = |theta: f64| -> Vec<f64> { anchor.iter().zip(&target).map(|(a, t)| a + theta * (t - a)).collect() };
    let strictly_feasible = |x: &[f64]| {
        let alloc = TimeAllocation::from_vector(x).expect("vector has 2N+1 entries");
        let report = check(&alloc, config, 0.0).expect("dimensions match");
        report.feasible
            && report.budget_slack > 0.0
            && report.power_cap_slack.iter().all(|&s| s > 0.0)
            && report
                .energy_floor_slack
                .iter()
                .zip(&config.sensors)
                .all(|(&s, c)| s > 0.0 || c.energy_floor == 0.0)
    };
    let reach = if strictly_feasible(&target) {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if strictly_feasible(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let theta = reach * rng.random_range(0.05..0.95);
    TimeAllocation::from_vector(&at(theta)).ok()
}

fn normalized_objective(config: &NetworkConfig, x: &[f64]) -> f64 {
    let alloc = TimeAllocation::from_vector(x).expect("vector has 2N+1 entries");
    network_throughput(&alloc, config)
        .expect("dimensions match")
        .network_total
        / throughput_scale(config)
}

fn sensor_rates(config: &NetworkConfig, x: &[f64]) -> Vec<f64> {
    let alloc = TimeAllocation::from_vector(x).expect("vector has 2N+1 entries");
    network_throughput(&alloc, config)
        .expect("dimensions match")
        .per_sensor_total
}

/// Central difference along coordinate `i`, differencing each sensor's
/// rate separately so that sensors the coordinate does not touch cancel
/// exactly. Also returns the rounding floor `ε Σ|R_n| / h`.
pub fn fd_partial(config: &NetworkConfig, x: &[f64], i: usize, h: f64) -> (f64, f64) {
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

/// Second directional difference with one Richardson extrapolation step.
pub fn fd_curvature<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], v: &[f64], h: f64) -> f64 {
    let second = |h: f64| {
        let at = |t: f64| -> Vec<f64> { x.iter().zip(v).map(|(a, b)| a + t * b).collect() };
        (f(&at(h)) - 2.0 * f(x) + f(&at(-h))) / (h * h)
    };
    (4.0 * second(h / 2.0) - second(h)) / 3.0
}

/// Hessian from function values only.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> DMatrix<f64> {
    let d = x.len();
    let eval = |i: usize, si: f64, j: usize, sj: f64| {
        let mut p = x.to_vec();
        p[i] += si * h;
        p[j] += sj * h;
        f(&p)
    };
    let mut hess = DMatrix::zeros(d, d);
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

/// Outcome of one property suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub detail: String,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} ({} checked): {}", self.name, self.checked, self.detail)
    }
}

/// Supplies the network for case `i`.
pub type CaseSource<'a> = dyn Fn(usize, &mut ChaCha8Rng) -> NetworkConfig + 'a;

/// Draws `count` feasible interior points; cases whose network admits none
/// are redrawn up to ten times.
fn feasible_cases(count: usize, rng: &mut ChaCha8Rng, source: &CaseSource<'_>) -> Vec<(NetworkConfig, TimeAllocation)> {
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        for _ in 0..10 {
            let config = source(i, rng);
            if let Some(point) = feasible_interior(rng, &config) {
                cases.push((config, point));
                break;
            }
        }
    }
    cases
}

/// `R(λx + (1−λ)y) − λR(x) − (1−λ)R(y) ≥ −1e-9` on the throughput
/// normalized by its scale, over pairs of feasible interior points.
pub fn midpoint_concavity(samples: usize, rng: &mut ChaCha8Rng, source: &CaseSource<'_>) -> SuiteReport {
    let cases = feasible_cases(samples, rng, source);
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for (config, x) in &cases {
        let Some(y) = feasible_interior(rng, config) else {
            continue;
        };
        let (x, y) = (x.to_vector(), y.to_vector());
        let lambda: f64 = rng.random_range(0.01..0.99);
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let f = |p: &[f64]| normalized_objective(config, p);
        let gap = f(&mid) - lambda * f(&x) - (1.0 - lambda) * f(&y);
        worst = worst.min(gap);
        checked += 1;
    }
    SuiteReport {
        name: "midpoint concavity",
        passed: checked == samples && worst >= CONCAVITY_TOLERANCE,
        checked,
        detail: format!("worst normalized slack {worst:.3e} (need >= {CONCAVITY_TOLERANCE:e})"),
    }
}

/// Largest eigenvalue of the finite-difference Hessian of the normalized
/// throughput must not exceed 1e-6.
pub fn hessian_eigenvalues(samples: usize, rng: &mut ChaCha8Rng, source: &CaseSource<'_>) -> SuiteReport {
    let cases = feasible_cases(samples, rng, source);
    let mut top = f64::NEG_INFINITY;
    for (config, point) in &cases {
        let x = point.to_vector();
        let h = fd_step(config, &x, 1e-4);
        // t_0 is pinned at zero without the shared slot, so it is not a
        // direction the throughput is defined along
        let free = if config.shared_harvest_slot_enabled {
            x.len()
        } else {
            x.len() - 1
        };
        let embed = |p: &[f64]| {
            let mut full = x.clone();
            full[..free].copy_from_slice(p);
            normalized_objective(config, &full)
        };
        let hess = fd_hessian(embed, &x[..free], h);
        top = top.max(SymmetricEigen::new(hess).eigenvalues.max());
    }
    SuiteReport {
        name: "finite-difference Hessian",
        passed: cases.len() == samples && top <= HESSIAN_EIGEN_TOLERANCE,
        checked: cases.len(),
        detail: format!("largest eigenvalue {top:.3e} (need <= {HESSIAN_EIGEN_TOLERANCE:e})"),
    }
}

/// A step no larger than `h` that stays a tenth of the way from every
/// time coordinate's zero (and from `t_0 = 0` when the slot is unused).
fn fd_step(config: &NetworkConfig, x: &[f64], h: f64) -> f64 {
    let n = config.len();
    let smallest = x[..2 * n]
        .iter()
        .chain(if config.shared_harvest_slot_enabled {
            &x[2 * n..]
        } else {
            &[]
        })
        .fold(f64::INFINITY, |acc, &v| acc.min(v));
    h.min(0.1 * smallest)
}

/// Analytic gradient against per-sensor central differences, 1e-5
/// relative per coordinate.
pub fn gradient(samples: usize, rng: &mut ChaCha8Rng, source: &CaseSource<'_>) -> SuiteReport {
    let cases = feasible_cases(samples, rng, source);
    let (mut compared, mut unresolved, mut failures) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    for (config, point) in &cases {
        let x = point.to_vector();
        let grad = model::gradient(point, config).expect("dimensions match");
        let h = fd_step(config, &x, 1e-6);
        for (i, &g) in grad.iter().enumerate() {
            if i == 2 * config.len() && !config.shared_harvest_slot_enabled {
                continue;
            }
            if g.abs() <= 1e-8 {
                continue;
            }
            let (fd, floor) = fd_partial(config, &x, i, h);
            // a difference quotient cannot resolve below its rounding floor
            if 10.0 * floor > GRADIENT_TOLERANCE * g.abs() {
                unresolved += 1;
                continue;
            }
            compared += 1;
            let error = (fd - g).abs() / g.abs();
            worst = worst.max(error);
            if error > GRADIENT_TOLERANCE {
                failures += 1;
            }
        }
    }
    let resolved_enough = (unresolved as f64) <= MAX_UNRESOLVED_FRACTION * compared as f64;
    SuiteReport {
        name: "gradient",
        passed: cases.len() == samples && failures == 0 && resolved_enough,
        checked: compared,
        detail: format!(
            "worst relative error {worst:.3e} (need <= {GRADIENT_TOLERANCE:e}); {failures} failures; {unresolved} coordinates below rounding resolution"
        ),
    }
}

/// `quadratic_form` against the second difference of one sensor's rate
/// along a direction mixing its harvest and transmit times.
pub fn quadratic_form(samples: usize, rng: &mut ChaCha8Rng, source: &CaseSource<'_>) -> SuiteReport {
    let cases = feasible_cases(samples, rng, source);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (case, (config, point)) in cases.iter().enumerate() {
        let n = config.len();
        let sensor = case % n;
        let x = point.to_vector();
        let v_t: f64 = rng.random_range(-1.0..1.0);
        let mut v_s: f64 = rng.random_range(-1.0..1.0);
        let mut v = vec![0.0; 2 * n + 1];
        v[n + sensor] = v_t;
        // harvest time moves through t_0, or through another sensor's
        // backscatter slot when there is no shared slot
        if config.shared_harvest_slot_enabled {
            v[2 * n] = v_s;
        } else if n > 1 {
            v[(sensor + 1) % n] = v_s;
        } else {
            v_s = 0.0;
        }
        let rate = |p: &[f64]| {
            let a = TimeAllocation::from_vector(p).expect("vector has 2N+1 entries");
            model::htt_bits(&a, sensor, config).expect("dimensions match")
        };
        let Ok(analytic) = model::quadratic_form(point, sensor, config, v_s, v_t) else {
            continue;
        };
        // the step follows the length scale of the coordinates the
        // direction moves, so rounding stays well below tiny curvatures
        let harvest = model::harvest_time(point, sensor).expect("sensor in range");
        let moved = v
            .iter()
            .zip(&x)
            .filter(|(d, _)| **d != 0.0)
            .fold(f64::INFINITY, |acc, (_, &c)| acc.min(c));
        let h = (0.1 * x[n + sensor].min(harvest).min(moved)).min(1e-2);
        let fd = fd_curvature(rate, &x, &v, h);
        // rounding floor of a second difference of values near R
        let floor = 1e3 * f64::EPSILON * rate(&x).abs() / (h * h);
        let error = (fd - analytic).abs() / analytic.abs().max(floor);
        worst = worst.max(error);
        checked += 1;
    }
    SuiteReport {
        name: "quadratic form",
        passed: checked == samples && worst <= QUADRATIC_FORM_TOLERANCE,
        checked,
        detail: format!("worst relative error {worst:.3e} (need <= {QUADRATIC_FORM_TOLERANCE:e})"),
    }
}

/// Solver against the lattice optimum at resolution 200.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub solver: f64,
    pub oracle: f64,
    /// `(solver − oracle) / max(|oracle|, tiny)`.
    pub gap: f64,
    pub solver_status: &'static str,
    pub oracle_feasible: bool,
}

impl OracleComparison {
    /// Within 1e-3 relative, and never below the lattice optimum by more
    /// than rounding. Both infeasible also counts as agreement.
    pub fn agrees(&self) -> bool {
        if !self.oracle_feasible {
            return self.solver_status == "infeasible";
        }
        let slack = 1e-9 * self.oracle.abs().max(1e-300);
        self.gap.abs() <= ORACLE_GAP_TOLERANCE && self.solver >= self.oracle - slack
    }
}

pub fn compare_with_oracle(config: &NetworkConfig, settings: &SolverSettings) -> wpbs_core::Result<OracleComparison> {
    let lattice = grid_oracle(config, ORACLE_RESOLUTION)?;
    let solution = solve(config, settings)?;
    let oracle_feasible = lattice.status != wpbs_core::SolveStatus::Infeasible;
    let gap = (solution.objective - lattice.objective) / lattice.objective.abs().max(f64::MIN_POSITIVE);
    Ok(OracleComparison {
        solver: solution.objective,
        oracle: lattice.objective,
        gap,
        solver_status: solution.status.as_str(),
        oracle_feasible,
    })
}

pub fn oracle_suite(config: &NetworkConfig, settings: &SolverSettings) -> SuiteReport {
    match compare_with_oracle(config, settings) {
        Ok(c) => SuiteReport {
            name: "grid oracle",
            passed: c.agrees(),
            checked: 1,
            detail: format!(
                "solver {:.10e} vs lattice {:.10e} at resolution {ORACLE_RESOLUTION}: relative gap {:.3e} (need <= {ORACLE_GAP_TOLERANCE:e})",
                c.solver, c.oracle, c.gap
            ),
        },
        Err(e) => SuiteReport {
            name: "grid oracle",
            passed: false,
            checked: 0,
            detail: e.to_string(),
        },
    }
}

/// An optimal solve must certify at 1e-6; infeasible networks pass
/// vacuously.
pub fn kkt_suite(config: &NetworkConfig, settings: &SolverSettings) -> SuiteReport {
    let outcome = solve(config, settings).and_then(|s| {
        if s.status == wpbs_core::SolveStatus::Infeasible {
            return Ok((s.status.as_str(), None));
        }
        let report = verify_kkt(&s.allocation, config, KKT_TOLERANCE)?;
        Ok((s.status.as_str(), Some(report.residual)))
    });
    match outcome {
        Ok((status, residual)) => SuiteReport {
            name: "KKT certificate",
            passed: status == "infeasible" || (status == "optimal" && residual.is_some_and(|r| r <= KKT_TOLERANCE)),
            checked: 1,
            detail: match residual {
                Some(r) => format!("status {status}, residual {r:.3e} (need <= {KKT_TOLERANCE:e})"),
                None => format!("status {status}"),
            },
        },
        Err(e) => SuiteReport {
            name: "KKT certificate",
            passed: false,
            checked: 0,
            detail: e.to_string(),
        },
    }
}

/// Every suite on one network: 1000 concavity pairs, 200 points each for
/// the Hessian, gradient and quadratic form, then the KKT certificate and,
/// for at most two sensors, the grid oracle.
pub fn run_all(config: &NetworkConfig, settings: &SolverSettings, seed: u64) -> Vec<SuiteReport> {
    let mut rng = rng(seed);
    let fixed = |_: usize, _: &mut ChaCha8Rng| config.clone();
    let mut reports = vec![
        midpoint_concavity(1000, &mut rng, &fixed),
        hessian_eigenvalues(200, &mut rng, &fixed),
        gradient(200, &mut rng, &fixed),
        quadratic_form(200, &mut rng, &fixed),
        kkt_suite(config, settings),
    ];
    if config.len() <= 2 {
        reports.push(oracle_suite(config, settings));
    }
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_points_are_strictly_feasible() {
        let mut rng = rng(3);
        for case in 0..50 {
            let config = random_network(&mut rng, 1 + case % 4, case % 2 == 0, true);
            let Some(point) = feasible_interior(&mut rng, &config) else {
                continue;
            };
            let report = check(&point, &config, 0.0).unwrap();
            assert!(report.feasible, "case {case}: {report:?}");
        }
    }

    #[test]
    fn fd_partial_of_a_linear_term_is_exact() {
        let mut config = presets::network(1, true);
        config.sensors[0].link.harvest_efficiency = 0.0;
        let x = [0.3, 0.2, 0.1];
        let (fd, _) = fd_partial(&config, &x, 0, 1e-6);
        let expected = config.sensors[0].backscatter_rate * config.sensors[0].backscatter_efficiency;
        assert!((fd - expected).abs() <= 1e-6 * expected);
    }

    #[test]
    fn fd_hessian_of_a_quadratic_is_exact() {
        let f = |p: &[f64]| -(p[0] * p[0]) + 3.0 * p[0] * p[1];
        let h = fd_hessian(f, &[0.2, 0.4], 1e-3);
        assert!((h[(0, 0)] + 2.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn reference_network_passes_every_suite() {
        for shared in [true, false] {
            let reports = run_all(&presets::network(1, shared), &SolverSettings::default(), 42);
            assert_eq!(reports.len(), 6);
            for r in &reports {
                assert!(r.passed, "{r}");
            }
        }
    }
}
