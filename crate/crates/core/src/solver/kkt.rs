//! First-order optimality certificate for a candidate schedule.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::feasibility::ConstraintId;
use crate::model::{self, NetworkConfig, TimeAllocation};

use super::program::{Layout, Program};

/// Normalized slack below which a constraint counts as active.
pub const ACTIVE_TOLERANCE: f64 = 1e-7;

/// Residuals are on the objective normalized by
/// [`model::throughput_scale`] and on unit-norm constraint rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    /// `‖∇R − Σ λ_i ∇g_i‖∞`.
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
    /// Largest of the four residuals.
    pub residual: f64,
    /// Multipliers of the active constraints.
    pub multipliers: Vec<(ConstraintId, f64)>,
    /// Some sensor sits at `t_a = 0` with zero harvest while harvest time
    /// is still a free direction; the throughput is not differentiable
    /// there and the reported gradient is one supergradient among many.
    pub boundary_degenerate: bool,
    pub passed: bool,
}

/// Certifies `alloc` for the full scheduling problem of `config`.
pub fn verify_kkt(alloc: &TimeAllocation, config: &NetworkConfig, tolerance: f64) -> Result<KktReport> {
    alloc.check_dims(config)?;
    Ok(verify_layout(alloc, config, Layout::full(config), tolerance))
}

pub(crate) fn verify_layout(
    alloc: &TimeAllocation,
    config: &NetworkConfig,
    layout: Layout,
    tolerance: f64,
) -> KktReport {
    let program = match Program::new(config, layout) {
        Ok(p) => p,
        Err(id) => {
            return KktReport {
                stationarity: f64::INFINITY,
                primal: f64::INFINITY,
                dual: 0.0,
                complementarity: 0.0,
                residual: f64::INFINITY,
                multipliers: vec![(id, 0.0)],
                boundary_degenerate: false,
                passed: false,
            }
        }
    };
    let full = alloc.to_vector();
    let x = program.restrict(&full);
    let clamped = model::gradient(alloc, config).expect("dimensions checked");
    let slack = program.slacks(&x);
    let primal = slack.iter().fold(0.0f64, |m, &s| m.max(-s));
    let active: Vec<usize> = (0..slack.len()).filter(|&r| slack[r] <= ACTIVE_TOLERANCE).collect();
    let columns = DMatrix::from_fn(program.dim(), active.len(), |r, c| program.rows[active[c]].coeffs[r]);

    let fit = |grad_full: &[f64]| -> (DVector<f64>, f64) {
        let grad = DVector::from_iterator(
            program.dim(),
            program.free.iter().map(|&i| grad_full[i] / program.scale),
        );
        let lambda = if active.is_empty() {
            DVector::zeros(0)
        } else {
            nnls(&columns, &grad)
        };
        let stationarity = (&grad - &columns * &lambda).amax();
        (lambda, stationarity)
    };

    let degenerate = degenerate_sensors(&program, config, alloc);
    let (lambda, stationarity) = if degenerate.is_empty() {
        fit(&clamped)
    } else {
        best_supergradient(&clamped, config, &degenerate, tolerance, &fit)
    };
    let dual = lambda.iter().fold(0.0f64, |m, &l| m.max(-l));
    let complementarity = active
        .iter()
        .zip(lambda.iter())
        .fold(0.0f64, |m, (&r, &l)| m.max((l * slack[r]).abs()));
    let residual = stationarity.max(primal).max(dual).max(complementarity);

    KktReport {
        stationarity,
        primal,
        dual,
        complementarity,
        residual,
        multipliers: active
            .iter()
            .zip(lambda.iter())
            .map(|(&r, &l)| (program.rows[r].id, l))
            .collect(),
        boundary_degenerate: !degenerate.is_empty(),
        passed: residual <= tolerance,
    }
}

/// Sensors sitting at `t_a = 0` with zero harvest while harvest time is
/// still a free direction. The throughput is not differentiable there.
fn degenerate_sensors(program: &Program, config: &NetworkConfig, alloc: &TimeAllocation) -> Vec<usize> {
    let n = config.len();
    let harvest_is_free = program.layout.shared || (program.layout.backscatter && n > 1);
    if !harvest_is_free {
        return Vec::new();
    }
    (0..n)
        .filter(|&i| {
            let harvest = model::harvest_time(alloc, i).unwrap_or(0.0);
            alloc.transmit_times[i] == 0.0 && harvest == 0.0 && config.psi(i) * config.received_power(i) > 0.0
        })
        .collect()
}

/// Searches the superdifferential at the degenerate sensors for the
/// supergradient that best satisfies stationarity.
///
/// On the power-capped cone `s <= r_max t_a` with `r_max = P_cap / P_R`, a
/// sensor's rate is `t_a φ(s / t_a)` with `φ(r) = ψ log2(1 + γ P_R r)`
/// concave. Its supergradients at the origin are the tangents of `φ` at
/// `r ∈ [0, r_max]`, which by homogeneity equal the ordinary gradient at
/// harvest `r` and transmit time 1. Each degenerate sensor therefore adds
/// one scalar to choose: tangent points on a grid, then golden-section
/// refinement, cycling over the sensors a few times.
fn best_supergradient<F>(
    clamped: &[f64],
    config: &NetworkConfig,
    degenerate: &[usize],
    tolerance: f64,
    fit: &F,
) -> (DVector<f64>, f64)
where
    F: Fn(&[f64]) -> (DVector<f64>, f64),
{
    const GRID: usize = 8;
    const GOLDEN_STEPS: usize = 30;
    const SWEEPS: usize = 3;

    let coefs = config.coefficients();
    let clamped_partials: Vec<_> = degenerate
        .iter()
        .map(|&i| model::htt_partials(&coefs[i], 0.0, 0.0))
        .collect();
    let r_max: Vec<f64> = degenerate
        .iter()
        .map(|&i| config.sensors[i].power_cap / config.received_power(i))
        .collect();
    let gradient_at = |fractions: &[f64]| -> Vec<f64> {
        let mut grad = clamped.to_vec();
        for (k, &i) in degenerate.iter().enumerate() {
            let tangent = model::htt_partials(&coefs[i], fractions[k] * r_max[k], 1.0);
            shift_sensor(&mut grad, config.len(), i, &clamped_partials[k], -1.0);
            shift_sensor(&mut grad, config.len(), i, &tangent, 1.0);
        }
        grad
    };
    let score = |fractions: &[f64]| fit(&gradient_at(fractions)).1;
    let good_enough = 1e-3 * tolerance;

    let mut fractions = vec![0.0; degenerate.len()];
    let mut best = score(&fractions);
    if best > good_enough {
        let ends = vec![1.0; degenerate.len()];
        let at_ends = score(&ends);
        if at_ends < best {
            best = at_ends;
            fractions = ends;
        }
    }
    'sweeps: for _ in 0..SWEEPS {
        for k in 0..degenerate.len() {
            if best <= good_enough {
                break 'sweeps;
            }
            let mut trial = fractions.clone();
            let mut eval = |f: f64| {
                trial[k] = f;
                score(&trial)
            };
            let (mut at, mut value) = (fractions[k], best);
            for g in 0..=GRID {
                let f = g as f64 / GRID as f64;
                let v = eval(f);
                if v < value {
                    at = f;
                    value = v;
                }
            }
            let (mut lo, mut hi) = ((at - 1.0 / GRID as f64).max(0.0), (at + 1.0 / GRID as f64).min(1.0));
            let ratio = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..GOLDEN_STEPS {
                let a = hi - ratio * (hi - lo);
                let b = lo + ratio * (hi - lo);
                let (va, vb) = (eval(a), eval(b));
                for (f, v) in [(a, va), (b, vb)] {
                    if v < value {
                        at = f;
                        value = v;
                    }
                }
                if va < vb {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            fractions[k] = at;
            best = value;
        }
    }
    fit(&gradient_at(&fractions))
}

/// Adds `sign` times sensor `i`'s rate partials to a full-layout gradient.
fn shift_sensor(grad: &mut [f64], n: usize, i: usize, partials: &model::HttPartials, sign: f64) {
    for m in (0..n).filter(|&m| m != i) {
        grad[m] += sign * partials.d_harvest;
    }
    grad[2 * n] += sign * partials.d_harvest;
    grad[n + i] += sign * partials.d_transmit;
}

/// Lawson–Hanson non-negative least squares: `min ‖C λ − d‖₂, λ ≥ 0`.
pub(crate) fn nnls(c: &DMatrix<f64>, d: &DVector<f64>) -> DVector<f64> {
    let p = c.ncols();
    let mut x = DVector::zeros(p);
    let mut passive = vec![false; p];
    let tol = 1e-13 * (1.0 + c.amax() * d.amax());
    for _ in 0..3 * p + 3 {
        let w = c.tr_mul(&(d - c * &x));
        let candidate = (0..p)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let z = passive_lstsq(c, d, &passive);
            if (0..p).filter(|&i| passive[i]).all(|i| z[i] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in (0..p).filter(|&i| passive[i] && z[i] <= 0.0) {
                alpha = alpha.min(x[i] / (x[i] - z[i]));
            }
            x += alpha * (&z - &x);
            for i in 0..p {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&b| b) {
                break;
            }
        }
    }
    x
}

/// Least squares on the passive columns. Columns numerically dependent on
/// earlier ones get a zero coefficient; the rest go through Householder QR.
fn passive_lstsq(c: &DMatrix<f64>, d: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx = independent_columns(c, (0..passive.len()).filter(|&i| passive[i]));
    let mut z = DVector::zeros(passive.len());
    if idx.is_empty() {
        return z;
    }
    let sub = DMatrix::from_fn(c.nrows(), idx.len(), |r, k| c[(r, idx[k])]);
    let qr = sub.qr();
    let Some(sol) = qr.r().solve_upper_triangular(&(qr.q().tr_mul(d))) else {
        return z;
    };
    for (k, &i) in idx.iter().enumerate() {
        z[i] = sol[k];
    }
    z
}

/// Columns from `candidates` that are linearly independent of the ones
/// kept before them (modified Gram–Schmidt with one reorthogonalization).
fn independent_columns(c: &DMatrix<f64>, candidates: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut keep = Vec::new();
    for j in candidates {
        let original = c.column(j).into_owned();
        let scale = original.norm();
        if scale == 0.0 {
            continue;
        }
        let mut v = original;
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-10 * scale {
            basis.push(v / norm);
            keep.push(j);
        }
    }
    keep
}
