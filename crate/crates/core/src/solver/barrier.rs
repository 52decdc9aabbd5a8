//! Log-barrier interior-point method for smooth convex minimization over
//! `A x ≤ b`, with damped Newton centering steps.

use nalgebra::{Cholesky, DMatrix, DVector};

pub(crate) trait ConvexObjective {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierParams {
    pub mu_initial: f64,
    pub mu_shrink: f64,
    pub newton_tolerance: f64,
    pub max_outer: usize,
    pub max_newton: usize,
    /// Stop once `rows · μ` (the duality-gap bound) falls below this.
    pub gap_target: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierOutcome {
    pub x: DVector<f64>,
    pub outer_iterations: usize,
    pub newton_iterations: usize,
    pub converged: bool,
    /// Objective value after each centering step.
    pub history: Vec<f64>,
}

/// Stops early once `stop(x)` holds after a centering step.
pub(crate) fn minimize<F, S>(
    objective: &F,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    x0: DVector<f64>,
    params: &BarrierParams,
    stop: S,
) -> BarrierOutcome
where
    F: ConvexObjective,
    S: Fn(&DVector<f64>) -> bool,
{
    let rows = a.nrows().max(1) as f64;
    let mut x = x0;
    let mut mu = params.mu_initial;
    let mut newton_iterations = 0;
    let mut history = Vec::new();
    let mut outer = 0;
    let mut converged = false;
    debug_assert!(
        (b - a * &x).iter().all(|&s| s > 0.0),
        "barrier needs a strictly feasible start"
    );

    while outer < params.max_outer {
        outer += 1;
        newton_iterations += center(objective, a, b, &mut x, mu, params);
        history.push(objective.value(&x));
        if stop(&x) || rows * mu <= params.gap_target {
            converged = true;
            break;
        }
        mu *= params.mu_shrink;
    }
    BarrierOutcome {
        x,
        outer_iterations: outer,
        newton_iterations,
        converged,
        history,
    }
}

fn barrier_value<F: ConvexObjective>(
    objective: &F,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    x: &DVector<f64>,
    mu: f64,
) -> f64 {
    let slack = b - a * x;
    if slack.iter().any(|&s| s <= 0.0) {
        return f64::INFINITY;
    }
    objective.value(x) - mu * slack.iter().map(|s| s.ln()).sum::<f64>()
}

/// Newton's method on `f(x) − μ Σ ln(b − A x)`. Returns the step count.
fn center<F: ConvexObjective>(
    objective: &F,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    x: &mut DVector<f64>,
    mu: f64,
    params: &BarrierParams,
) -> usize {
    for step in 0..params.max_newton {
        let slack = b - a * &*x;
        let inv = slack.map(|s| 1.0 / s);
        let grad = objective.gradient(x) + mu * a.tr_mul(&inv);
        let mut weighted = a.clone();
        for (r, s) in inv.iter().enumerate() {
            weighted.row_mut(r).scale_mut(*s);
        }
        let hess = objective.hessian(x) + mu * weighted.tr_mul(&weighted);
        let Some(dx) = newton_direction(hess, &grad) else {
            return step;
        };
        let decrement = -grad.dot(&dx);
        if !decrement.is_finite() || decrement / 2.0 <= params.newton_tolerance {
            return step;
        }

        // largest step that keeps every slack positive
        let ad = a * &dx;
        let mut t: f64 = 1.0;
        for (s, d) in slack.iter().zip(ad.iter()) {
            if *d > 0.0 {
                t = t.min(0.99 * s / d);
            }
        }
        let f0 = barrier_value(objective, a, b, x, mu);
        let slope = grad.dot(&dx);
        loop {
            let candidate = &*x + t * &dx;
            let f1 = barrier_value(objective, a, b, &candidate, mu);
            if f1 <= f0 + 0.25 * t * slope {
                *x = candidate;
                break;
            }
            t *= 0.5;
            if t < 1e-16 {
                // no further progress in floating point
                return step + 1;
            }
        }
    }
    params.max_newton
}

/// Solves `H d = −g`, regularizing `H` if it is not numerically positive
/// definite.
fn newton_direction(hess: DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let diag_max = hess.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut h = hess.clone();
        if ridge > 0.0 {
            for i in 0..h.nrows() {
                h[(i, i)] += ridge;
            }
        }
        if let Some(chol) = Cholesky::new(h) {
            let d = -chol.solve(grad);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        ridge = if ridge == 0.0 { diag_max * 1e-14 } else { ridge * 100.0 };
    }
    None
}
