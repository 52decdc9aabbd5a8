//! Active-set refinement of a barrier solution.
//!
//! The barrier iterate sits a distance of order `μ` inside the active
//! constraints. Guessing the active set from small slacks and running
//! Newton on the equality-constrained problem lands exactly on the face,
//! which recovers exact corners (e.g. `t_a = 0`) and machine-precision
//! objective values. The result is discarded unless it is feasible, has
//! non-negative multipliers and does not lose objective value.

use nalgebra::{DMatrix, DVector};

use crate::feasibility::ConstraintId;

use super::program::Program;

const ACTIVE_THRESHOLDS: [f64; 3] = [1e-6, 1e-8, 1e-10];
const MAX_STEPS: usize = 40;

pub(crate) fn polish(program: &mut Program, x: &DVector<f64>) -> Option<DVector<f64>> {
    let baseline = program.throughput(x);
    let slack = program.slacks(x);
    let mut tried: Vec<Vec<usize>> = Vec::new();
    for threshold in ACTIVE_THRESHOLDS {
        let active: Vec<usize> = (0..program.rows.len()).filter(|&r| slack[r] <= threshold).collect();
        if active.is_empty() || tried.contains(&active) {
            continue;
        }
        tried.push(active.clone());
        if let Some(refined) = solve_on_face(program, x, &active) {
            if program.throughput(&refined) >= baseline - 1e-12 * program.scale {
                return Some(refined);
            }
        }
    }
    None
}

/// Rows of `active` that are linearly independent, in order.
fn independent_rows(program: &Program, active: &[usize]) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut keep = Vec::new();
    for &r in active {
        let mut v = program.rows[r].coeffs.clone();
        for q in &basis {
            let proj = q.dot(&v);
            v.axpy(-proj, q, 1.0);
        }
        let norm = v.norm();
        if norm > 1e-9 {
            basis.push(v / norm);
            keep.push(r);
        }
    }
    keep
}

fn solve_on_face(program: &mut Program, start: &DVector<f64>, active: &[usize]) -> Option<DVector<f64>> {
    let rows = independent_rows(program, active);
    let k = program.dim();
    let m = rows.len();
    if m > k {
        return None;
    }
    // a sensor pinned at t_a = 0 also has zero harvest on this face, so its
    // HTT term vanishes identically there
    let n = program.layout.sensors;
    let mut frozen = vec![false; n];
    for &r in active {
        if let ConstraintId::TransmitNonNegative(i) = program.rows[r].id {
            frozen[i] = true;
        }
    }
    program.frozen = frozen;
    let result = newton_on_face(program, start, &rows);
    program.frozen = vec![false; n];
    let (x, multipliers) = result?;
    if multipliers.iter().any(|&nu| nu < -1e-9) {
        return None;
    }
    let mut x = x;
    // snap sign constraints exactly
    for &r in &rows {
        let row = &program.rows[r];
        if row.bound == 0.0 && row.coeffs.iter().filter(|&&c| c != 0.0).count() == 1 {
            if let Some(i) = row.coeffs.iter().position(|&c| c != 0.0) {
                x[i] = 0.0;
            }
        }
    }
    if program.slacks(&x).iter().any(|&s| s < -1e-12) {
        return None;
    }
    Some(x)
}

fn newton_on_face(program: &Program, start: &DVector<f64>, rows: &[usize]) -> Option<(DVector<f64>, DVector<f64>)> {
    let k = program.dim();
    let m = rows.len();
    let a = DMatrix::from_fn(m, k, |r, c| program.rows[rows[r]].coeffs[c]);
    let b = DVector::from_iterator(m, rows.iter().map(|&r| program.rows[r].bound));
    let mut x = start.clone();
    for _ in 0..MAX_STEPS {
        let g = program.gradient(&x);
        let h = program.hessian(&x);
        let mut kkt = DMatrix::zeros(k + m, k + m);
        kkt.view_mut((0, 0), (k, k)).copy_from(&h);
        kkt.view_mut((0, k), (k, m)).copy_from(&a.transpose());
        kkt.view_mut((k, 0), (m, k)).copy_from(&a);
        let mut rhs = DVector::zeros(k + m);
        rhs.rows_mut(0, k).copy_from(&(-&g));
        rhs.rows_mut(k, m).copy_from(&(&b - &a * &x));
        let sol = kkt.full_piv_lu().solve(&rhs)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dx = sol.rows(0, k).into_owned();
        x += &dx;
        if program.slacks(&x).iter().any(|&s| s < -1e-10) {
            return None;
        }
        if dx.amax() <= 1e-14 {
            return Some((x, sol.rows(k, m).into_owned()));
        }
    }
    None
}
