//! The scheduling problem restricted to its free coordinates, with
//! normalized constraint rows and a normalized minimization objective.

use nalgebra::{DMatrix, DVector};

use crate::feasibility::{self, ConstraintId};
use crate::model::{self, NetworkConfig, SensorCoefficients, TimeAllocation};

/// Which coordinates of `[t_b, t_a, t_0]` are decision variables; the rest
/// are pinned at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub sensors: usize,
    pub backscatter: bool,
    pub shared: bool,
}

impl Layout {
    /// The full scheduling problem.
    pub fn full(config: &NetworkConfig) -> Self {
        Layout {
            sensors: config.len(),
            backscatter: true,
            shared: config.shared_harvest_slot_enabled,
        }
    }

    /// Harvest-then-transmit only: no backscatter, shared slot always on.
    pub fn harvest_then_transmit(config: &NetworkConfig) -> Self {
        Layout {
            sensors: config.len(),
            backscatter: false,
            shared: true,
        }
    }

    pub fn free_indices(&self) -> Vec<usize> {
        let n = self.sensors;
        let mut free = Vec::with_capacity(2 * n + 1);
        if self.backscatter {
            free.extend(0..n);
        }
        free.extend(n..2 * n);
        if self.shared {
            free.push(2 * n);
        }
        free
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub id: ConstraintId,
    pub coeffs: DVector<f64>,
    pub bound: f64,
}

pub(crate) struct Program {
    pub layout: Layout,
    pub free: Vec<usize>,
    pub rows: Vec<Row>,
    /// Row matrix, one constraint per row.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub scale: f64,
    coefs: Vec<SensorCoefficients>,
    /// Sensors whose HTT term is dropped from the objective.
    pub frozen: Vec<bool>,
}

impl Program {
    /// Returns the violated constraint when a row reduces to `0 ≤ negative`.
    pub fn new(config: &NetworkConfig, layout: Layout) -> Result<Self, ConstraintId> {
        let free = layout.free_indices();
        let mut rows = Vec::new();
        for row in feasibility::linear_constraints(config) {
            let coeffs: Vec<f64> = free.iter().map(|&i| row.coeffs[i]).collect();
            let norm = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if norm == 0.0 {
                if row.bound < 0.0 {
                    return Err(row.id);
                }
                continue;
            }
            rows.push(Row {
                id: row.id,
                coeffs: DVector::from_iterator(coeffs.len(), coeffs.iter().map(|c| c / norm)),
                bound: row.bound / norm,
            });
        }
        let k = free.len();
        let a = DMatrix::from_fn(rows.len(), k, |r, c| rows[r].coeffs[c]);
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.bound));
        Ok(Program {
            layout,
            free,
            rows,
            a,
            b,
            scale: model::throughput_scale(config),
            coefs: config.coefficients(),
            frozen: vec![false; config.len()],
        })
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn slacks(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.a * x
    }

    pub fn expand(&self, x: &DVector<f64>) -> Vec<f64> {
        let mut full = vec![0.0; 2 * self.layout.sensors + 1];
        for (&i, v) in self.free.iter().zip(x.iter()) {
            full[i] = *v;
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| full[i]))
    }

    pub fn allocation(&self, x: &DVector<f64>) -> TimeAllocation {
        TimeAllocation::from_vector(&self.expand(x)).expect("layout has 2N+1 coordinates")
    }

    fn skip(&self) -> Option<&[bool]> {
        self.frozen.iter().any(|&f| f).then_some(self.frozen.as_slice())
    }

    /// Unnormalized throughput.
    pub fn throughput(&self, x: &DVector<f64>) -> f64 {
        model::value_raw(&self.coefs, &self.expand(x), None)
    }

    /// Minimization objective `-R / scale`.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        -model::value_raw(&self.coefs, &self.expand(x), self.skip()) / self.scale
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let g = model::gradient_raw(&self.coefs, &self.expand(x), self.skip());
        DVector::from_iterator(self.dim(), self.free.iter().map(|&i| -g[i] / self.scale))
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let h = model::hessian_raw(&self.coefs, &self.expand(x), self.skip());
        DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            -h[(self.free[r], self.free[c])] / self.scale
        })
    }

    /// Free coordinates each getting `1 / (k + 1)` of the frame.
    pub fn uniform_point(&self) -> DVector<f64> {
        DVector::from_element(self.dim(), 1.0 / (self.dim() as f64 + 1.0))
    }
}
