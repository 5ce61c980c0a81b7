//! Augmented-Lagrangian subproblem of a two-player Nash equilibrium model.
//!
//! Variables: `x0 = (a1, a2, a3, a4)`, `x1 = (s1, s2)`, `x2 = (t1, t2)`, with
//! linear residuals
//!
//! ```text
//! c1 = 2 a3 + 8/3 a4 + t1 - 34
//! c2 = 1.25 a3 + 2 a4 + t2 - 24.25
//! c3 = s1 + a2 + a3 - 15
//! c4 = s2 + a1 - a4 - 15
//! ```
//!
//! and objective `½((a1 - a3)² + (a2 - a4)²) + Σ σₖ λₖ cₖ + ½ ρ Σ cₖ²` with
//! signs `σ = (+, -, -, +)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::{MpccProblem, Objective};

/// Stand-in for an infinite bound.
pub const FREE_BOUND: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nash1aParams {
    pub rho: f64,
    pub lambda: [f64; 4],
}

impl Default for Nash1aParams {
    fn default() -> Self {
        Self {
            rho: 2.0,
            lambda: [3.9375, -6.5, -0.25, 2.5],
        }
    }
}

const SIGNS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Rows `(coefficients over the 8 flat variables, constant)`.
fn residual_rows() -> [([f64; 8], f64); 4] {
    [
        ([0.0, 0.0, 2.0, 8.0 / 3.0, 0.0, 0.0, 1.0, 0.0], -34.0),
        ([0.0, 0.0, 1.25, 2.0, 0.0, 0.0, 0.0, 1.0], -24.25),
        ([0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0], -15.0),
        ([1.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0], -15.0),
    ]
}

#[derive(Debug, Clone)]
pub struct Nash1aObjective {
    params: Nash1aParams,
    hess: DMatrix<f64>,
}

impl Nash1aObjective {
    pub fn new(params: Nash1aParams) -> Self {
        let mut h = DMatrix::zeros(8, 8);
        for (i, j) in [(0, 2), (1, 3)] {
            h[(i, i)] += 1.0;
            h[(j, j)] += 1.0;
            h[(i, j)] -= 1.0;
            h[(j, i)] -= 1.0;
        }
        for (a, _) in residual_rows() {
            for i in 0..8 {
                for j in 0..8 {
                    h[(i, j)] += params.rho * a[i] * a[j];
                }
            }
        }
        Self { params, hess: h }
    }

    fn residuals(x: &[f64]) -> [f64; 4] {
        residual_rows().map(|(a, b)| a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + b)
    }
}

impl Objective for Nash1aObjective {
    fn dim(&self) -> usize {
        8
    }

    fn value(&self, x: &[f64]) -> f64 {
        let c = Self::residuals(x);
        let mut f = 0.5 * ((x[0] - x[2]).powi(2) + (x[1] - x[3]).powi(2));
        for k in 0..4 {
            f += SIGNS[k] * self.params.lambda[k] * c[k] + 0.5 * self.params.rho * c[k] * c[k];
        }
        f
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let c = Self::residuals(x);
        let mut g = vec![0.0; 8];
        g[0] = x[0] - x[2];
        g[2] = x[2] - x[0];
        g[1] = x[1] - x[3];
        g[3] = x[3] - x[1];
        for (k, (a, _)) in residual_rows().iter().enumerate() {
            let w = SIGNS[k] * self.params.lambda[k] + self.params.rho * c[k];
            for (gi, ai) in g.iter_mut().zip(a) {
                *gi += w * ai;
            }
        }
        g
    }

    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.hess.clone())
    }

    fn has_hessian(&self) -> bool {
        true
    }
}

/// The `n0 = 4`, `n1 = 2` problem. `a1, a2 ∈ [0, 10]`; `a3, a4` are free.
pub fn nash1a_objective(params: Nash1aParams) -> Result<MpccProblem> {
    MpccProblem::new(
        4,
        2,
        vec![0.0, 0.0, -FREE_BOUND, -FREE_BOUND],
        vec![10.0, 10.0, FREE_BOUND, FREE_BOUND],
        Arc::new(Nash1aObjective::new(params)),
    )
}
