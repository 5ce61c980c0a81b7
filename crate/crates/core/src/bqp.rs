//! Second-order BQP step on the active set identified by an accepted step.
//!
//! Given the current iterate `x` and the point `x + d` produced by the inner
//! loop, every complementarity pair gets exactly one coordinate fixed at zero
//! and the other left free with a nonnegativity bound. The resulting
//! bound-constrained QP is solved inside an ∞-norm box of radius `Δ_QP`, so
//! any feasible QP step keeps the iterate feasible for the MPCC.

use nalgebra::DMatrix;

use crate::boxqp::{solve_box_qp, BoxQpOptions};
use crate::error::{Error, Result};
use crate::linalg::quad_model;
use crate::problem::{active_sets, MpccProblem, PartitionedPoint};

/// Bound-constrained QP built around the current iterate.
#[derive(Debug, Clone)]
pub struct BqpSubproblem {
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    /// Lower bound on the step, per coordinate.
    pub lower: Vec<f64>,
    /// Upper bound on the step, per coordinate.
    pub upper: Vec<f64>,
    /// `fixed[j]` marks a complementarity coordinate pinned to zero.
    pub fixed: Vec<bool>,
    pub d1: Vec<usize>,
    pub d2: Vec<usize>,
    pub delta_qp: f64,
}

/// Greedy split of the biactive pairs at `p_next`:
/// `D1 = {i : ∇f₁ᵢ >= ∇f₂ᵢ}` and `D2` the rest.
pub fn partition_biactive(
    p_next: &PartitionedPoint,
    grad_next: &[f64],
) -> (Vec<usize>, Vec<usize>) {
    let (mut d1, mut d2) = (Vec::new(), Vec::new());
    for (i, (&a, &b)) in p_next.x1().iter().zip(p_next.x2()).enumerate() {
        if a == 0.0 && b == 0.0 {
            if grad_next[p_next.idx1(i)] >= grad_next[p_next.idx2(i)] {
                d1.push(i);
            } else {
                d2.push(i);
            }
        }
    }
    (d1, d2)
}

/// Builds BQP(x, Δ_QP) from the active sets at `x_next`.
///
/// Pairs in `D1` pin `x1` (the coordinate with the larger gradient) and leave
/// `x2` free; pairs in `D2` do the opposite. Nondegenerate pairs pin the
/// coordinate that is zero at `x_next`.
#[allow(clippy::too_many_arguments)]
pub fn build_subproblem(
    x: &PartitionedPoint,
    grad: &[f64],
    hess: DMatrix<f64>,
    x_next: &PartitionedPoint,
    grad_next: &[f64],
    prob: &MpccProblem,
    delta_qp: f64,
    bound_tol: f64,
) -> Result<BqpSubproblem> {
    prob.check_point(x)?;
    prob.check_point(x_next)?;
    let n = prob.dim();
    let (n0, n1) = (prob.n0(), prob.n1());
    let sets = active_sets(x_next, prob, bound_tol);
    let (d1, d2) = partition_biactive(x_next, grad_next);
    let xs = x.as_slice();

    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut fixed = vec![false; n];
    for i in 0..n0 {
        lower[i] = (prob.lower()[i] - xs[i]).max(-delta_qp);
        upper[i] = (prob.upper()[i] - xs[i]).min(delta_qp);
    }
    let mut pin_x1 = vec![false; n1];
    for &i in &sets.a1plus {
        pin_x1[i] = true;
    }
    for &i in &d1 {
        pin_x1[i] = true;
    }
    for i in 0..n1 {
        let (j1, j2) = (n0 + i, n0 + n1 + i);
        let (pinned, free) = if pin_x1[i] { (j1, j2) } else { (j2, j1) };
        // pinned coordinates ignore the trust box: they may need to travel
        // further than Δ_QP to reach the kink chosen by the inner loop
        fixed[pinned] = true;
        lower[pinned] = -xs[pinned];
        upper[pinned] = -xs[pinned];
        lower[free] = (-xs[free]).max(-delta_qp);
        upper[free] = delta_qp;
    }
    Ok(BqpSubproblem {
        grad: grad.to_vec(),
        hess,
        lower,
        upper,
        fixed,
        d1,
        d2,
        delta_qp,
    })
}

/// Solves the QP; returns the step and the number of QP iterations.
pub fn solve_bqp_inner(sub: &BqpSubproblem) -> Result<(Vec<f64>, usize)> {
    let sol = solve_box_qp(
        &sub.hess,
        &sub.grad,
        &sub.lower,
        &sub.upper,
        BoxQpOptions::default(),
    )?;
    Ok((sol.d, sol.iterations))
}

/// Radius update after a BQP step.
pub fn update_radius(delta_qp: f64, rho_qp: f64, delta_bar: f64) -> f64 {
    if rho_qp >= 0.75 {
        delta_bar.min(2.0 * delta_qp)
    } else if rho_qp >= 0.25 {
        delta_qp
    } else {
        0.25 * delta_qp
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BqpOutcome {
    /// New iterate if the step was accepted.
    pub point: Option<PartitionedPoint>,
    pub value: f64,
    pub rho_qp: f64,
    pub delta_qp: f64,
    pub qp_iterations: usize,
}

/// Computes a BQP step around `x` and decides whether it replaces `x_next`.
///
/// The step is accepted when `ρ_QP >= ρ_ll / 2`, or when it has a positive
/// ratio and a lower objective than `x_next`.
pub fn bqp_step(
    x: &PartitionedPoint,
    x_next: &PartitionedPoint,
    prob: &MpccProblem,
    delta_qp: f64,
    rho_ll: f64,
    delta_bar: f64,
) -> Result<BqpOutcome> {
    if !prob.has_hessian() {
        return Err(Error::MissingHessian("plain"));
    }
    let fx = prob.value(x);
    let grad = prob.gradient(x)?;
    let hess = prob.hessian(x)?;
    let grad_next = prob.gradient(x_next)?;
    let f_next = prob.value(x_next);
    bqp_step_with(
        x, fx, &grad, hess, x_next, &grad_next, prob, delta_qp, rho_ll, delta_bar, f_next, 1e-12,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn bqp_step_with(
    x: &PartitionedPoint,
    fx: f64,
    grad: &[f64],
    hess: DMatrix<f64>,
    x_next: &PartitionedPoint,
    grad_next: &[f64],
    prob: &MpccProblem,
    delta_qp: f64,
    rho_ll: f64,
    delta_bar: f64,
    f_next: f64,
    bound_tol: f64,
) -> Result<BqpOutcome> {
    let sub = build_subproblem(x, grad, hess, x_next, grad_next, prob, delta_qp, bound_tol)?;
    let (d, qp_iterations) = solve_bqp_inner(&sub)?;
    let predicted = -quad_model(&sub.grad, &sub.hess, &d);

    let mut trial = x.step(&d, prob);
    // pinned coordinates land exactly on the kink
    let data = trial.as_mut_slice();
    for (j, &pinned) in sub.fixed.iter().enumerate() {
        if pinned {
            data[j] = 0.0;
        }
    }
    debug_assert!(trial.is_feasible(prob));
    let ft = prob.value(&trial);

    let rho_qp = if predicted > 0.0 && ft.is_finite() {
        (fx - ft) / predicted
    } else {
        f64::NEG_INFINITY
    };
    let new_radius = update_radius(delta_qp, rho_qp, delta_bar);
    // A point that beats x_next inherits its sufficient decrease, which
    // matters when rho_ll is inflated by round-off on a tiny LPCC step.
    let accepted = rho_qp >= 0.5 * rho_ll || (rho_qp > 0.0 && ft < f_next);
    Ok(BqpOutcome {
        point: accepted.then_some(trial),
        value: ft,
        rho_qp,
        delta_qp: new_radius,
        qp_iterations,
    })
}
