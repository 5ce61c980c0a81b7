//! Trust-region driver.
//!
//! Each outer iteration resets the radius, then repeatedly solves the LPCC
//! and halves the radius until a step passes the sufficient-decrease test.
//! Accepted steps may be improved by a Cauchy search along a projected path
//! and by a BQP step on the identified active set.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bqp::bqp_step_with;
use crate::cauchy::find_cauchy_point_with;
use crate::config::{ResetPolicy, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::lpcc::solve_lpcc;
use crate::problem::{stationarity_from_gradient, MpccProblem, PartitionedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// The LPCC returned a zero step: no feasible first-order descent exists.
    BStationary,
    /// The criticality measure fell below the configured tolerance.
    ToleranceReached,
    /// The objective dropped below `-unbounded_cutoff`.
    Unbounded,
    /// The radius was halved `max_inner_halvings` times without a successful step.
    InnerLoopStall,
    IterationLimit,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::BStationary => "b_stationary",
            SolveStatus::ToleranceReached => "tolerance_reached",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::InnerLoopStall => "inner_loop_stall",
            SolveStatus::IterationLimit => "iteration_limit",
        }
    }

    /// `true` for the two statuses that certify (approximate) stationarity.
    pub fn is_success(self) -> bool {
        matches!(
            self,
            SolveStatus::BStationary | SolveStatus::ToleranceReached
        )
    }
}

/// How an iterate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Start,
    Lpcc,
    Cauchy,
    Bqp,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::Start => "start",
            StepKind::Lpcc => "lpcc",
            StepKind::Cauchy => "cauchy",
            StepKind::Bqp => "bqp",
        }
    }
}

/// One row per iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub fval: f64,
    pub chi: f64,
    /// Accepted inner radius that produced this iterate (initial radius for the start).
    pub delta: f64,
    pub step: StepKind,
    /// LPCC solves spent in the outer iteration that produced this iterate.
    pub inner_iters: usize,
    /// BQP subproblems solved in that outer iteration (0 or 1).
    pub bqp_iters: usize,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterates: Vec<IterationRecord>,
    /// Number of accepted outer steps.
    pub outer_iters: usize,
    /// Total LPCC solves over all inner loops.
    pub total_inner_iters: usize,
    /// Total BQP subproblems solved.
    pub bqp_iters: usize,
    /// Total iterations of the box-QP solver.
    pub qp_iterations: usize,
    pub final_point: PartitionedPoint,
    pub final_f: f64,
    pub final_chi: f64,
}

/// Actual over predicted reduction.
pub fn accept_ratio(f_old: f64, f_new: f64, predicted: f64) -> Result<f64> {
    if !(predicted > 0.0) {
        return Err(Error::NonPositivePrediction(predicted));
    }
    Ok((f_old - f_new) / predicted)
}

fn checked_value(prob: &MpccProblem, p: &PartitionedPoint) -> Result<f64> {
    let f = prob.value(p);
    if f.is_nan() || f == f64::INFINITY {
        return Err(Error::NonFinite("objective"));
    }
    Ok(f)
}

fn checked_gradient(prob: &MpccProblem, p: &PartitionedPoint) -> Result<Vec<f64>> {
    let g = prob.gradient(p)?;
    if !all_finite(&g) {
        return Err(Error::NonFinite("gradient"));
    }
    Ok(g)
}

fn checked_hessian(prob: &MpccProblem, p: &PartitionedPoint) -> Result<DMatrix<f64>> {
    let h = prob.hessian(p)?;
    if !h.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("hessian"));
    }
    Ok(h)
}

/// Whether some pair sits next to a corner that offers descent: dropping its
/// nonzero coordinate to 0 raises `f` by at most `tol`, and the partner
/// coordinate has a negative derivative. Near such a corner the measure can
/// be tiny although the corner itself is not B-stationary.
fn corner_nearby(
    prob: &MpccProblem,
    x: &PartitionedPoint,
    fx: f64,
    grad: &[f64],
    tol: f64,
) -> bool {
    let xs = x.as_slice();
    let mut trial = xs.to_vec();
    (0..x.n1()).any(|i| {
        let (j1, j2) = (x.idx1(i), x.idx2(i));
        let (own, partner) = if xs[j1] > 0.0 {
            (j1, j2)
        } else if xs[j2] > 0.0 {
            (j2, j1)
        } else {
            return false;
        };
        if grad[partner] >= -tol {
            return false;
        }
        trial[own] = 0.0;
        let fc = prob.objective().value(&trial);
        trial[own] = xs[own];
        fc <= fx + tol
    })
}

/// Whether `d` moves some pair from one branch to the other.
fn switches_branch(x: &PartitionedPoint, d: &[f64]) -> bool {
    (0..x.n1()).any(|i| {
        let (j1, j2) = (x.idx1(i), x.idx2(i));
        let xs = x.as_slice();
        (xs[j1] > 0.0 && d[j2] > 0.0) || (xs[j2] > 0.0 && d[j1] > 0.0)
    })
}

/// Runs the trust-region method from a feasible starting point.
pub fn slpcc_solve(
    prob: &MpccProblem,
    x_init: &PartitionedPoint,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    prob.check_point(x_init)?;
    if let Some(why) = x_init.infeasibility(prob) {
        return Err(Error::Infeasible(why));
    }
    let variant = cfg.variant;
    if (variant.uses_bqp() || variant.uses_cauchy()) && !prob.has_hessian() {
        return Err(Error::MissingHessian(variant.name()));
    }

    let mut x = x_init.clone();
    let mut fx = checked_value(prob, &x)?;
    let mut grad = checked_gradient(prob, &x)?;
    let mut chi = stationarity_from_gradient(&x, &grad, prob)?;

    let mut delta_bar = cfg.delta_bar0;
    let mut delta_qp = cfg.delta_qp0.unwrap_or(cfg.delta_bar0);
    let mut prev_delta: Option<f64> = None;
    let first_delta = cfg.initial_delta.unwrap_or(cfg.delta_min);

    let mut iterates = vec![IterationRecord {
        iter: 0,
        fval: fx,
        chi,
        delta: first_delta,
        step: StepKind::Start,
        inner_iters: 0,
        bqp_iters: 0,
        point: x.as_slice().to_vec(),
    }];
    let mut outer_iters = 0;
    let mut total_inner_iters = 0;
    let mut bqp_iters = 0;
    let mut qp_iterations = 0;

    let status = 'outer: loop {
        if chi == 0.0 {
            break SolveStatus::BStationary;
        }
        if fx <= -cfg.unbounded_cutoff {
            break SolveStatus::Unbounded;
        }
        if outer_iters >= cfg.max_outer {
            break SolveStatus::IterationLimit;
        }

        let mut delta = match (prev_delta, cfg.reset_policy) {
            (None, _) => first_delta,
            (Some(d), ResetPolicy::DoublePrevious) => (2.0 * d).clamp(cfg.delta_min, delta_bar),
            (Some(_), ResetPolicy::AlwaysDeltaBar) => delta_bar,
            (Some(_), ResetPolicy::AlwaysDeltaMin) => cfg.delta_min,
        };
        let hess = if variant.uses_cauchy() || variant.uses_bqp() {
            Some(checked_hessian(prob, &x)?)
        } else {
            None
        };
        if chi <= cfg.stationarity_tol && !corner_nearby(prob, &x, fx, &grad, cfg.stationarity_tol)
        {
            break SolveStatus::ToleranceReached;
        }

        let mut inner = 0;
        let mut halvings = 0;
        let (x_next, f_next, rho, kind) = loop {
            let lp = solve_lpcc(&x, &grad, prob, delta)?;
            inner += 1;
            total_inner_iters += 1;
            if lp.is_zero {
                break 'outer SolveStatus::BStationary;
            }
            // χ only looks along the current branches, so a point next to a
            // profitable branch switch can have a tiny χ; in that case the
            // switching step is tried first.
            if chi <= cfg.stationarity_tol && !switches_branch(&x, &lp.d) {
                break 'outer SolveStatus::ToleranceReached;
            }
            let mut accepted = None;
            if let (true, Some(h)) = (variant.uses_cauchy(), hess.as_ref()) {
                let co = find_cauchy_point_with(&x, fx, &grad, h, &lp, prob, delta, cfg.sigma)?;
                if co.accepted {
                    let trial = x.step(&co.step, prob);
                    accepted = Some((trial, co.trial_value, co.ratio, StepKind::Cauchy));
                }
            }
            if accepted.is_none() {
                let trial = x.step(&lp.d, prob);
                let ft = checked_value(prob, &trial)?;
                let rho = accept_ratio(fx, ft, lp.predicted_reduction)?;
                if rho >= cfg.sigma {
                    accepted = Some((trial, ft, rho, StepKind::Lpcc));
                }
            }
            if let Some(a) = accepted {
                break a;
            }
            halvings += 1;
            if halvings >= cfg.max_inner_halvings {
                break 'outer SolveStatus::InnerLoopStall;
            }
            delta *= 0.5;
        };

        delta_bar = delta_bar.max(2.0 * delta);
        prev_delta = Some(delta);

        let mut x_new = x_next;
        let mut f_new = f_next;
        let mut kind = kind;
        let mut bqp_count = 0;
        if let (true, Some(h)) = (variant.uses_bqp(), hess) {
            let grad_next = checked_gradient(prob, &x_new)?;
            let out = bqp_step_with(
                &x,
                fx,
                &grad,
                h,
                &x_new,
                &grad_next,
                prob,
                delta_qp,
                rho,
                delta_bar,
                f_new,
                cfg.bound_tol,
            )?;
            bqp_count = 1;
            bqp_iters += 1;
            qp_iterations += out.qp_iterations;
            delta_qp = out.delta_qp;
            if let Some(p) = out.point {
                x_new = p;
                f_new = out.value;
                kind = StepKind::Bqp;
            }
        }

        x = x_new;
        fx = f_new;
        grad = checked_gradient(prob, &x)?;
        chi = stationarity_from_gradient(&x, &grad, prob)?;
        outer_iters += 1;
        iterates.push(IterationRecord {
            iter: outer_iters,
            fval: fx,
            chi,
            delta,
            step: kind,
            inner_iters: inner,
            bqp_iters: bqp_count,
            point: x.as_slice().to_vec(),
        });
    };

    Ok(SolveReport {
        status,
        iterates,
        outer_iters,
        total_inner_iters,
        bqp_iters,
        qp_iterations,
        final_f: fx,
        final_chi: chi,
        final_point: x,
    })
}
