//! Closed-form solution of the trust-region LPCC subproblem
//!
//! ```text
//! minimize    ∇f(x)ᵀ d
//! subject to  l0 <= x0 + d0 <= u0
//!             0 <= x1 + d1 ⊥ x2 + d2 >= 0
//!             ‖d‖∞ <= Δ
//! ```
//!
//! The objective is separable and the only coupling is inside each
//! complementarity pair, so the problem splits into `n0` one-dimensional LPs
//! and `n1` two-dimensional LPCCs. Each pair has a finite candidate set that
//! provably contains a minimizer.

use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::problem::{MpccProblem, PartitionedPoint};

/// Position of a complementarity pair relative to the trust region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplCase {
    /// `x2 == 0` and `0 <= x1 <= Δ` (includes the biactive pair).
    A,
    /// `x1 == 0` and `0 < x2 <= Δ`.
    B,
    /// `x2 == 0` and `x1 > Δ`.
    C,
    /// `x1 == 0` and `x2 > Δ`.
    D,
}

/// Solution of one LPCC subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct LpccStep {
    /// Step in the flat `(d0, d1, d2)` layout.
    pub d: Vec<f64>,
    /// `-∇f(x)ᵀ d`, always nonnegative.
    pub predicted_reduction: f64,
    pub is_zero: bool,
}

pub fn classify_case(x1: f64, x2: f64, delta: f64) -> Result<ComplCase> {
    if !(x1 >= 0.0 && x2 >= 0.0) || (x1 != 0.0 && x2 != 0.0) {
        return Err(Error::InfeasiblePair(x1, x2));
    }
    Ok(if x2 == 0.0 {
        if x1 <= delta {
            ComplCase::A
        } else {
            ComplCase::C
        }
    } else if x2 <= delta {
        ComplCase::B
    } else {
        ComplCase::D
    })
}

/// Candidate steps `(d1, d2)` for one pair, in the canonical order.
///
/// `(0, 0)` is always first; the solver relies on that for its tie-break.
pub fn candidate_set(x1: f64, x2: f64, delta: f64, case: ComplCase) -> Vec<(f64, f64)> {
    match case {
        ComplCase::A => vec![(0.0, 0.0), (delta, 0.0), (-x1, 0.0), (-x1, delta)],
        ComplCase::B => vec![(0.0, 0.0), (delta, -x2), (0.0, -x2), (0.0, delta)],
        ComplCase::C => vec![(0.0, 0.0), (-delta, 0.0), (delta, 0.0)],
        ComplCase::D => vec![(0.0, 0.0), (0.0, -delta), (0.0, delta)],
    }
}

/// Minimizer over the candidate set. The first candidate with the strictly
/// smallest value wins, so `(0, 0)` is kept whenever it attains the minimum.
fn best_pair(g1: f64, g2: f64, candidates: &[(f64, f64)]) -> (f64, f64) {
    let mut best = candidates[0];
    let mut best_val = g1 * best.0 + g2 * best.1;
    for &c in &candidates[1..] {
        let v = g1 * c.0 + g2 * c.1;
        if v < best_val {
            best = c;
            best_val = v;
        }
    }
    best
}

/// Closed-form LP step for one bounded coordinate.
#[inline]
fn bound_step(g: f64, x: f64, lo: f64, hi: f64, delta: f64) -> f64 {
    if g < 0.0 {
        (hi - x).min(delta)
    } else if g > 0.0 {
        (lo - x).max(-delta)
    } else {
        0.0
    }
}

/// Solves LPCC(x, Δ) exactly in `O(n0 + n1)`.
pub fn solve_lpcc(
    p: &PartitionedPoint,
    grad: &[f64],
    prob: &MpccProblem,
    delta: f64,
) -> Result<LpccStep> {
    prob.check_point(p)?;
    if grad.len() != prob.dim() {
        return Err(Error::DimensionMismatch {
            what: "gradient",
            expected: prob.dim(),
            found: grad.len(),
        });
    }
    if !all_finite(grad) {
        return Err(Error::NonFinite("gradient"));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "trust radius {delta} must be positive"
        )));
    }
    let (n0, n1) = (prob.n0(), prob.n1());
    let mut d = vec![0.0; prob.dim()];
    let x0 = p.x0();
    for i in 0..n0 {
        d[i] = bound_step(grad[i], x0[i], prob.lower()[i], prob.upper()[i], delta);
    }
    let (x1, x2) = (p.x1(), p.x2());
    for i in 0..n1 {
        let (j1, j2) = (n0 + i, n0 + n1 + i);
        let case = classify_case(x1[i], x2[i], delta)?;
        let cands = candidate_set(x1[i], x2[i], delta, case);
        let (a, b) = best_pair(grad[j1], grad[j2], &cands);
        d[j1] = a;
        d[j2] = b;
    }
    // Every chosen component contributes a nonpositive term, so the sum is
    // already nonnegative; the max only guards the sign of zero.
    let predicted_reduction = (-crate::linalg::dot(grad, &d)).max(0.0);
    let is_zero = predicted_reduction == 0.0;
    if is_zero {
        d.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(LpccStep {
        d,
        predicted_reduction,
        is_zero,
    })
}
