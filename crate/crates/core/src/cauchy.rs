//! Cauchy search along a complementarity-respecting projected-gradient path.
//!
//! The path starts at `x` and follows `-∇f(x)`. Each coordinate moves at a
//! constant velocity until it hits its bound (box bound of `x0`, the trust
//! box, or the kink at zero of a complementarity pair). When a pair reaches
//! its kink, the partner coordinate starts moving if its search direction is
//! strictly positive. Every coordinate therefore moves on at most one time
//! interval, which makes the path piecewise linear with at most `2n`
//! breakpoints.
//!
//! The quadratic model `q(t) = ∇fᵀs(t) + ½ s(t)ᵀ H s(t)` is minimized
//! segment by segment and the first local minimizer is returned.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec};
use crate::lpcc::LpccStep;
use crate::problem::{MpccProblem, PartitionedPoint};

/// Motion of a single coordinate along the path, in path time `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CoordMove {
    start: f64,
    stop: f64,
    velocity: f64,
    /// Exact displacement once the coordinate has stopped.
    end: f64,
}

impl CoordMove {
    const STILL: CoordMove = CoordMove {
        start: 0.0,
        stop: 0.0,
        velocity: 0.0,
        end: 0.0,
    };

    fn new(start: f64, velocity: f64, end: f64) -> Self {
        if velocity == 0.0 || end == 0.0 {
            return Self::STILL;
        }
        CoordMove {
            start,
            stop: start + end / velocity,
            velocity,
            end,
        }
    }

    fn is_moving(&self) -> bool {
        self.velocity != 0.0
    }

    #[inline]
    fn at(&self, tau: f64) -> f64 {
        if !self.is_moving() || tau <= self.start {
            0.0
        } else if tau >= self.stop {
            self.end
        } else {
            self.velocity * (tau - self.start)
        }
    }

    fn active_on(&self, a: f64, b: f64) -> bool {
        self.is_moving() && self.start <= a && self.stop >= b
    }
}

/// Piecewise-linear path `s : [0, 1] -> ℝⁿ` with `s(0) = 0`.
#[derive(Debug, Clone)]
pub struct PiecewisePath {
    moves: Vec<CoordMove>,
    /// Breakpoints in path time, ascending, starting at 0 and ending at `tau_max`.
    taus: Vec<f64>,
}

impl PiecewisePath {
    /// Length of the path in natural time; `t = τ / τ_max`.
    pub fn tau_max(&self) -> f64 {
        *self.taus.last().unwrap_or(&0.0)
    }

    /// Breakpoints on the unit interval.
    pub fn breakpoints(&self) -> Vec<f64> {
        let m = self.tau_max();
        if m == 0.0 {
            return vec![0.0];
        }
        self.taus.iter().map(|t| t / m).collect()
    }

    /// Breakpoints in natural time.
    pub fn breakpoints_tau(&self) -> &[f64] {
        &self.taus
    }

    /// `s(t)` for `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.eval_tau(t.clamp(0.0, 1.0) * self.tau_max())
    }

    /// `s` at natural time `τ`.
    pub fn eval_tau(&self, tau: f64) -> Vec<f64> {
        self.moves.iter().map(|m| m.at(tau)).collect()
    }

    /// Velocity on the open interval `(a, b)` between two consecutive breakpoints.
    fn segment_direction(&self, a: f64, b: f64) -> Vec<f64> {
        self.moves
            .iter()
            .map(|m| if m.active_on(a, b) { m.velocity } else { 0.0 })
            .collect()
    }
}

/// Builds the projected path from `p` along `-grad`, restricted to the trust box of radius `delta`.
pub fn build_path(
    p: &PartitionedPoint,
    grad: &[f64],
    prob: &MpccProblem,
    delta: f64,
) -> Result<PiecewisePath> {
    prob.check_point(p)?;
    if grad.len() != prob.dim() {
        return Err(Error::DimensionMismatch {
            what: "gradient",
            expected: prob.dim(),
            found: grad.len(),
        });
    }
    let (n0, n1) = (prob.n0(), prob.n1());
    let mut moves = vec![CoordMove::STILL; prob.dim()];

    for (i, &x) in p.x0().iter().enumerate() {
        let v = -grad[i];
        let end = if v > 0.0 {
            (prob.upper()[i] - x).min(delta)
        } else if v < 0.0 {
            (prob.lower()[i] - x).max(-delta)
        } else {
            0.0
        };
        moves[i] = CoordMove::new(0.0, v, end);
    }

    let (x1, x2) = (p.x1(), p.x2());
    for i in 0..n1 {
        let (j1, j2) = (n0 + i, n0 + n1 + i);
        let (v1, v2) = (-grad[j1], -grad[j2]);
        if x1[i] > 0.0 {
            let (m, partner) = slide_pair(x1[i], v1, v2, delta);
            moves[j1] = m;
            moves[j2] = partner;
        } else if x2[i] > 0.0 {
            let (m, partner) = slide_pair(x2[i], v2, v1, delta);
            moves[j2] = m;
            moves[j1] = partner;
        } else if v1 > 0.0 && v1 >= v2 {
            moves[j1] = CoordMove::new(0.0, v1, delta);
        } else if v2 > 0.0 {
            moves[j2] = CoordMove::new(0.0, v2, delta);
        }
    }

    let mut taus: Vec<f64> = std::iter::once(0.0)
        .chain(
            moves
                .iter()
                .filter(|m| m.is_moving())
                .flat_map(|m| [m.start, m.stop]),
        )
        .collect();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup();
    Ok(PiecewisePath { moves, taus })
}

/// Motion of the nonzero coordinate of a pair (value `x > 0`, velocity `v`)
/// and of its partner (velocity `w`).
fn slide_pair(x: f64, v: f64, w: f64, delta: f64) -> (CoordMove, CoordMove) {
    if v > 0.0 {
        (CoordMove::new(0.0, v, delta), CoordMove::STILL)
    } else if v < 0.0 {
        if x > delta {
            (CoordMove::new(0.0, v, -delta), CoordMove::STILL)
        } else {
            let m = CoordMove::new(0.0, v, -x);
            let partner = if w > 0.0 {
                CoordMove::new(m.stop, w, delta)
            } else {
                CoordMove::STILL
            };
            (m, partner)
        }
    } else {
        (CoordMove::STILL, CoordMove::STILL)
    }
}

/// First local minimizer of the quadratic model along the path, in natural time.
pub fn first_local_minimizer(path: &PiecewisePath, grad: &[f64], hess: &DMatrix<f64>) -> f64 {
    let taus = &path.taus;
    for seg in taus.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let w = path.segment_direction(a, b);
        let s_a = path.eval_tau(a);
        let hs = mat_vec(hess, &s_a);
        let slope = dot(grad, &w) + dot(&hs, &w);
        let curv = dot(&w, &mat_vec(hess, &w));
        if slope > 0.0 || (slope == 0.0 && curv > 0.0) {
            return a;
        }
        if curv > 0.0 {
            let theta = -slope / curv;
            if theta < b - a {
                return a + theta;
            }
        }
    }
    path.tau_max()
}

/// Result of the Cauchy search.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyOutcome {
    /// The returned step: the Cauchy step if it was accepted, else the LPCC step.
    pub step: Vec<f64>,
    /// Whether the Cauchy step passed the sufficient-decrease test.
    pub accepted: bool,
    /// Parameter `t*` in `[0, 1]`.
    pub t_star: f64,
    /// Ratio of actual reduction to the LPCC predicted reduction (Cauchy point).
    pub ratio: f64,
    /// Objective at `x + s(t*)`.
    pub trial_value: f64,
}

/// Cauchy search with the sufficient-decrease test measured against the LPCC
/// predicted reduction.
pub fn find_cauchy_point(
    p: &PartitionedPoint,
    lpcc: &LpccStep,
    prob: &MpccProblem,
    delta: f64,
    sigma: f64,
) -> Result<CauchyOutcome> {
    if !prob.has_hessian() {
        return Err(Error::MissingHessian("cauchy"));
    }
    let grad = prob.gradient(p)?;
    let hess = prob.hessian(p)?;
    let fx = prob.value(p);
    find_cauchy_point_with(p, fx, &grad, &hess, lpcc, prob, delta, sigma)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn find_cauchy_point_with(
    p: &PartitionedPoint,
    fx: f64,
    grad: &[f64],
    hess: &DMatrix<f64>,
    lpcc: &LpccStep,
    prob: &MpccProblem,
    delta: f64,
    sigma: f64,
) -> Result<CauchyOutcome> {
    if !(lpcc.predicted_reduction > 0.0) {
        return Err(Error::NonPositivePrediction(lpcc.predicted_reduction));
    }
    let path = build_path(p, grad, prob, delta)?;
    let tau = first_local_minimizer(&path, grad, hess);
    let t_star = if path.tau_max() > 0.0 {
        tau / path.tau_max()
    } else {
        0.0
    };
    let s = path.eval_tau(tau);
    let rejected = |ratio, trial_value| CauchyOutcome {
        step: lpcc.d.clone(),
        accepted: false,
        t_star,
        ratio,
        trial_value,
    };
    if s.iter().all(|v| *v == 0.0) {
        return Ok(rejected(0.0, fx));
    }
    let trial = p.step(&s, prob);
    let ft = prob.value(&trial);
    if !ft.is_finite() {
        return Err(Error::NonFinite("objective at Cauchy point"));
    }
    let ratio = (fx - ft) / lpcc.predicted_reduction;
    if ratio >= sigma {
        Ok(CauchyOutcome {
            step: s,
            accepted: true,
            t_star,
            ratio,
            trial_value: ft,
        })
    } else {
        Ok(rejected(ratio, ft))
    }
}
