//! Problem model for bound-constrained MPCCs.
//!
//! A problem has `n0` box-constrained variables and `n1` complementarity
//! pairs. Points are stored as one flat vector laid out as
//! `(x0, x1, x2)`, so objective oracles see a plain `&[f64]` of length
//! `n0 + 2 * n1`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Smooth objective oracle.
///
/// Implementations must be pure: the same input yields the same output, and
/// concurrent calls from several threads are allowed.
pub trait Objective: Send + Sync {
    /// Number of variables `n0 + 2 * n1`.
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Dense symmetric Hessian, when available.
    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn has_hessian(&self) -> bool {
        false
    }
}

/// Bound-constrained MPCC:
///
/// ```text
/// minimize f(x)  subject to  l0 <= x0 <= u0,  0 <= x1 ⊥ x2 >= 0
/// ```
#[derive(Clone)]
pub struct MpccProblem {
    n0: usize,
    n1: usize,
    l0: Vec<f64>,
    u0: Vec<f64>,
    objective: Arc<dyn Objective>,
}

impl fmt::Debug for MpccProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MpccProblem")
            .field("n0", &self.n0)
            .field("n1", &self.n1)
            .field("l0", &self.l0)
            .field("u0", &self.u0)
            .field("has_hessian", &self.objective.has_hessian())
            .finish()
    }
}

impl MpccProblem {
    pub fn new(
        n0: usize,
        n1: usize,
        l0: Vec<f64>,
        u0: Vec<f64>,
        objective: Arc<dyn Objective>,
    ) -> Result<Self> {
        if l0.len() != n0 {
            return Err(Error::DimensionMismatch {
                what: "l0",
                expected: n0,
                found: l0.len(),
            });
        }
        if u0.len() != n0 {
            return Err(Error::DimensionMismatch {
                what: "u0",
                expected: n0,
                found: u0.len(),
            });
        }
        for (i, (&l, &u)) in l0.iter().zip(&u0).enumerate() {
            if !(l < u) || l.is_nan() || u.is_nan() {
                return Err(Error::InvalidBounds {
                    index: i,
                    lower: l,
                    upper: u,
                });
            }
        }
        if objective.dim() != n0 + 2 * n1 {
            return Err(Error::DimensionMismatch {
                what: "objective",
                expected: n0 + 2 * n1,
                found: objective.dim(),
            });
        }
        Ok(Self {
            n0,
            n1,
            l0,
            u0,
            objective,
        })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    /// Total number of variables.
    pub fn dim(&self) -> usize {
        self.n0 + 2 * self.n1
    }

    pub fn lower(&self) -> &[f64] {
        &self.l0
    }

    pub fn upper(&self) -> &[f64] {
        &self.u0
    }

    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }

    pub fn has_hessian(&self) -> bool {
        self.objective.has_hessian()
    }

    pub fn value(&self, p: &PartitionedPoint) -> f64 {
        self.objective.value(p.as_slice())
    }

    pub fn gradient(&self, p: &PartitionedPoint) -> Result<Vec<f64>> {
        let g = self.objective.gradient(p.as_slice());
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "gradient",
                expected: self.dim(),
                found: g.len(),
            });
        }
        Ok(g)
    }

    pub fn hessian(&self, p: &PartitionedPoint) -> Result<DMatrix<f64>> {
        let h = self
            .objective
            .hessian(p.as_slice())
            .ok_or(Error::MissingHessian("second-order"))?;
        if h.nrows() != self.dim() || h.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "hessian",
                expected: self.dim(),
                found: h.nrows(),
            });
        }
        Ok(h)
    }

    pub(crate) fn check_point(&self, p: &PartitionedPoint) -> Result<()> {
        if p.n0 != self.n0 {
            return Err(Error::DimensionMismatch {
                what: "x0",
                expected: self.n0,
                found: p.n0,
            });
        }
        if p.n1 != self.n1 {
            return Err(Error::DimensionMismatch {
                what: "x1/x2",
                expected: self.n1,
                found: p.n1,
            });
        }
        Ok(())
    }
}

/// A point `x = (x0, x1, x2)` stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedPoint {
    n0: usize,
    n1: usize,
    data: Vec<f64>,
}

impl PartitionedPoint {
    pub fn new(x0: &[f64], x1: &[f64], x2: &[f64]) -> Result<Self> {
        if x1.len() != x2.len() {
            return Err(Error::DimensionMismatch {
                what: "x2",
                expected: x1.len(),
                found: x2.len(),
            });
        }
        let mut data = Vec::with_capacity(x0.len() + 2 * x1.len());
        data.extend_from_slice(x0);
        data.extend_from_slice(x1);
        data.extend_from_slice(x2);
        Ok(Self {
            n0: x0.len(),
            n1: x1.len(),
            data,
        })
    }

    pub fn from_flat(n0: usize, n1: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n0 + 2 * n1 {
            return Err(Error::DimensionMismatch {
                what: "point",
                expected: n0 + 2 * n1,
                found: data.len(),
            });
        }
        Ok(Self { n0, n1, data })
    }

    pub fn zeros(n0: usize, n1: usize) -> Self {
        Self {
            n0,
            n1,
            data: vec![0.0; n0 + 2 * n1],
        }
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn x0(&self) -> &[f64] {
        &self.data[..self.n0]
    }

    pub fn x1(&self) -> &[f64] {
        &self.data[self.n0..self.n0 + self.n1]
    }

    pub fn x2(&self) -> &[f64] {
        &self.data[self.n0 + self.n1..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Flat index of `x1[i]`.
    pub fn idx1(&self, i: usize) -> usize {
        self.n0 + i
    }

    /// Flat index of `x2[i]`.
    pub fn idx2(&self, i: usize) -> usize {
        self.n0 + self.n1 + i
    }

    /// Exact feasibility: bounds on `x0`, nonnegativity and `x1[i] * x2[i] == 0`.
    pub fn is_feasible(&self, prob: &MpccProblem) -> bool {
        self.infeasibility(prob).is_none()
    }

    pub(crate) fn infeasibility(&self, prob: &MpccProblem) -> Option<String> {
        if self.n0 != prob.n0() || self.n1 != prob.n1() {
            return Some("dimension mismatch".into());
        }
        for (i, &v) in self.x0().iter().enumerate() {
            if !(prob.l0[i] <= v && v <= prob.u0[i]) {
                return Some(format!(
                    "x0[{i}] = {v} outside [{}, {}]",
                    prob.l0[i], prob.u0[i]
                ));
            }
        }
        for (i, (&a, &b)) in self.x1().iter().zip(self.x2()).enumerate() {
            if !(a >= 0.0 && b >= 0.0) || (a != 0.0 && b != 0.0) {
                return Some(format!("pair {i} = ({a}, {b}) violates 0 <= x1 ⊥ x2 >= 0"));
            }
        }
        None
    }

    /// `x + d`, with round-off repaired so the result stays on the feasible set.
    ///
    /// Callers guarantee `d` is feasible in exact arithmetic; this only clamps
    /// `x0` into its bounds and `x1`, `x2` at zero.
    pub(crate) fn step(&self, d: &[f64], prob: &MpccProblem) -> PartitionedPoint {
        debug_assert_eq!(d.len(), self.data.len());
        let mut data: Vec<f64> = self.data.iter().zip(d).map(|(x, s)| x + s).collect();
        for i in 0..self.n0 {
            data[i] = data[i].clamp(prob.l0[i], prob.u0[i]);
        }
        for v in &mut data[self.n0..] {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        PartitionedPoint {
            n0: self.n0,
            n1: self.n1,
            data,
        }
    }
}

/// Active index sets at a feasible point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActiveSets {
    pub a0l: Vec<usize>,
    pub a0u: Vec<usize>,
    pub a1: Vec<usize>,
    pub a2: Vec<usize>,
    pub a1plus: Vec<usize>,
    pub a2plus: Vec<usize>,
    pub degenerate: Vec<usize>,
}

/// Projects an arbitrary point onto the feasible set.
///
/// `x0` is clamped into its bounds; each pair is first clipped at zero and
/// the smaller coordinate (`x1` on ties) is then set to zero.
pub fn project_feasible(p: &PartitionedPoint, prob: &MpccProblem) -> Result<PartitionedPoint> {
    prob.check_point(p)?;
    let (n0, n1) = (p.n0, p.n1);
    let mut data = p.data.clone();
    for i in 0..n0 {
        data[i] = data[i].clamp(prob.l0[i], prob.u0[i]);
    }
    for i in 0..n1 {
        let a = data[n0 + i].max(0.0);
        let b = data[n0 + n1 + i].max(0.0);
        if a <= b {
            data[n0 + i] = 0.0;
            data[n0 + n1 + i] = b;
        } else {
            data[n0 + i] = a;
            data[n0 + n1 + i] = 0.0;
        }
    }
    Ok(PartitionedPoint { n0, n1, data })
}

/// Active sets at `p`; `x0` activity uses `|x0 - bound| <= bound_tol`.
pub fn active_sets(p: &PartitionedPoint, prob: &MpccProblem, bound_tol: f64) -> ActiveSets {
    let mut sets = ActiveSets::default();
    for (i, &v) in p.x0().iter().enumerate() {
        if (v - prob.l0[i]).abs() <= bound_tol {
            sets.a0l.push(i);
        } else if (v - prob.u0[i]).abs() <= bound_tol {
            sets.a0u.push(i);
        }
    }
    for (i, (&a, &b)) in p.x1().iter().zip(p.x2()).enumerate() {
        let in1 = a == 0.0;
        let in2 = b == 0.0;
        if in1 {
            sets.a1.push(i);
        }
        if in2 {
            sets.a2.push(i);
        }
        match (in1, in2) {
            (true, true) => sets.degenerate.push(i),
            (true, false) => sets.a1plus.push(i),
            (false, true) => sets.a2plus.push(i),
            (false, false) => {}
        }
    }
    sets
}

/// Criticality measure at unit radius.
///
/// The largest first-order decrease `-∇f(x)ᵀd` over steps with `‖d‖∞ <= 1`
/// that keep `x0` in its box and stay on the current branch of every
/// nondegenerate pair (a pair with `x1 > 0` may only move `x1`, down to 0 at
/// most). Biactive pairs may increase either coordinate. The value is
/// nonnegative and vanishes exactly at B-stationary points.
pub fn stationarity_measure(p: &PartitionedPoint, prob: &MpccProblem) -> Result<f64> {
    let g = prob.gradient(p)?;
    stationarity_from_gradient(p, &g, prob)
}

pub(crate) fn stationarity_from_gradient(
    p: &PartitionedPoint,
    grad: &[f64],
    prob: &MpccProblem,
) -> Result<f64> {
    prob.check_point(p)?;
    if grad.len() != prob.dim() {
        return Err(Error::DimensionMismatch {
            what: "gradient",
            expected: prob.dim(),
            found: grad.len(),
        });
    }
    if !grad.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let mut chi = 0.0;
    for (i, &x) in p.x0().iter().enumerate() {
        let g = grad[i];
        if g < 0.0 {
            chi -= g * (prob.u0[i] - x).min(1.0);
        } else if g > 0.0 {
            chi += g * (x - prob.l0[i]).min(1.0);
        }
    }
    for (i, (&a, &b)) in p.x1().iter().zip(p.x2()).enumerate() {
        let (g1, g2) = (grad[p.idx1(i)], grad[p.idx2(i)]);
        chi += if a > 0.0 {
            (g1 * a.min(1.0)).max(-g1).max(0.0)
        } else if b > 0.0 {
            (g2 * b.min(1.0)).max(-g2).max(0.0)
        } else {
            (-g1).max(-g2).max(0.0)
        };
    }
    Ok(chi)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Zero(usize);
    impl Objective for Zero {
        fn dim(&self) -> usize {
            self.0
        }
        fn value(&self, _x: &[f64]) -> f64 {
            0.0
        }
        fn gradient(&self, _x: &[f64]) -> Vec<f64> {
            vec![0.0; self.0]
        }
    }

    fn prob(n0: usize, n1: usize) -> MpccProblem {
        MpccProblem::new(
            n0,
            n1,
            vec![-1.0; n0],
            vec![1.0; n0],
            Arc::new(Zero(n0 + 2 * n1)),
        )
        .unwrap()
    }

    #[test]
    fn projection_follows_the_case_rule() {
        let pr = prob(1, 3);
        let p = PartitionedPoint::new(&[5.0], &[-1.0, 2.0, 1.0], &[3.0, 1.0, 1.0]).unwrap();
        let q = project_feasible(&p, &pr).unwrap();
        assert_eq!(q.x0(), &[1.0]);
        assert_eq!(q.x1(), &[0.0, 2.0, 0.0]);
        assert_eq!(q.x2(), &[3.0, 0.0, 1.0]);
        assert!(q.is_feasible(&pr));
    }

    #[test]
    fn projection_keeps_feasible_points() {
        let pr = prob(1, 1);
        let p = PartitionedPoint::new(&[0.25], &[0.0], &[2.0]).unwrap();
        assert_eq!(project_feasible(&p, &pr).unwrap(), p);
    }

    #[test]
    fn projection_rejects_wrong_dimensions() {
        let pr = prob(1, 1);
        let p = PartitionedPoint::new(&[0.0, 0.0], &[0.0], &[0.0]).unwrap();
        assert!(matches!(
            project_feasible(&p, &pr),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn active_sets_strict_and_biactive() {
        let pr = prob(2, 2);
        let p = PartitionedPoint::new(&[-1.0, 0.5], &[0.0, 3.0], &[5.0, 0.0]).unwrap();
        let s = active_sets(&p, &pr, 0.0);
        assert_eq!(s.a0l, vec![0]);
        assert!(s.a0u.is_empty());
        assert_eq!(s.a1, vec![0]);
        assert_eq!(s.a2, vec![1]);
        assert!(s.degenerate.is_empty());
        assert_eq!(s.a1plus, vec![0]);
        assert_eq!(s.a2plus, vec![1]);

        let pr = prob(0, 1);
        let p = PartitionedPoint::new(&[], &[0.0], &[0.0]).unwrap();
        let s = active_sets(&p, &pr, 0.0);
        assert_eq!(s.degenerate, vec![0]);
        assert!(s.a1plus.is_empty() && s.a2plus.is_empty());
    }

    #[test]
    fn invalid_bounds_are_rejected() {
        let err = MpccProblem::new(1, 0, vec![1.0], vec![1.0], Arc::new(Zero(1))).unwrap_err();
        assert!(matches!(err, Error::InvalidBounds { index: 0, .. }));
    }

    #[test]
    fn measure_ignores_branch_switches() {
        let pr = prob(1, 2);
        // x1 > 0 with g1 = 0: switching to x2 would help but is not local
        let p = PartitionedPoint::new(&[1.0], &[0.5, 0.0], &[0.0, 0.0]).unwrap();
        let g = [-3.0, 0.0, 2.0, -5.0, 1.0];
        // x0 at its upper bound; pair 0 stuck; pair 1 biactive can raise x1 by 1
        assert_eq!(stationarity_from_gradient(&p, &g, &pr).unwrap(), 0.0);
        let g = [1.0, 4.0, -2.0, 0.0, -1.0];
        // x0: 1 * min(2, 1); pair 0: 4 * 0.5; pair 1: max(2, 1)
        assert_eq!(
            stationarity_from_gradient(&p, &g, &pr).unwrap(),
            1.0 + 2.0 + 2.0
        );
    }

    #[test]
    fn zero_gradient_is_stationary() {
        let pr = prob(2, 2);
        let p = PartitionedPoint::new(&[0.0, 0.5], &[0.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(stationarity_measure(&p, &pr).unwrap(), 0.0);
    }
}
