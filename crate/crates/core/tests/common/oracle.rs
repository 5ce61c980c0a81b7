#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use slpcc::bench::QuadraticObjective;
use slpcc::linalg::quad_model;
use slpcc::{MpccProblem, Objective, PartitionedPoint};

pub fn zero_problem(n0: usize, n1: usize, lower: Vec<f64>, upper: Vec<f64>) -> MpccProblem {
    let n = n0 + 2 * n1;
    let f = QuadraticObjective::new(n, &[], vec![0.0; n], None).unwrap();
    MpccProblem::new(n0, n1, lower, upper, Arc::new(f)).unwrap()
}

pub fn random_problem<R: Rng>(rng: &mut R) -> MpccProblem {
    let n0 = rng.random_range(0..=3);
    let n1 = rng.random_range(1..=3);
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for _ in 0..n0 {
        let l = f64::from(rng.random_range(-4..=0)) * 0.5;
        lo.push(l);
        hi.push(l + f64::from(rng.random_range(1..=6)) * 0.5);
    }
    zero_problem(n0, n1, lo, hi)
}

/// Minimum of `g·d` over the feasible trust-region set, by listing every
/// vertex of each linear piece of the feasible set.
pub fn lpcc_oracle(p: &PartitionedPoint, g: &[f64], prob: &MpccProblem, delta: f64) -> f64 {
    let mut best = 0.0;
    for (i, &x) in p.x0().iter().enumerate() {
        let lo = (prob.lower()[i] - x).max(-delta);
        let hi = (prob.upper()[i] - x).min(delta);
        best += (g[i] * lo).min(g[i] * hi);
    }
    for i in 0..prob.n1() {
        let (a, b) = (p.x1()[i], p.x2()[i]);
        let (g1, g2) = (g[p.idx1(i)], g[p.idx2(i)]);
        let mut vertices = Vec::new();
        // branch x2 + d2 = 0, x1 + d1 >= 0
        if b <= delta {
            for d1 in [(-a).max(-delta), delta] {
                vertices.push((d1, -b));
            }
        }
        // branch x1 + d1 = 0, x2 + d2 >= 0
        if a <= delta {
            for d2 in [(-b).max(-delta), delta] {
                vertices.push((-a, d2));
            }
        }
        assert!(
            !vertices.is_empty(),
            "a feasible point always has a branch within reach"
        );
        best += vertices
            .iter()
            .map(|(d1, d2)| g1 * d1 + g2 * d2)
            .fold(f64::INFINITY, f64::min);
    }
    best
}

pub fn assert_feasible_step(p: &PartitionedPoint, d: &[f64], prob: &MpccProblem, delta: f64) {
    let x = p.as_slice();
    for (i, di) in d.iter().enumerate() {
        assert!(
            di.abs() <= delta * (1.0 + 1e-15),
            "trust box violated at {i}"
        );
    }
    for i in 0..prob.n0() {
        let v = x[i] + d[i];
        assert!(v >= prob.lower()[i] - 1e-12 && v <= prob.upper()[i] + 1e-12);
    }
    for i in 0..prob.n1() {
        let (a, b) = (x[p.idx1(i)] + d[p.idx1(i)], x[p.idx2(i)] + d[p.idx2(i)]);
        assert!(a >= -1e-12 && b >= -1e-12);
        assert!(
            a.abs() <= 1e-12 || b.abs() <= 1e-12,
            "pair {i} not complementary: {a}, {b}"
        );
    }
}

/// Exhaustive active-set solve of `min gᵀd + ½dᵀHd, lo <= d <= hi`: each
/// coordinate is at its lower bound, at its upper bound or free.
pub fn enumerate_box_qp(h: &DMatrix<f64>, g: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, f64) {
    let n = g.len();
    let mut best = (vec![0.0; n], f64::INFINITY);
    for code in 0..3usize.pow(n as u32) {
        let mut d = vec![0.0; n];
        let mut free = Vec::new();
        let mut c = code;
        for i in 0..n {
            match c % 3 {
                0 => d[i] = lo[i],
                1 => d[i] = hi[i],
                _ => free.push(i),
            }
            c /= 3;
        }
        if !free.is_empty() {
            let k = free.len();
            let hff = DMatrix::from_fn(k, k, |a, b| h[(free[a], free[b])]);
            let rhs = DVector::from_fn(k, |a, _| {
                let i = free[a];
                -g[i]
                    - (0..n)
                        .filter(|j| !free.contains(j))
                        .map(|j| h[(i, j)] * d[j])
                        .sum::<f64>()
            });
            let Some(sol) = hff.lu().solve(&rhs) else {
                continue;
            };
            for (a, &i) in free.iter().enumerate() {
                d[i] = sol[a];
            }
            if free
                .iter()
                .any(|&i| d[i] < lo[i] - 1e-12 || d[i] > hi[i] + 1e-12)
            {
                continue;
            }
        }
        let q = quad_model(g, h, &d);
        if q < best.1 {
            best = (d, q);
        }
    }
    best
}

/// Explicit time stepping of the projected steepest-descent motion with
/// pivoting at the kink of each pair.
pub struct PathSimulator {
    pub s: Vec<f64>,
    x: Vec<f64>,
    v: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// For each pair: index of the moving coordinate and of the partner that
    /// may be released at the kink.
    pairs: Vec<(Option<usize>, Option<usize>)>,
    released: Vec<bool>,
}

impl PathSimulator {
    pub fn new(p: &PartitionedPoint, grad: &[f64], prob: &MpccProblem, delta: f64) -> Self {
        let n = prob.dim();
        let x = p.as_slice().to_vec();
        let v: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut lo = vec![-delta; n];
        let mut hi = vec![delta; n];
        for i in 0..prob.n0() {
            lo[i] = lo[i].max(prob.lower()[i] - x[i]);
            hi[i] = hi[i].min(prob.upper()[i] - x[i]);
        }
        let mut pairs = Vec::new();
        for i in 0..prob.n1() {
            let (j1, j2) = (p.idx1(i), p.idx2(i));
            lo[j1] = lo[j1].max(-x[j1]);
            lo[j2] = lo[j2].max(-x[j2]);
            let pair = if x[j1] > 0.0 {
                (Some(j1), Some(j2))
            } else if x[j2] > 0.0 {
                (Some(j2), Some(j1))
            } else if v[j1] > 0.0 && v[j1] >= v[j2] {
                (Some(j1), None)
            } else if v[j2] > 0.0 {
                (Some(j2), None)
            } else {
                (None, None)
            };
            pairs.push(pair);
        }
        let released = vec![false; pairs.len()];
        Self {
            x,
            v,
            lo,
            hi,
            s: vec![0.0; n],
            pairs,
            released,
        }
    }

    pub fn advance(&mut self, dt: f64, n0: usize) {
        for i in 0..n0 {
            self.s[i] = (self.s[i] + dt * self.v[i]).clamp(self.lo[i], self.hi[i]);
        }
        for k in 0..self.pairs.len() {
            let (mover, partner) = self.pairs[k];
            if self.released[k] {
                let j = partner.unwrap();
                self.s[j] = (self.s[j] + dt * self.v[j]).min(self.hi[j]);
                continue;
            }
            let Some(j) = mover else { continue };
            let target = self.s[j] + dt * self.v[j];
            let clamped = target.clamp(self.lo[j], self.hi[j]);
            if let (true, Some(q)) = (clamped == -self.x[j] && target < clamped, partner) {
                if self.v[q] > 0.0 {
                    self.released[k] = true;
                    let used = (clamped - self.s[j]) / self.v[j];
                    self.s[q] = ((dt - used) * self.v[q]).min(self.hi[q]);
                }
            }
            self.s[j] = clamped;
        }
    }
}

pub fn random_convex(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    a.transpose() * &a + DMatrix::identity(n, n) * 0.1
}

pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Largest deviation between `a` and `b`, relative to `max(1, ‖b‖∞)`.
pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}

/// Worst relative finite-difference error of the gradient and of each
/// Hessian column (when a Hessian is offered) at `x`.
pub fn derivative_error(obj: &dyn Objective, x: &[f64]) -> f64 {
    let mut err = rel_error(&obj.gradient(x), &fd_gradient(&|y| obj.value(y), x, 1e-6));
    if let Some(h) = obj.hessian(x) {
        err = err.max((&h - h.transpose()).amax() / h.amax().max(1.0));
        for j in 0..x.len() {
            let col: Vec<f64> = h.column(j).iter().copied().collect();
            err = err.max(rel_error(
                &col,
                &fd_gradient(&|y| obj.gradient(y)[j], x, 1e-6),
            ));
        }
    }
    err
}
