//! Bound-constrained quadratic programming by gradient projection with
//! subspace conjugate gradients.
//!
//! ```text
//! minimize    gᵀd + ½ dᵀHd
//! subject to  lo <= d <= hi
//! ```
//!
//! Each iteration computes the generalized Cauchy point along the projected
//! steepest-descent path and then runs CG on the variables that are free at
//! that point. CG stops at the box boundary or on nonpositive curvature, so
//! indefinite `H` is handled as long as the box is bounded.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, mat_vec, norm_inf};

/// Termination parameters for [`solve_box_qp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxQpOptions {
    /// Stop once the projected gradient is at most this in the ∞-norm.
    pub tol: f64,
    /// Iteration cap; `None` means `100 * n`.
    pub max_iter: Option<usize>,
}

impl Default for BoxQpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxQpSolution {
    pub d: Vec<f64>,
    /// Model value `gᵀd + ½ dᵀHd`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub projected_gradient: f64,
}

#[inline]
fn project(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Projected gradient: components that would push out of the box are dropped.
pub fn projected_gradient(r: &[f64], d: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    r.iter()
        .enumerate()
        .map(|(i, &ri)| {
            if lo[i] == hi[i] {
                0.0
            } else if d[i] <= lo[i] {
                ri.min(0.0)
            } else if d[i] >= hi[i] {
                ri.max(0.0)
            } else {
                ri
            }
        })
        .collect()
}

pub fn solve_box_qp(
    h: &DMatrix<f64>,
    g: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: BoxQpOptions,
) -> Result<BoxQpSolution> {
    let n = g.len();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "QP hessian",
            expected: n,
            found: h.nrows(),
        });
    }
    if lo.len() != n || hi.len() != n {
        return Err(Error::DimensionMismatch {
            what: "QP bounds",
            expected: n,
            found: lo.len().min(hi.len()),
        });
    }
    if !all_finite(g) || !h.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("QP data"));
    }
    if lo
        .iter()
        .zip(hi)
        .any(|(l, u)| l.is_nan() || u.is_nan() || l > u)
    {
        return Err(Error::InvalidProblem("QP box has lower > upper".into()));
    }

    let max_iter = opts.max_iter.unwrap_or(100 * n.max(1));
    let mut d: Vec<f64> = (0..n).map(|i| project(0.0, lo[i], hi[i])).collect();
    let mut r = gradient(h, g, &d);
    let mut q = dot(g, &d) + 0.5 * dot(&d, &mat_vec(h, &d));
    let mut iterations = 0;
    let mut pg = norm_inf(&projected_gradient(&r, &d, lo, hi));

    while iterations < max_iter && pg > opts.tol {
        iterations += 1;
        let dc = cauchy_point(h, &r, &d, lo, hi);
        let dn = subspace_cg(h, g, &dc, lo, hi, opts.tol);
        let r_new = gradient(h, g, &dn);
        let q_new = dot(g, &dn) + 0.5 * dot(&dn, &r_new) - 0.5 * dot(&dn, g);
        let moved = dn.iter().zip(&d).any(|(a, b)| a != b);
        if !moved || q_new > q {
            // No further progress is possible in floating point.
            break;
        }
        d = dn;
        r = r_new;
        q = q_new;
        pg = norm_inf(&projected_gradient(&r, &d, lo, hi));
    }

    Ok(BoxQpSolution {
        value: q,
        converged: pg <= opts.tol,
        projected_gradient: pg,
        iterations,
        d,
    })
}

fn gradient(h: &DMatrix<f64>, g: &[f64], d: &[f64]) -> Vec<f64> {
    let mut r = mat_vec(h, d);
    r.iter_mut().zip(g).for_each(|(ri, gi)| *ri += gi);
    r
}

/// First local minimizer of the model along `P(d - t r)`.
fn cauchy_point(h: &DMatrix<f64>, r: &[f64], d: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let n = d.len();
    // time at which each coordinate reaches its bound
    let mut stop = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        if r[i] > 0.0 && d[i] > lo[i] {
            stop[i] = (d[i] - lo[i]) / r[i];
            w[i] = -r[i];
        } else if r[i] < 0.0 && d[i] < hi[i] {
            stop[i] = (d[i] - hi[i]) / r[i];
            w[i] = -r[i];
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| w[i] != 0.0).collect();
    order.sort_by(|&a, &b| stop[a].partial_cmp(&stop[b]).unwrap());

    let mut x = d.to_vec();
    let mut hz = vec![0.0; n];
    let mut hw = mat_vec(h, &w);
    let mut z = vec![0.0; n];
    let mut t = 0.0;
    let mut k = 0;
    while k < order.len() {
        let t_next = stop[order[k]];
        let len = t_next - t;
        let slope = dot(r, &w) + dot(&hz, &w);
        let curv = dot(&w, &hw);
        if slope >= 0.0 {
            break;
        }
        if curv > 0.0 && -slope / curv < len {
            let theta = -slope / curv;
            for i in 0..n {
                x[i] = project(x[i] + theta * w[i], lo[i], hi[i]);
            }
            return x;
        }
        // advance to the breakpoint
        for i in 0..n {
            if w[i] != 0.0 {
                z[i] += len * w[i];
                x[i] = project(d[i] + z[i], lo[i], hi[i]);
                hz[i] += len * hw[i];
            } else {
                hz[i] += len * hw[i];
            }
        }
        t = t_next;
        // release every coordinate that hits its bound at this time
        while k < order.len() && stop[order[k]] <= t {
            let j = order[k];
            x[j] = if w[j] < 0.0 { lo[j] } else { hi[j] };
            let wj = w[j];
            for i in 0..n {
                hw[i] -= wj * h[(i, j)];
            }
            w[j] = 0.0;
            k += 1;
        }
    }
    x
}

/// CG on the variables strictly inside the box at `start`, truncated at the
/// boundary or at nonpositive curvature.
fn subspace_cg(
    h: &DMatrix<f64>,
    g: &[f64],
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    tol: f64,
) -> Vec<f64> {
    let free: Vec<usize> = (0..start.len())
        .filter(|&i| start[i] > lo[i] && start[i] < hi[i])
        .collect();
    let mut x = start.to_vec();
    if free.is_empty() {
        return x;
    }
    let full = gradient(h, g, start);
    let mut res: Vec<f64> = free.iter().map(|&i| -full[i]).collect();
    let mut p = res.clone();
    let mut rr = dot(&res, &res);
    let max_cg = 2 * free.len() + 10;
    let cg_tol = 0.1 * tol;

    for _ in 0..max_cg {
        if norm_inf(&res) <= cg_tol {
            break;
        }
        let hp: Vec<f64> = free
            .iter()
            .map(|&i| free.iter().zip(&p).map(|(&j, pj)| h[(i, j)] * pj).sum())
            .collect();
        let curv = dot(&p, &hp);
        let alpha_max = free
            .iter()
            .zip(&p)
            .map(|(&i, &pi)| {
                if pi > 0.0 {
                    (hi[i] - x[i]) / pi
                } else if pi < 0.0 {
                    (lo[i] - x[i]) / pi
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min);
        if curv <= 0.0 {
            if alpha_max.is_finite() {
                step_to(&mut x, &free, &p, alpha_max, lo, hi);
            }
            break;
        }
        let alpha = rr / curv;
        if alpha >= alpha_max {
            step_to(&mut x, &free, &p, alpha_max, lo, hi);
            break;
        }
        for (k, &i) in free.iter().enumerate() {
            x[i] += alpha * p[k];
            res[k] -= alpha * hp[k];
        }
        let rr_new = dot(&res, &res);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pk, rk) in p.iter_mut().zip(&res) {
            *pk = rk + beta * *pk;
        }
    }
    x
}

fn step_to(x: &mut [f64], free: &[usize], p: &[f64], alpha: f64, lo: &[f64], hi: &[f64]) {
    for (k, &i) in free.iter().enumerate() {
        x[i] = project(x[i] + alpha * p[k], lo[i], hi[i]);
    }
    // snap the blocking coordinates exactly onto the boundary
    for (k, &i) in free.iter().enumerate() {
        if p[k] > 0.0 && (hi[i] - x[i]).abs() <= 1e-15 * (1.0 + hi[i].abs()) {
            x[i] = hi[i];
        } else if p[k] < 0.0 && (x[i] - lo[i]).abs() <= 1e-15 * (1.0 + lo[i].abs()) {
            x[i] = lo[i];
        }
    }
}
