//! Classical nonlinear test functions turned into MPCCs by adding bounds and
//! complementarity pairs.
//!
//! Functions are written over `y ∈ ℝⁿ` with `n = n0 + 2 n1` and `n0 = n1`.
//! A complementarity class picks which entries of `y` form the pairs; the
//! remaining entries become `x0` with bounds `[0, 1e8]`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{MpccProblem, Objective};

pub const CATALOG_UPPER: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Fletcher,
    Himmelblau,
    Mccormick,
    Powell,
    Rosenbrock,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Fletcher,
        Family::Himmelblau,
        Family::Mccormick,
        Family::Powell,
        Family::Rosenbrock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Fletcher => "fletcher",
            Family::Himmelblau => "himmelblau",
            Family::Mccormick => "mccormick",
            Family::Powell => "powell",
            Family::Rosenbrock => "rosenbrock",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidProblem(format!("unknown catalog family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CatalogProblem {
    pub family: Family,
    /// 0 pairs `y[i]` with `y[n1 + i]`; 1 pairs `y[2i]` with `y[2i + 1]`.
    pub compl_class: u8,
    pub n1: usize,
}

impl CatalogProblem {
    pub fn new(family: Family, compl_class: u8, n1: usize) -> Result<Self> {
        let p = Self {
            family,
            compl_class,
            n1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n0(&self) -> usize {
        self.n1
    }

    pub fn dim(&self) -> usize {
        3 * self.n1
    }

    /// Instance name such as `20-rosenbrock0`.
    pub fn name(&self) -> String {
        format!("{}-{}{}", self.n1, self.family, self.compl_class)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.n1 == 0 {
            return Err(Error::InvalidProblem("n1 must be positive".into()));
        }
        if self.compl_class > 1 {
            return Err(Error::InvalidProblem(format!(
                "complementarity class {} is not 0 or 1",
                self.compl_class
            )));
        }
        match self.family {
            Family::Powell if !n.is_multiple_of(4) => Err(Error::InvalidProblem(format!(
                "powell needs n divisible by 4, got n = {n}"
            ))),
            Family::Himmelblau if !n.is_multiple_of(2) => Err(Error::InvalidProblem(format!(
                "himmelblau needs n even, got n = {n}"
            ))),
            _ => Ok(()),
        }
    }

    /// `perm[j]` is the function index of flat variable `j`.
    pub fn permutation(&self) -> Vec<usize> {
        let (n0, n1) = (self.n0(), self.n1);
        let mut perm = vec![0; self.dim()];
        for j in 0..n0 {
            perm[j] = 2 * n1 + j;
        }
        for i in 0..n1 {
            let (a, b) = if self.compl_class == 0 {
                (i, n1 + i)
            } else {
                (2 * i, 2 * i + 1)
            };
            perm[n0 + i] = a;
            perm[n0 + n1 + i] = b;
        }
        perm
    }

    pub fn to_problem(&self) -> Result<MpccProblem> {
        self.validate()?;
        MpccProblem::new(
            self.n0(),
            self.n1,
            vec![0.0; self.n0()],
            vec![CATALOG_UPPER; self.n0()],
            Arc::new(CatalogObjective::new(*self)),
        )
    }
}

/// Value, gradient and Hessian in the function's own variable order.
pub fn family_eval(family: Family, y: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
    let n = y.len();
    let mut f = 0.0;
    let mut g = vec![0.0; n];
    let mut h = DMatrix::zeros(n, n);
    match family {
        Family::Fletcher => {
            for i in 0..n.saturating_sub(1) {
                let (a, b) = (y[i], y[i + 1]);
                let r = b - a + 1.0 - a * a;
                let ra = -1.0 - 2.0 * a;
                f += 100.0 * r * r;
                g[i] += 200.0 * r * ra;
                g[i + 1] += 200.0 * r;
                h[(i, i)] += 200.0 * (ra * ra - 2.0 * r);
                h[(i, i + 1)] += 200.0 * ra;
                h[(i + 1, i)] += 200.0 * ra;
                h[(i + 1, i + 1)] += 200.0;
            }
        }
        Family::Himmelblau => {
            for k in 0..n / 2 {
                let (i, j) = (2 * k, 2 * k + 1);
                let (a, b) = (y[i], y[j]);
                let r1 = a + b - 11.0;
                let r2 = a + b * b - 7.0;
                f += r1 * r1 + r2 * r2;
                g[i] += 2.0 * r1 + 2.0 * r2;
                g[j] += 2.0 * r1 + 4.0 * b * r2;
                h[(i, i)] += 4.0;
                h[(i, j)] += 2.0 + 4.0 * b;
                h[(j, i)] += 2.0 + 4.0 * b;
                h[(j, j)] += 2.0 + 4.0 * r2 + 8.0 * b * b;
            }
        }
        Family::Mccormick => {
            for i in 0..n.saturating_sub(1) {
                let (a, b) = (y[i], y[i + 1]);
                let (s, c) = (a + b).sin_cos();
                f += -1.5 * a + 2.5 * b + 1.0 + (a - b) * (a - b) + s;
                g[i] += -1.5 + 2.0 * (a - b) + c;
                g[i + 1] += 2.5 - 2.0 * (a - b) + c;
                h[(i, i)] += 2.0 - s;
                h[(i + 1, i + 1)] += 2.0 - s;
                h[(i, i + 1)] += -2.0 - s;
                h[(i + 1, i)] += -2.0 - s;
            }
        }
        Family::Powell => {
            for k in 0..n / 4 {
                let [ia, ib, ic, id] = [4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3];
                let (a, b, c, d) = (y[ia], y[ib], y[ic], y[id]);
                let p = a + 10.0 * b;
                let q = c - d;
                let r = b - 2.0 * c;
                let s = a - d;
                f += p * p + 5.0 * q * q + r.powi(4) + 10.0 * s.powi(4);
                g[ia] += 2.0 * p + 40.0 * s.powi(3);
                g[ib] += 20.0 * p + 4.0 * r.powi(3);
                g[ic] += 10.0 * q - 8.0 * r.powi(3);
                g[id] += -10.0 * q - 40.0 * s.powi(3);
                let (r2, s2) = (12.0 * r * r, 120.0 * s * s);
                let mut add = |i: usize, j: usize, v: f64| {
                    h[(i, j)] += v;
                    if i != j {
                        h[(j, i)] += v;
                    }
                };
                add(ia, ia, 2.0 + s2);
                add(ia, ib, 20.0);
                add(ia, id, -s2);
                add(ib, ib, 200.0 + r2);
                add(ib, ic, -2.0 * r2);
                add(ic, ic, 10.0 + 4.0 * r2);
                add(ic, id, -10.0);
                add(id, id, 10.0 + s2);
            }
        }
        Family::Rosenbrock => {
            for i in 0..n.saturating_sub(1) {
                let (a, b) = (y[i], y[i + 1]);
                let r = b - a * a;
                f += 100.0 * r * r + (1.0 - a) * (1.0 - a);
                g[i] += -400.0 * a * r - 2.0 * (1.0 - a);
                g[i + 1] += 200.0 * r;
                h[(i, i)] += 1200.0 * a * a - 400.0 * b + 2.0;
                h[(i, i + 1)] += -400.0 * a;
                h[(i + 1, i)] += -400.0 * a;
                h[(i + 1, i + 1)] += 200.0;
            }
        }
    }
    (f, g, h)
}

/// Value, gradient and Hessian at a flat point `x = (x0, x1, x2)`.
pub fn catalog_eval(p: &CatalogProblem, x: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
    p.validate()?;
    let n = p.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            what: "catalog point",
            expected: n,
            found: x.len(),
        });
    }
    let perm = p.permutation();
    let mut y = vec![0.0; n];
    for (j, &k) in perm.iter().enumerate() {
        y[k] = x[j];
    }
    let (f, gy, hy) = family_eval(p.family, &y);
    let g = perm.iter().map(|&k| gy[k]).collect();
    let h = DMatrix::from_fn(n, n, |a, b| hy[(perm[a], perm[b])]);
    Ok((f, g, h))
}

#[derive(Debug, Clone)]
pub struct CatalogObjective {
    problem: CatalogProblem,
    perm: Vec<usize>,
}

impl CatalogObjective {
    pub fn new(problem: CatalogProblem) -> Self {
        Self {
            perm: problem.permutation(),
            problem,
        }
    }

    fn unpermute(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (j, &k) in self.perm.iter().enumerate() {
            y[k] = x[j];
        }
        y
    }
}

impl Objective for CatalogObjective {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        family_eval(self.problem.family, &self.unpermute(x)).0
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (_, gy, _) = family_eval(self.problem.family, &self.unpermute(x));
        self.perm.iter().map(|&k| gy[k]).collect()
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let (_, _, hy) = family_eval(self.problem.family, &self.unpermute(x));
        let n = self.perm.len();
        Some(DMatrix::from_fn(n, n, |a, b| {
            hy[(self.perm[a], self.perm[b])]
        }))
    }

    fn has_hessian(&self) -> bool {
        true
    }
}
