//! Augmented-Lagrangian method for general MPCCs
//!
//! ```text
//! minimize  f(x)  subject to  c(x) = 0,  lx <= x <= ux,  0 <= g(x) ⊥ h(x) >= 0
//! ```
//!
//! Slacks `s_g = g(x)` and `s_h = h(x)` move the complementarity onto simple
//! variables. The remaining equations are priced into
//!
//! ```text
//! L = f - yᵀc - z_gᵀ(s_g - g) - z_hᵀ(s_h - h)
//!       + ρ/2 (‖c‖² + ‖s_g - g‖² + ‖s_h - h‖²)
//! ```
//!
//! and every subproblem `min L s.t. lx <= x <= ux, 0 <= s_g ⊥ s_h >= 0` is a
//! bound-constrained MPCC solved by [`slpcc_solve`].

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::{SolverConfig, Variant};
use crate::driver::{slpcc_solve, SolveStatus};
use crate::error::{Error, Result};
use crate::problem::{project_feasible, MpccProblem, Objective, PartitionedPoint};

/// Infinite bounds are replaced by this magnitude inside subproblems.
pub const BOUND_FOLD: f64 = 1e10;

/// A general MPCC given by oracles.
///
/// Jacobians are dense `rows x n` matrices. Second derivatives are optional;
/// without them the subproblems have no Hessian and only the first-order
/// variant can be used.
pub trait GeneralMpcc: Send + Sync {
    /// Number of variables `x`.
    fn n(&self) -> usize;
    /// Number of equality constraints.
    fn m(&self) -> usize;
    /// Number of complementarity pairs.
    fn p(&self) -> usize;

    fn lower(&self) -> Vec<f64> {
        vec![f64::NEG_INFINITY; self.n()]
    }

    fn upper(&self) -> Vec<f64> {
        vec![f64::INFINITY; self.n()]
    }

    fn f(&self, x: &[f64]) -> f64;
    fn grad_f(&self, x: &[f64]) -> Vec<f64>;

    fn c(&self, _x: &[f64]) -> Vec<f64> {
        Vec::new()
    }

    fn jac_c(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(0, self.n())
    }

    fn g(&self, x: &[f64]) -> Vec<f64>;
    fn jac_g(&self, x: &[f64]) -> DMatrix<f64>;
    fn h(&self, x: &[f64]) -> Vec<f64>;
    fn jac_h(&self, x: &[f64]) -> DMatrix<f64>;

    /// `∇²f(x) + Σ wc_i ∇²c_i + Σ wg_i ∇²g_i + Σ wh_i ∇²h_i`, if available.
    fn weighted_hessian(
        &self,
        _x: &[f64],
        _wc: &[f64],
        _wg: &[f64],
        _wh: &[f64],
    ) -> Option<DMatrix<f64>> {
        None
    }

    fn has_hessian(&self) -> bool {
        false
    }
}

/// Multipliers, penalty and tolerances of the outer loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuglagState {
    pub y: Vec<f64>,
    pub z_g: Vec<f64>,
    pub z_h: Vec<f64>,
    pub rho: f64,
    /// Current `(x, s_g, s_h)`.
    pub point: Vec<f64>,
    /// Subproblem stationarity tolerance.
    pub omega: f64,
    /// Constraint violation target.
    pub eta: f64,
}

impl AuglagState {
    /// Zero multipliers at `point`.
    pub fn new(gp: &dyn GeneralMpcc, point: Vec<f64>, cfg: &AuglagConfig) -> Self {
        Self {
            y: vec![0.0; gp.m()],
            z_g: vec![0.0; gp.p()],
            z_h: vec![0.0; gp.p()],
            rho: cfg.rho0,
            point,
            omega: cfg.omega0,
            eta: cfg.eta0,
        }
    }
}

/// `L_ρ` as an [`Objective`] over `(x, s_g, s_h)`.
pub struct LagrangianObjective {
    gp: Arc<dyn GeneralMpcc>,
    y: Vec<f64>,
    z_g: Vec<f64>,
    z_h: Vec<f64>,
    rho: f64,
}

struct Residuals {
    c: Vec<f64>,
    rg: Vec<f64>,
    rh: Vec<f64>,
}

impl LagrangianObjective {
    pub fn new(gp: Arc<dyn GeneralMpcc>, st: &AuglagState) -> Self {
        Self {
            gp,
            y: st.y.clone(),
            z_g: st.z_g.clone(),
            z_h: st.z_h.clone(),
            rho: st.rho,
        }
    }

    fn split<'a>(&self, v: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let (n, p) = (self.gp.n(), self.gp.p());
        (&v[..n], &v[n..n + p], &v[n + p..])
    }

    fn residuals(&self, v: &[f64]) -> Residuals {
        let (x, sg, sh) = self.split(v);
        let g = self.gp.g(x);
        let h = self.gp.h(x);
        Residuals {
            c: self.gp.c(x),
            rg: sg.iter().zip(&g).map(|(s, g)| s - g).collect(),
            rh: sh.iter().zip(&h).map(|(s, h)| s - h).collect(),
        }
    }

    /// Weights `(y - ρc, z_g - ρ r_g, z_h - ρ r_h)`.
    fn weights(&self, r: &Residuals) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let shift = |m: &[f64], r: &[f64]| -> Vec<f64> {
            m.iter().zip(r).map(|(m, r)| m - self.rho * r).collect()
        };
        (
            shift(&self.y, &r.c),
            shift(&self.z_g, &r.rg),
            shift(&self.z_h, &r.rh),
        )
    }
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

/// `Jᵀ w` for a dense `rows x n` Jacobian.
fn jt_mul(j: &DMatrix<f64>, w: &[f64]) -> DVector<f64> {
    j.transpose() * DVector::from_column_slice(w)
}

impl Objective for LagrangianObjective {
    fn dim(&self) -> usize {
        self.gp.n() + 2 * self.gp.p()
    }

    fn value(&self, v: &[f64]) -> f64 {
        let (x, ..) = self.split(v);
        let r = self.residuals(v);
        self.gp.f(x) - dotp(&self.y, &r.c) - dotp(&self.z_g, &r.rg) - dotp(&self.z_h, &r.rh)
            + 0.5 * self.rho * (sq(&r.c) + sq(&r.rg) + sq(&r.rh))
    }

    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let (x, ..) = self.split(v);
        let r = self.residuals(v);
        let (wc, wg, wh) = self.weights(&r);
        let mut gx = DVector::from_vec(self.gp.grad_f(x));
        if self.gp.m() > 0 {
            gx -= jt_mul(&self.gp.jac_c(x), &wc);
        }
        gx += jt_mul(&self.gp.jac_g(x), &wg);
        gx += jt_mul(&self.gp.jac_h(x), &wh);
        let mut out = gx.as_slice().to_vec();
        out.extend(wg.iter().map(|w| -w));
        out.extend(wh.iter().map(|w| -w));
        out
    }

    fn hessian(&self, v: &[f64]) -> Option<DMatrix<f64>> {
        let (n, p) = (self.gp.n(), self.gp.p());
        let (x, ..) = self.split(v);
        let r = self.residuals(v);
        let (wc, wg, wh) = self.weights(&r);
        let neg_wc: Vec<f64> = wc.iter().map(|w| -w).collect();
        let hxx = self.gp.weighted_hessian(x, &neg_wc, &wg, &wh)?;
        let jc = self.gp.jac_c(x);
        let jg = self.gp.jac_g(x);
        let jh = self.gp.jac_h(x);
        let rho = self.rho;

        let mut hess = DMatrix::zeros(n + 2 * p, n + 2 * p);
        let mut xx = hxx + rho * (jg.transpose() * &jg + jh.transpose() * &jh);
        if self.gp.m() > 0 {
            xx += rho * jc.transpose() * &jc;
        }
        hess.view_mut((0, 0), (n, n)).copy_from(&xx);
        let xg = -rho * jg.transpose();
        let xh = -rho * jh.transpose();
        hess.view_mut((0, n), (n, p)).copy_from(&xg);
        hess.view_mut((n, 0), (p, n)).copy_from(&xg.transpose());
        hess.view_mut((0, n + p), (n, p)).copy_from(&xh);
        hess.view_mut((n + p, 0), (p, n)).copy_from(&xh.transpose());
        for i in n..n + 2 * p {
            hess[(i, i)] = rho;
        }
        Some(hess)
    }

    fn has_hessian(&self) -> bool {
        self.gp.has_hessian()
    }
}

/// The bound-constrained MPCC minimizing `L_ρ` for the given state.
pub fn build_subproblem(gp: Arc<dyn GeneralMpcc>, st: &AuglagState) -> Result<MpccProblem> {
    let (n, m, p) = (gp.n(), gp.m(), gp.p());
    let check = |what, expected, found| {
        if expected != found {
            Err(Error::DimensionMismatch {
                what,
                expected,
                found,
            })
        } else {
            Ok(())
        }
    };
    check("multiplier y", m, st.y.len())?;
    check("multiplier z_g", p, st.z_g.len())?;
    check("multiplier z_h", p, st.z_h.len())?;
    check("auglag point", n + 2 * p, st.point.len())?;
    if !(st.rho > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "penalty {} must be positive",
            st.rho
        )));
    }
    let fold = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .map(|b| b.clamp(-BOUND_FOLD, BOUND_FOLD))
            .collect()
    };
    let lower = fold(gp.lower());
    let upper = fold(gp.upper());
    let obj = LagrangianObjective::new(gp, st);
    MpccProblem::new(n, p, lower, upper, Arc::new(obj))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuglagConfig {
    pub rho0: f64,
    pub rho_factor: f64,
    pub max_rho: f64,
    pub omega0: f64,
    pub eta0: f64,
    pub tol_violation: f64,
    pub tol_stationarity: f64,
    pub max_outer: usize,
    /// Settings for the subproblem solves; the stationarity tolerance is
    /// overwritten by the current `ω`.
    pub solver: SolverConfig,
}

impl Default for AuglagConfig {
    fn default() -> Self {
        Self {
            rho0: 1.0,
            rho_factor: 10.0,
            max_rho: 1e12,
            omega0: 1e-2,
            eta0: 1e-1,
            tol_violation: 1e-8,
            tol_stationarity: 1e-8,
            max_outer: 50,
            solver: SolverConfig::default().with_variant(Variant::Plain),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuglagStatus {
    Converged,
    PenaltyOverflow,
    IterationLimit,
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuglagRecord {
    pub iter: usize,
    /// `‖(c, s_g - g, s_h - h)‖₂` after the subproblem solve.
    pub violation: f64,
    /// Criticality measure of the subproblem at its solution.
    pub stationarity: f64,
    /// Penalty used for this subproblem.
    pub rho: f64,
    pub omega: f64,
    pub eta: f64,
    pub subproblem_status: SolveStatus,
    pub subproblem_iters: usize,
    /// Whether the multipliers were updated (otherwise the penalty grew).
    pub multipliers_updated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuglagReport {
    pub status: AuglagStatus,
    pub iterations: Vec<AuglagRecord>,
    pub state: AuglagState,
    pub x: Vec<f64>,
    pub s_g: Vec<f64>,
    pub s_h: Vec<f64>,
    pub f: f64,
    /// `true` if every iterate of every subproblem had `0 <= s_g ⊥ s_h >= 0`
    /// holding exactly.
    pub complementarity_exact: bool,
}

/// `‖(c, s_g - g, s_h - h)‖₂` at a point `(x, s_g, s_h)`.
pub fn constraint_violation(gp: &dyn GeneralMpcc, v: &[f64]) -> f64 {
    let (n, p) = (gp.n(), gp.p());
    let x = &v[..n];
    let g = gp.g(x);
    let h = gp.h(x);
    let mut s = sq(&gp.c(x));
    s += v[n..n + p]
        .iter()
        .zip(&g)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>();
    s += v[n + p..]
        .iter()
        .zip(&h)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>();
    s.sqrt()
}

fn exactly_complementary(v: &[f64], n: usize, p: usize) -> bool {
    (0..p).all(|i| {
        let (a, b) = (v[n + i], v[n + p + i]);
        a >= 0.0 && b >= 0.0 && a * b == 0.0
    })
}

/// Starting point: `x` clipped into its bounds (0 where both are infinite)
/// and zero slacks.
pub fn default_start(gp: &dyn GeneralMpcc) -> Vec<f64> {
    let mut v = vec![0.0; gp.n() + 2 * gp.p()];
    for (i, (l, u)) in gp.lower().into_iter().zip(gp.upper()).enumerate() {
        v[i] = 0.0_f64.clamp(l, u);
    }
    v
}

pub fn auglag_solve(
    gp: Arc<dyn GeneralMpcc>,
    start: Option<Vec<f64>>,
    cfg: &AuglagConfig,
) -> Result<AuglagReport> {
    cfg.solver.validate()?;
    if !(cfg.rho0 > 0.0 && cfg.rho_factor > 1.0) {
        return Err(Error::InvalidConfig(
            "rho0 > 0 and rho_factor > 1 required".into(),
        ));
    }
    let (n, p) = (gp.n(), gp.p());
    let start = start.unwrap_or_else(|| default_start(gp.as_ref()));
    let mut st = AuglagState::new(gp.as_ref(), start, cfg);
    let mut records = Vec::new();
    let mut exact = true;

    let status = loop {
        if records.len() >= cfg.max_outer {
            break AuglagStatus::IterationLimit;
        }
        let sub = build_subproblem(gp.clone(), &st)?;
        let x0 = project_feasible(&PartitionedPoint::from_flat(n, p, st.point.clone())?, &sub)?;
        let mut scfg = cfg.solver.clone();
        scfg.stationarity_tol = st.omega;
        let rep = slpcc_solve(&sub, &x0, &scfg)?;
        exact &= rep
            .iterates
            .iter()
            .all(|it| exactly_complementary(&it.point, n, p));

        st.point = rep.final_point.as_slice().to_vec();
        let violation = constraint_violation(gp.as_ref(), &st.point);
        let mut rec = AuglagRecord {
            iter: records.len() + 1,
            violation,
            stationarity: rep.final_chi,
            rho: st.rho,
            omega: st.omega,
            eta: st.eta,
            subproblem_status: rep.status,
            subproblem_iters: rep.outer_iters,
            multipliers_updated: false,
        };
        if violation <= cfg.tol_violation && rep.final_chi <= cfg.tol_stationarity {
            records.push(rec);
            break AuglagStatus::Converged;
        }
        if violation <= st.eta {
            let x = &st.point[..n];
            let c = gp.c(x);
            let g = gp.g(x);
            let h = gp.h(x);
            let rho = st.rho;
            for (y, c) in st.y.iter_mut().zip(&c) {
                *y -= rho * c;
            }
            for (i, z) in st.z_g.iter_mut().enumerate() {
                *z -= rho * (st.point[n + i] - g[i]);
            }
            for (i, z) in st.z_h.iter_mut().enumerate() {
                *z -= rho * (st.point[n + p + i] - h[i]);
            }
            st.omega /= rho;
            st.eta /= rho.powf(0.9);
            rec.multipliers_updated = true;
        } else {
            st.rho *= cfg.rho_factor;
            st.omega = cfg.omega0 / st.rho;
            st.eta = cfg.eta0 / st.rho.powf(0.1);
        }
        records.push(rec);
        if st.rho > cfg.max_rho {
            break AuglagStatus::PenaltyOverflow;
        }
    };

    let x = st.point[..n].to_vec();
    Ok(AuglagReport {
        status,
        iterations: records,
        f: gp.f(&x),
        s_g: st.point[n..n + p].to_vec(),
        s_h: st.point[n + p..].to_vec(),
        x,
        state: st,
        complementarity_exact: exact,
    })
}

/// Two-player Nash equilibrium model with four decision variables.
///
/// ```text
/// minimize  ½((x1 - x3)² + (x2 - x4)²)
/// g(x) = (15 - x2 - x3, 15 - x1 + x4)
/// h(x) = (34 - 2 x3 - 8/3 x4, 24.25 - 1.25 x3 - 2 x4)
/// 0 <= x1, x2 <= 10
/// ```
#[derive(Debug, Clone, Copy, Default)]
pub struct Nash1;

/// Starting point used for [`Nash1`] by the command-line front end and the
/// tests: `x = (5, 5, 5, 5)` with zero slacks.
///
/// From the origin the method converges to a different strongly stationary
/// point, `x = (10, 0, 15, -5)` with objective 25; the basin of the reference
/// solution below is governed mainly by the sign of `x4` at the start.
pub const NASH1_START: [f64; 8] = [5.0, 5.0, 5.0, 5.0, 0.0, 0.0, 0.0, 0.0];

/// Reference strongly stationary point `(x, s_g, s_h)`.
pub const NASH1_SOLUTION: [f64; 8] = [5.0, 9.0, 5.0, 9.0, 1.0, 19.0, 0.0, 0.0];

impl GeneralMpcc for Nash1 {
    fn n(&self) -> usize {
        4
    }

    fn m(&self) -> usize {
        0
    }

    fn p(&self) -> usize {
        2
    }

    fn lower(&self) -> Vec<f64> {
        vec![0.0, 0.0, f64::NEG_INFINITY, f64::NEG_INFINITY]
    }

    fn upper(&self) -> Vec<f64> {
        vec![10.0, 10.0, f64::INFINITY, f64::INFINITY]
    }

    fn f(&self, x: &[f64]) -> f64 {
        0.5 * ((x[0] - x[2]).powi(2) + (x[1] - x[3]).powi(2))
    }

    fn grad_f(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] - x[2], x[1] - x[3], x[2] - x[0], x[3] - x[1]]
    }

    fn g(&self, x: &[f64]) -> Vec<f64> {
        vec![15.0 - x[1] - x[2], 15.0 - x[0] + x[3]]
    }

    fn jac_g(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 4, &[0.0, -1.0, -1.0, 0.0, -1.0, 0.0, 0.0, 1.0])
    }

    fn h(&self, x: &[f64]) -> Vec<f64> {
        vec![
            34.0 - 2.0 * x[2] - 8.0 / 3.0 * x[3],
            24.25 - 1.25 * x[2] - 2.0 * x[3],
        ]
    }

    fn jac_h(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 4, &[0.0, 0.0, -2.0, -8.0 / 3.0, 0.0, 0.0, -1.25, -2.0])
    }

    fn weighted_hessian(
        &self,
        _x: &[f64],
        _wc: &[f64],
        _wg: &[f64],
        _wh: &[f64],
    ) -> Option<DMatrix<f64>> {
        // constraints are linear
        Some(DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, -1.0, 0.0, //
                0.0, 1.0, 0.0, -1.0, //
                -1.0, 0.0, 1.0, 0.0, //
                0.0, -1.0, 0.0, 1.0,
            ],
        ))
    }

    fn has_hessian(&self) -> bool {
        true
    }
}
