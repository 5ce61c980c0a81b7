use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which optional second-order steps the driver takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// LPCC steps only.
    FirstOrder,
    /// LPCC steps followed by a BQP step each outer iteration.
    Plain,
    /// Cauchy search after each LPCC solve, plus BQP steps.
    Cauchy,
}

impl Variant {
    pub fn uses_bqp(self) -> bool {
        matches!(self, Variant::Plain | Variant::Cauchy)
    }

    pub fn uses_cauchy(self) -> bool {
        matches!(self, Variant::Cauchy)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::FirstOrder => "first_order",
            Variant::Plain => "plain",
            Variant::Cauchy => "cauchy",
        }
    }
}

/// How the inner radius is reset at the start of each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetPolicy {
    /// `clamp(2 * previous accepted radius, delta_min, delta_bar)`.
    DoublePrevious,
    AlwaysDeltaBar,
    AlwaysDeltaMin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sufficient-decrease ratio in `(0, 1)`.
    pub sigma: f64,
    /// Lower limit for the reset radius.
    pub delta_min: f64,
    /// Initial upper limit for the reset radius.
    pub delta_bar0: f64,
    /// Radius for the very first inner loop; defaults to `delta_min`.
    pub initial_delta: Option<f64>,
    /// Initial BQP trust radius; defaults to `delta_bar0`.
    pub delta_qp0: Option<f64>,
    pub max_inner_halvings: usize,
    pub max_outer: usize,
    pub stationarity_tol: f64,
    pub unbounded_cutoff: f64,
    pub bound_tol: f64,
    pub variant: Variant,
    pub reset_policy: ResetPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 0.25,
            delta_min: 0.5,
            delta_bar0: 2.0,
            initial_delta: None,
            delta_qp0: None,
            max_inner_halvings: 50,
            max_outer: 10_000,
            stationarity_tol: 1e-7,
            unbounded_cutoff: 1e12,
            bound_tol: 1e-12,
            variant: Variant::Plain,
            reset_policy: ResetPolicy::DoublePrevious,
        }
    }
}

impl SolverConfig {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad(format!("sigma = {} must lie in (0, 1)", self.sigma));
        }
        if !(self.delta_min > 0.0) {
            return bad(format!("delta_min = {} must be positive", self.delta_min));
        }
        // The radius bounds may coincide (delta_min == delta_bar0 is used for nash1a).
        if !(self.delta_bar0 >= self.delta_min) || !self.delta_bar0.is_finite() {
            return bad(format!(
                "delta_bar0 = {} must be finite and at least delta_min = {}",
                self.delta_bar0, self.delta_min
            ));
        }
        if let Some(d) = self.initial_delta {
            if !(d >= self.delta_min && d <= self.delta_bar0) {
                return bad(format!(
                    "initial_delta = {d} outside [delta_min, delta_bar0]"
                ));
            }
        }
        if let Some(d) = self.delta_qp0 {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta_qp0 = {d} must be positive"));
            }
        }
        if !(self.stationarity_tol >= 0.0) {
            return bad("stationarity_tol must be nonnegative".into());
        }
        if !(self.unbounded_cutoff > 0.0) {
            return bad("unbounded_cutoff must be positive".into());
        }
        if !(self.bound_tol >= 0.0) {
            return bad("bound_tol must be nonnegative".into());
        }
        Ok(())
    }
}
