//! JSON problem files.
//!
//! ```json
//! {
//!   "n0": 0, "n1": 1, "l0": [], "u0": [],
//!   "objective": {"type": "quadratic", "H": [[1, 1, 1.0]], "g": [0.0, -1.0], "cubic": [1.0, 0.0]},
//!   "x_init": [2.0, 0.0]
//! }
//! ```
//!
//! `H` lists upper-triangle entries `[i, j, v]` with `i <= j`; the lower
//! triangle is mirrored on load. Without `H` the quadratic term is zero and
//! no Hessian oracle is offered. Catalog and `nash1a` objectives may omit
//! `l0`/`u0`, in which case their standard bounds are used; so may any
//! problem with `n0 = 0`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bench::catalog::{CatalogProblem, Family, CATALOG_UPPER};
use crate::bench::nash::{nash1a_objective, Nash1aParams};
use crate::bench::quadratic::{QuadraticInstance, QuadraticObjective};
use crate::error::{Error, Result};
use crate::problem::{MpccProblem, PartitionedPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n0: usize,
    pub n1: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_init: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Quadratic {
        #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
        h: Option<Vec<(usize, usize, f64)>>,
        g: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cubic: Option<Vec<f64>>,
    },
    Catalog {
        family: Family,
        compl_class: u8,
    },
    Nash1a {
        rho: f64,
        lambda: [f64; 4],
    },
}

fn check_len(field: &str, expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Format(format!(
            "field `{field}`: expected {expected} entries, found {}",
            v.len()
        )));
    }
    Ok(())
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
    }

    pub fn dim(&self) -> usize {
        self.n0 + 2 * self.n1
    }

    pub fn from_quadratic(q: &QuadraticInstance) -> Self {
        Self {
            n0: q.n0,
            n1: q.n1,
            l0: Some(q.l0.clone()),
            u0: Some(q.u0.clone()),
            objective: ObjectiveSpec::Quadratic {
                h: Some(q.h.clone()),
                g: q.g.clone(),
                cubic: None,
            },
            x_init: None,
        }
    }

    pub fn from_catalog(c: &CatalogProblem) -> Self {
        Self {
            n0: c.n0(),
            n1: c.n1,
            l0: Some(vec![0.0; c.n0()]),
            u0: Some(vec![CATALOG_UPPER; c.n0()]),
            objective: ObjectiveSpec::Catalog {
                family: c.family,
                compl_class: c.compl_class,
            },
            x_init: None,
        }
    }

    /// Builds the problem and the optional starting point (not yet projected).
    pub fn to_problem(&self) -> Result<(MpccProblem, Option<PartitionedPoint>)> {
        let (n0, n1, n) = (self.n0, self.n1, self.dim());
        let bounds = |default: Option<(Vec<f64>, Vec<f64>)>| -> Result<(Vec<f64>, Vec<f64>)> {
            let (dl, du) = match default {
                Some((l, u)) => (Some(l), Some(u)),
                None if n0 == 0 => (Some(vec![]), Some(vec![])),
                None => (None, None),
            };
            let l0 = self
                .l0
                .clone()
                .or(dl)
                .ok_or_else(|| Error::Format("missing field `l0`".into()))?;
            let u0 = self
                .u0
                .clone()
                .or(du)
                .ok_or_else(|| Error::Format("missing field `u0`".into()))?;
            check_len("l0", n0, &l0)?;
            check_len("u0", n0, &u0)?;
            Ok((l0, u0))
        };
        let prob = match &self.objective {
            ObjectiveSpec::Quadratic { h, g, cubic } => {
                check_len("g", n, g)?;
                if let Some(c) = cubic {
                    check_len("cubic", n, c)?;
                }
                let upper = h.clone().unwrap_or_default();
                let mut obj = QuadraticObjective::new(n, &upper, g.clone(), cubic.clone())
                    .map_err(|e| Error::Format(format!("field `H`: {e}")))?;
                if h.is_none() {
                    obj = obj.without_hessian();
                }
                let (l0, u0) = bounds(None)?;
                MpccProblem::new(n0, n1, l0, u0, Arc::new(obj))?
            }
            ObjectiveSpec::Catalog {
                family,
                compl_class,
            } => {
                if n0 != n1 {
                    return Err(Error::Format(format!(
                        "catalog problems need n0 == n1, found n0 = {n0}, n1 = {n1}"
                    )));
                }
                let c = CatalogProblem::new(*family, *compl_class, n1)?;
                let base = c.to_problem()?;
                let (l0, u0) = bounds(Some((base.lower().to_vec(), base.upper().to_vec())))?;
                MpccProblem::new(n0, n1, l0, u0, base.objective().clone())?
            }
            ObjectiveSpec::Nash1a { rho, lambda } => {
                if (n0, n1) != (4, 2) {
                    return Err(Error::Format(format!(
                        "nash1a needs n0 = 4 and n1 = 2, found n0 = {n0}, n1 = {n1}"
                    )));
                }
                let base = nash1a_objective(Nash1aParams {
                    rho: *rho,
                    lambda: *lambda,
                })?;
                let (l0, u0) = bounds(Some((base.lower().to_vec(), base.upper().to_vec())))?;
                MpccProblem::new(n0, n1, l0, u0, base.objective().clone())?
            }
        };
        let x = match &self.x_init {
            Some(v) => {
                check_len("x_init", n, v)?;
                Some(PartitionedPoint::from_flat(n0, n1, v.clone())?)
            }
            None => None,
        };
        Ok((prob, x))
    }
}
