//! Random sparse quadratic MPCC instances.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::problem::{MpccProblem, Objective};

/// Probability that an upper-triangle entry of `H` is nonzero.
pub const FILL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumClass {
    Indefinite,
    Psd,
}

impl SpectrumClass {
    /// Short tag used in instance names.
    pub fn tag(self) -> &'static str {
        match self {
            SpectrumClass::Indefinite => "ind",
            SpectrumClass::Psd => "psd",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "ind" | "indefinite" => Some(SpectrumClass::Indefinite),
            "psd" => Some(SpectrumClass::Psd),
            _ => None,
        }
    }
}

/// Rounds half away from zero to four decimal places.
pub fn round4(v: f64) -> f64 {
    let r = (v * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticInstance {
    pub n0: usize,
    pub n1: usize,
    /// Upper-triangle entries `(i, j, v)` with `i <= j`.
    pub h: Vec<(usize, usize, f64)>,
    pub g: Vec<f64>,
    pub l0: Vec<f64>,
    pub u0: Vec<f64>,
    pub seed: u64,
    pub class: SpectrumClass,
}

impl QuadraticInstance {
    pub fn dim(&self) -> usize {
        self.n0 + 2 * self.n1
    }

    pub fn dense_h(&self) -> DMatrix<f64> {
        dense_from_upper(self.dim(), &self.h)
    }

    /// Number of nonzeros of the full symmetric `H`.
    pub fn nnz(&self) -> usize {
        self.h
            .iter()
            .map(|&(i, j, _)| if i == j { 1 } else { 2 })
            .sum()
    }

    pub fn objective(&self) -> QuadraticObjective {
        QuadraticObjective::new(self.dim(), &self.h, self.g.clone(), None)
            .expect("generated instance is well formed")
    }

    pub fn to_problem(&self) -> Result<MpccProblem> {
        MpccProblem::new(
            self.n0,
            self.n1,
            self.l0.clone(),
            self.u0.clone(),
            Arc::new(self.objective()),
        )
    }
}

pub(crate) fn dense_from_upper(n: usize, upper: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n, n);
    for &(i, j, v) in upper {
        h[(i, j)] += v;
        if i != j {
            h[(j, i)] += v;
        }
    }
    h
}

/// Generates a deterministic instance from `seed`.
///
/// Each upper-triangle entry of `H` is nonzero with probability [`FILL`] and
/// standard normal. For the PSD class every diagonal entry is then replaced
/// by one that dominates its row, so all eigenvalues are nonnegative. For the
/// indefinite class only the complementarity rows get a dominant diagonal
/// (dominating the complementarity block).
pub fn generate_quadratic(
    n0: usize,
    n1: usize,
    class: SpectrumClass,
    seed: u64,
) -> Result<QuadraticInstance> {
    if n0 == 0 || n1 == 0 {
        return Err(Error::InvalidProblem("n0 and n1 must be positive".into()));
    }
    let n = n0 + 2 * n1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut h = Vec::new();
    for i in 0..n {
        for j in i..n {
            if rng.random::<f64>() < FILL {
                let v: f64 = rng.sample(StandardNormal);
                let v = round4(v);
                if v != 0.0 {
                    h.push((i, j, v));
                }
            }
        }
    }
    // Rows whose diagonal is replaced by a dominant one: every row for psd,
    // only the complementarity rows for indefinite. In the latter case the
    // dominance is taken over the complementarity block alone, which keeps
    // that block positive definite and the objective bounded below on the
    // unbounded pair variables, while the x0 block stays indefinite.
    let first = match class {
        SpectrumClass::Psd => 0,
        SpectrumClass::Indefinite => n0,
    };
    h.retain(|&(i, j, _)| !(i == j && i >= first));
    let mut row_sum = vec![0.0; n];
    for &(i, j, v) in &h {
        if i != j && i >= first && j >= first {
            row_sum[i] += f64::abs(v);
            row_sum[j] += f64::abs(v);
        }
    }
    for (i, s) in row_sum.iter().enumerate().skip(first) {
        let extra: f64 = rng.sample(StandardNormal);
        // round up, with one extra unit so rounding never breaks dominance
        let d = ((s + extra.abs()) * 1e4).ceil() / 1e4 + 1e-4;
        h.push((i, i, round4(d)));
    }
    h.sort_by_key(|&(i, j, _)| (i, j));

    let g = (0..n)
        .map(|_| round4(rng.random_range(-10.0..=10.0)))
        .collect();
    let mut l0 = Vec::with_capacity(n0);
    let mut u0 = Vec::with_capacity(n0);
    for _ in 0..n0 {
        loop {
            let l = round4(rng.random_range(-10.0..=10.0));
            let u = round4(rng.random_range(0.0..=20.0));
            if l < u {
                l0.push(l);
                u0.push(u);
                break;
            }
        }
    }
    Ok(QuadraticInstance {
        n0,
        n1,
        h,
        g,
        l0,
        u0,
        seed,
        class,
    })
}

/// `f(x) = ½ xᵀHx + gᵀx + Σ cᵢ xᵢ³`.
///
/// The cubic diagonal term is optional; it lets small hand-written examples
/// use the same file format as the generated instances.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    h: DMatrix<f64>,
    g: Vec<f64>,
    cubic: Option<Vec<f64>>,
    with_hessian: bool,
}

impl QuadraticObjective {
    pub fn new(
        n: usize,
        upper: &[(usize, usize, f64)],
        g: Vec<f64>,
        cubic: Option<Vec<f64>>,
    ) -> Result<Self> {
        if g.len() != n {
            return Err(Error::DimensionMismatch {
                what: "g",
                expected: n,
                found: g.len(),
            });
        }
        if let Some(c) = &cubic {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "cubic",
                    expected: n,
                    found: c.len(),
                });
            }
        }
        for &(i, j, _) in upper {
            if i > j || j >= n {
                return Err(Error::InvalidProblem(format!(
                    "H entry ({i}, {j}) is not in the upper triangle of a {n}x{n} matrix"
                )));
            }
        }
        Ok(Self {
            h: dense_from_upper(n, upper),
            g,
            cubic,
            with_hessian: true,
        })
    }

    /// Same function, but the Hessian oracle reports itself unavailable.
    pub fn without_hessian(mut self) -> Self {
        self.with_hessian = false;
        self
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.g.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let hx = crate::linalg::mat_vec(&self.h, x);
        let mut f = 0.5 * dot(x, &hx) + dot(&self.g, x);
        if let Some(c) = &self.cubic {
            f += c.iter().zip(x).map(|(c, v)| c * v * v * v).sum::<f64>();
        }
        f
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut r = crate::linalg::mat_vec(&self.h, x);
        for (ri, gi) in r.iter_mut().zip(&self.g) {
            *ri += gi;
        }
        if let Some(c) = &self.cubic {
            for ((ri, ci), v) in r.iter_mut().zip(c).zip(x) {
                *ri += 3.0 * ci * v * v;
            }
        }
        r
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        if !self.with_hessian {
            return None;
        }
        let mut h = self.h.clone();
        if let Some(c) = &self.cubic {
            for (i, (ci, v)) in c.iter().zip(x).enumerate() {
                h[(i, i)] += 6.0 * ci * v;
            }
        }
        Some(h)
    }

    fn has_hessian(&self) -> bool {
        self.with_hessian
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round4(1.234_56), 1.2346);
        assert_eq!(round4(-2.00005), -2.0001);
        assert_eq!(round4(-0.00001), 0.0);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_quadratic(5, 5, SpectrumClass::Indefinite, 3).unwrap();
        let b = generate_quadratic(5, 5, SpectrumClass::Indefinite, 3).unwrap();
        let c = generate_quadratic(5, 5, SpectrumClass::Indefinite, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bounds_are_ordered() {
        let q = generate_quadratic(30, 2, SpectrumClass::Psd, 1).unwrap();
        assert!(q.l0.iter().zip(&q.u0).all(|(l, u)| l < u));
    }

    #[test]
    fn cubic_example_value() {
        // x1^3 - (x2 - x2^2 / 2)
        let f = QuadraticObjective::new(2, &[(1, 1, 1.0)], vec![0.0, -1.0], Some(vec![1.0, 0.0]))
            .unwrap();
        assert_eq!(f.value(&[2.0, 0.0]), 8.0);
        assert_eq!(f.value(&[0.0, 1.0]), -0.5);
        assert_eq!(f.gradient(&[2.0, 0.0]), vec![12.0, -1.0]);
    }
}
