#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use rand::Rng;
use slpcc::bench::QuadraticObjective;
use slpcc::{MpccProblem, PartitionedPoint, SolverConfig, Variant};

/// `f(x1, x2) = x1³ - x2 + ½ x2²` with one complementarity pair.
pub fn cubic_example() -> MpccProblem {
    let f =
        QuadraticObjective::new(2, &[(1, 1, 1.0)], vec![0.0, -1.0], Some(vec![1.0, 0.0])).unwrap();
    MpccProblem::new(0, 1, vec![], vec![], Arc::new(f)).unwrap()
}

pub fn pair_point(x1: f64, x2: f64) -> PartitionedPoint {
    PartitionedPoint::new(&[], &[x1], &[x2]).unwrap()
}

pub fn example_config() -> SolverConfig {
    SolverConfig {
        sigma: 0.25,
        delta_min: 0.5,
        delta_bar0: 2.0,
        variant: Variant::FirstOrder,
        ..SolverConfig::default()
    }
}

/// Random feasible point: box-interior or box-boundary `x0`, and each pair
/// strictly on one branch or biactive. Values are drawn from a small grid so
/// that ties with the trust radius occur.
pub fn random_point<R: Rng>(rng: &mut R, prob: &MpccProblem) -> PartitionedPoint {
    let (n0, n1) = (prob.n0(), prob.n1());
    let mut x0 = Vec::with_capacity(n0);
    for i in 0..n0 {
        let (l, u) = (prob.lower()[i], prob.upper()[i]);
        let v = match rng.random_range(0..4) {
            0 => l,
            1 => u,
            _ => l + (u - l) * rng.random::<f64>(),
        };
        x0.push(v);
    }
    let mut x1 = vec![0.0; n1];
    let mut x2 = vec![0.0; n1];
    for i in 0..n1 {
        let v = grid_value(rng);
        match rng.random_range(0..3) {
            0 => x1[i] = v,
            1 => x2[i] = v,
            _ => {}
        }
    }
    PartitionedPoint::new(&x0, &x1, &x2).unwrap()
}

pub fn grid_value<R: Rng>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        f64::from(rng.random_range(0..=8)) * 0.25
    } else {
        2.0 * rng.random::<f64>()
    }
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}
