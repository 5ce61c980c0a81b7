//! Trust-region solver for bound-constrained mathematical programs with
//! complementarity constraints.

// NaN-rejecting checks are written as `!(a > b)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod auglag;
pub mod bench;
pub mod boxqp;
pub mod bqp;
pub mod cauchy;
pub mod config;
pub mod driver;
pub mod error;
pub mod format;
pub mod linalg;
pub mod lpcc;
pub mod problem;

pub use config::{ResetPolicy, SolverConfig, Variant};
pub use driver::{slpcc_solve, IterationRecord, SolveReport, SolveStatus, StepKind};
pub use error::{Error, Result};
pub use format::{ObjectiveSpec, ProblemFile};
pub use problem::{
    active_sets, project_feasible, stationarity_measure, ActiveSets, MpccProblem, Objective,
    PartitionedPoint,
};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/stationarity.md")]
    mod stationarity {}
    #[doc = include_str!("../../../book/src/trust_region.md")]
    mod trust_region {}
    #[doc = include_str!("../../../book/src/second_order.md")]
    mod second_order {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/auglag.md")]
    mod auglag {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
