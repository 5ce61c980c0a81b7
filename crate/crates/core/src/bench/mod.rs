//! Benchmark problems: random quadratic instances, a nonlinear catalog and
//! a small Nash equilibrium subproblem.

pub mod catalog;
pub mod nash;
pub mod quadratic;

pub use catalog::{catalog_eval, CatalogObjective, CatalogProblem, Family};
pub use nash::{nash1a_objective, Nash1aObjective, Nash1aParams};
pub use quadratic::{
    generate_quadratic, round4, QuadraticInstance, QuadraticObjective, SpectrumClass,
};
