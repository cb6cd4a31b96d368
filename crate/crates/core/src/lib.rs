//! Computing maximally diverse sets of satisfying assignments for CNF formulas.
//!
//! The crate bundles a CDCL SAT solver, entropy-based population diversity
//! measures, three diversity algorithms (blocking-clause enumeration, a bit-flip
//! evolutionary algorithm and a fix-set EDO algorithm), a random k-CNF instance
//! generator and an experiment harness that aggregates results into CSV tables.
//!
//! Variables are 1-indexed wherever they cross an external boundary (DIMACS,
//! [`Literal::var`], [`FixSet`] entries) and 0-indexed inside assignments and
//! count vectors.

pub mod algorithms;
pub mod cnf;
pub mod diversity;
pub mod error;
pub mod generator;
pub mod harness;
pub mod operators;
pub mod solver;

pub use algorithms::{run, RunConfig, RunResult, Trajectory, TrajectoryRecord, Variant};
pub use cnf::{Assignment, Clause, Formula, Literal};
pub use diversity::{Measure, MeasureKind, Population};
pub use error::{Error, Result};
pub use generator::{Distribution, GenConfig};
pub use operators::FixSet;
pub use solver::{SolveResult, SolverConfig, SolverEngine};
