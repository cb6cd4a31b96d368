//! Complete SAT decision procedure.
//!
//! [`solve`] considers the base and all scoped clauses of a [`Formula`]. The
//! built-in engine is deterministic for a fixed formula and configuration; an
//! external solver can be plugged in as a subprocess. Every model is checked
//! against the formula before it is returned.

mod cdcl;
mod enumerate;
mod external;

use std::path::PathBuf;

pub use cdcl::SolveStats;
pub use enumerate::{enumerate_models, ENUMERATION_LIMIT};
pub use external::{external_solve, parse_solver_output};

use crate::cnf::{Assignment, Formula};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Assignment> {
        match self {
            SolveResult::Sat(x) => Some(x),
            SolveResult::Unsat => None,
        }
    }

    pub fn into_model(self) -> Option<Assignment> {
        match self {
            SolveResult::Sat(x) => Some(x),
            SolveResult::Unsat => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SolverEngine {
    #[default]
    Builtin,
    /// Command invoked as `<command> <dimacs-file>`.
    External(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub engine: SolverEngine,
    /// Zero keeps the plain variable order; any other value jitters the
    /// initial activities deterministically.
    pub seed: u64,
    /// Conflicts before the first restart.
    pub restart_first: u64,
    /// Growth factor of the restart interval.
    pub restart_factor: f64,
    /// Activity decay per conflict.
    pub var_decay: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            engine: SolverEngine::Builtin,
            seed: 0,
            restart_first: 100,
            restart_factor: 1.5,
            var_decay: 0.95,
        }
    }
}

impl SolverConfig {
    pub fn external(command: impl Into<PathBuf>) -> Self {
        SolverConfig {
            engine: SolverEngine::External(command.into()),
            ..SolverConfig::default()
        }
    }
}

/// Decides `f` including its scoped clauses.
pub fn solve(f: &Formula, cfg: &SolverConfig) -> Result<SolveResult> {
    match &cfg.engine {
        SolverEngine::Builtin => Ok(solve_builtin(f, cfg).0),
        SolverEngine::External(cmd) => external_solve(f, cmd),
    }
}

/// Built-in engine with search statistics.
pub fn solve_builtin(f: &Formula, cfg: &SolverConfig) -> (SolveResult, SolveStats) {
    let mut s = cdcl::Cdcl::new(f, cfg);
    let result = match s.solve() {
        Some(x) => {
            assert!(
                f.is_satisfied_by(&x),
                "internal solver error: model violates the formula"
            );
            SolveResult::Sat(x)
        }
        None => SolveResult::Unsat,
    };
    (result, s.stats)
}

pub(crate) fn verify_model(f: &Formula, x: Assignment) -> Result<SolveResult> {
    if f.is_satisfied_by(&x) {
        Ok(SolveResult::Sat(x))
    } else {
        Err(Error::Solver("model does not satisfy the formula".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_dimacs, Clause};

    fn f(text: &str) -> Formula {
        parse_dimacs(text).unwrap()
    }

    #[test]
    fn contradiction_is_unsat() {
        let phi = f("p cnf 1 2\n1 0\n-1 0\n");
        assert_eq!(
            solve(&phi, &SolverConfig::default()).unwrap(),
            SolveResult::Unsat
        );
    }

    #[test]
    fn scoped_unit_forces_model() {
        let mut phi = f("p cnf 2 1\n1 2 0\n");
        phi.push_scope(vec![Clause::unit(1, false)]).unwrap();
        let r = solve(&phi, &SolverConfig::default()).unwrap();
        assert_eq!(r, SolveResult::Sat(Assignment::new(vec![false, true])));
        phi.pop_scope().unwrap();
    }

    #[test]
    fn empty_formula_defaults_to_false() {
        let phi = Formula::new(4);
        let r = solve(&phi, &SolverConfig::default()).unwrap();
        assert_eq!(r, SolveResult::Sat(Assignment::all_false(4)));
    }

    #[test]
    fn deterministic_model() {
        let phi = f("p cnf 4 4\n1 2 3 0\n-1 -2 0\n2 4 0\n-3 -4 0\n");
        for seed in [0, 7] {
            let cfg = SolverConfig {
                seed,
                ..SolverConfig::default()
            };
            let a = solve(&phi, &cfg).unwrap();
            let b = solve(&phi, &cfg).unwrap();
            assert_eq!(a, b);
            assert!(phi.is_satisfied_by(a.model().unwrap()));
        }
    }

    #[test]
    fn status_agrees_with_enumeration() {
        use crate::generator::{gen_formula, Distribution, GenConfig};
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for m in 30..=60 {
            let cfg = GenConfig::new(8, m, 3, Distribution::Uniform);
            for _ in 0..5 {
                let phi = gen_formula(&cfg, &mut rng);
                let models = enumerate_models(&phi, usize::MAX).unwrap();
                let r = solve(&phi, &SolverConfig::default()).unwrap();
                assert_eq!(r.is_sat(), !models.is_empty());
                if let SolveResult::Sat(x) = r {
                    assert!(models.contains(&x));
                }
            }
        }
    }
}
