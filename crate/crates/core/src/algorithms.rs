//! The three diversity algorithms.
//!
//! * [`basic_enumeration`] collects models, blocking each one as it is found.
//! * [`bitflip_ea`] fixes a bit-flipped subset of a random member and lets the
//!   solver complete it.
//! * [`edo_ea`] evolves the fix-sets themselves with mutation or
//!   crossover followed by mutation.
//!
//! Both evolutionary algorithms are steady-state: each accepted model is
//! appended and the member whose removal leaves the highest entropy is
//! dropped, so the fitness measure never decreases once the population is
//! full. Every iteration appends one [`TrajectoryRecord`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{blocking_clause, fixing_clauses, Assignment, Formula};
use crate::diversity::{Measure, MeasureKind, Population};
use crate::error::{Error, Result};
use crate::operators::{bitflip_fixset, fixset_crossover, fixset_mutation, random_fixset, FixSet};
use crate::solver::{solve, SolveResult, SolverConfig};

/// Failed initialisation draws allowed per population slot in [`edo_ea`].
pub const INIT_ATTEMPTS_PER_MEMBER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Basic,
    Bitflip,
    EdoMutation,
    EdoCrossover,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Basic,
        Variant::Bitflip,
        Variant::EdoMutation,
        Variant::EdoCrossover,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::Bitflip => "bitflip",
            Variant::EdoMutation => "edo_mutation",
            Variant::EdoCrossover => "edo_crossover",
        }
    }

    pub fn is_edo(&self) -> bool {
        matches!(self, Variant::EdoMutation | Variant::EdoCrossover)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mu: usize,
    pub iterations: usize,
    /// Initial fix-set size for the EDO variants.
    pub l: usize,
    pub measure: MeasureKind,
    pub variant: Variant,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn new(variant: Variant) -> Self {
        RunConfig {
            mu: 20,
            iterations: 2000,
            l: 10,
            measure: MeasureKind::H1,
            variant,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.mu < 2 {
            return Err(Error::Config(format!("mu={} must be at least 2", self.mu)));
        }
        if self.variant.is_edo() && (self.l == 0 || self.l > n) {
            return Err(Error::Config(format!("l={} must lie in 1..=n={n}", self.l)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub iteration: usize,
    /// Population size after this iteration.
    pub size: usize,
    /// Raw `H1` of the population after this iteration.
    pub h1: f64,
    /// Raw `H2` of the population after this iteration.
    pub h2: f64,
    /// Unsatisfiable modified formulas so far, evolution phase only.
    pub unsat_count: u64,
    /// Whether this iteration's model survived.
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    pub fn final_unsat(&self) -> u64 {
        self.last().map_or(0, |r| r.unsat_count)
    }

    /// Values of `kind` in iteration order.
    pub fn series(&self, kind: MeasureKind) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| match kind {
                MeasureKind::H1 => r.h1,
                MeasureKind::H2 => r.h2,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub variant: Variant,
    pub population: Population,
    /// Fix-sets paired with the population members (EDO variants only).
    pub fixsets: Vec<FixSet>,
    pub trajectory: Trajectory,
    pub h1: f64,
    pub h2: f64,
    pub h1_normalized: f64,
    pub h2_normalized: f64,
    pub solver_calls: u64,
}

impl RunResult {
    pub fn normalized(&self, kind: MeasureKind) -> f64 {
        match kind {
            MeasureKind::H1 => self.h1_normalized,
            MeasureKind::H2 => self.h2_normalized,
        }
    }
}

/// Shared bookkeeping for one run.
struct Ctx<'a> {
    formula: &'a mut Formula,
    cfg: &'a RunConfig,
    h1: Measure,
    h2: Measure,
    fitness: Measure,
    rng: ChaCha8Rng,
    trajectory: Trajectory,
    unsat: u64,
    solver_calls: u64,
}

impl<'a> Ctx<'a> {
    fn new(formula: &'a mut Formula, cfg: &'a RunConfig) -> Result<Self> {
        cfg.validate(formula.num_vars())?;
        let h1 = Measure::h1(formula.num_vars());
        let h2 = Measure::for_formula(MeasureKind::H2, formula);
        let fitness = match cfg.measure {
            MeasureKind::H1 => h1.clone(),
            MeasureKind::H2 => h2.clone(),
        };
        Ok(Ctx {
            formula,
            cfg,
            h1,
            h2,
            fitness,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            trajectory: Trajectory::default(),
            unsat: 0,
            solver_calls: 0,
        })
    }

    fn solve_current(&mut self) -> Result<SolveResult> {
        self.solver_calls += 1;
        solve(self.formula, &self.cfg.solver)
    }

    /// Solves under the fixing clauses of `y`, always popping them again.
    fn solve_fixed(&mut self, y: &FixSet) -> Result<SolveResult> {
        self.formula.push_scope(fixing_clauses(y))?;
        let r = self.solve_current();
        self.formula.pop_scope()?;
        r
    }

    fn record(&mut self, iteration: usize, p: &Population, accepted: bool) {
        self.trajectory.records.push(TrajectoryRecord {
            iteration,
            size: p.len(),
            h1: p.entropy(&self.h1),
            h2: p.entropy(&self.h2),
            unsat_count: self.unsat,
            accepted,
        });
    }

    /// Drops the least contributor. Returns whether the newest member survived.
    fn select(&self, p: &mut Population, fixsets: Option<&mut Vec<FixSet>>) -> bool {
        let newest = p.len() - 1;
        let idx = p.least_contributor(&self.fitness);
        p.remove(idx);
        if let Some(ys) = fixsets {
            ys.remove(idx);
        }
        idx != newest
    }

    fn finish(self, population: Population, fixsets: Vec<FixSet>) -> RunResult {
        for x in population.members() {
            assert!(
                self.formula.base_satisfied_by(x),
                "population member violates the original formula"
            );
        }
        let h1 = population.entropy(&self.h1);
        let h2 = population.entropy(&self.h2);
        RunResult {
            variant: self.cfg.variant,
            h1_normalized: self.h1.normalized(h1),
            h2_normalized: self.h2.normalized(h2),
            h1,
            h2,
            population,
            fixsets,
            trajectory: self.trajectory,
            solver_calls: self.solver_calls,
        }
    }
}

/// Runs the algorithm selected by `cfg.variant`. The formula's clause list is
/// restored before returning.
pub fn run(f: &mut Formula, cfg: &RunConfig) -> Result<RunResult> {
    match cfg.variant {
        Variant::Basic => basic_enumeration(f, cfg),
        Variant::Bitflip => bitflip_ea(f, cfg),
        Variant::EdoMutation | Variant::EdoCrossover => edo_ea(f, cfg),
    }
}

/// Solves repeatedly, blocking every model found, until `μ` models are
/// collected or the formula becomes unsatisfiable.
pub fn basic_enumeration(f: &mut Formula, cfg: &RunConfig) -> Result<RunResult> {
    let depth = f.scope_depth();
    let result = basic_inner(f, cfg);
    while f.scope_depth() > depth {
        f.pop_scope()?;
    }
    result
}

fn basic_inner(f: &mut Formula, cfg: &RunConfig) -> Result<RunResult> {
    let mut ctx = Ctx::new(f, cfg)?;
    let n = ctx.formula.num_vars();
    let mut p = Population::new(n, cfg.mu);
    let mut iteration = 0;
    while p.len() < cfg.mu {
        iteration += 1;
        match ctx.solve_current()? {
            SolveResult::Sat(x) => {
                ctx.formula.push_scope(vec![blocking_clause(&x)])?;
                p.push(x);
                ctx.record(iteration, &p, true);
            }
            SolveResult::Unsat => {
                ctx.unsat += 1;
                ctx.record(iteration, &p, false);
                break;
            }
        }
    }
    Ok(ctx.finish(p, Vec::new()))
}

/// Bit-flip evolutionary algorithm.
pub fn bitflip_ea(f: &mut Formula, cfg: &RunConfig) -> Result<RunResult> {
    let mut ctx = Ctx::new(f, cfg)?;
    let n = ctx.formula.num_vars();
    let mut p = Population::new(n, cfg.mu);

    let first = ctx
        .solve_current()?
        .into_model()
        .ok_or(Error::Unsatisfiable)?;
    p.push(first);
    ctx.record(0, &p, true);

    for iteration in 1..=cfg.iterations {
        let parent = &p.members()[ctx.rng.gen_range(0..p.len())];
        let y = bitflip_fixset(parent, &mut ctx.rng);
        let accepted = match ctx.solve_fixed(&y)? {
            SolveResult::Sat(x) => {
                p.push(x);
                if p.len() > cfg.mu {
                    ctx.select(&mut p, None)
                } else {
                    true
                }
            }
            SolveResult::Unsat => {
                ctx.unsat += 1;
                false
            }
        };
        ctx.record(iteration, &p, accepted);
    }
    Ok(ctx.finish(p, Vec::new()))
}

/// EDO algorithm over fix-sets.
pub fn edo_ea(f: &mut Formula, cfg: &RunConfig) -> Result<RunResult> {
    if !cfg.variant.is_edo() {
        return Err(Error::Config(format!(
            "edo_ea cannot run variant {}",
            cfg.variant
        )));
    }
    let mut ctx = Ctx::new(f, cfg)?;
    let n = ctx.formula.num_vars();
    let mut p = Population::new(n, cfg.mu);
    let mut ys: Vec<FixSet> = Vec::with_capacity(cfg.mu + 1);

    let max_failures = INIT_ATTEMPTS_PER_MEMBER * cfg.mu;
    let mut failures = 0;
    while p.len() < cfg.mu {
        let y = random_fixset(n, cfg.l, &mut ctx.rng);
        match ctx.solve_fixed(&y)? {
            SolveResult::Sat(x) => {
                p.push(x);
                ys.push(y);
            }
            SolveResult::Unsat => {
                failures += 1;
                if failures >= max_failures {
                    return Err(Error::InitFailure {
                        found: p.len(),
                        mu: cfg.mu,
                        attempts: failures,
                    });
                }
            }
        }
    }
    ctx.record(0, &p, true);

    for iteration in 1..=cfg.iterations {
        let offspring = match cfg.variant {
            Variant::EdoCrossover => {
                let i = ctx.rng.gen_range(0..ys.len());
                let mut j = ctx.rng.gen_range(0..ys.len() - 1);
                if j >= i {
                    j += 1;
                }
                let child = fixset_crossover(&ys[i], &ys[j], &mut ctx.rng);
                fixset_mutation(&child, n, &mut ctx.rng)
            }
            _ => {
                let i = ctx.rng.gen_range(0..ys.len());
                fixset_mutation(&ys[i], n, &mut ctx.rng)
            }
        };
        let accepted = match ctx.solve_fixed(&offspring)? {
            SolveResult::Sat(x) => {
                p.push(x);
                ys.push(offspring);
                ctx.select(&mut p, Some(&mut ys))
            }
            SolveResult::Unsat => {
                ctx.unsat += 1;
                false
            }
        };
        ctx.record(iteration, &p, accepted);
    }
    Ok(ctx.finish(p, ys))
}

/// Re-derives the model paired with `y` by solving under its fixing clauses.
pub fn model_for_fixset(
    f: &mut Formula,
    y: &FixSet,
    solver: &SolverConfig,
) -> Result<Option<Assignment>> {
    f.push_scope(fixing_clauses(y))?;
    let r = solve(f, solver);
    f.pop_scope()?;
    Ok(r?.into_model())
}

/// Initial fix-set size across an instance set: `l_max` at the smallest clause
/// count falling linearly (rounded) to `l_min` at the largest.
pub fn l_schedule(m: usize, m_min: usize, m_max: usize, l_max: usize, l_min: usize) -> usize {
    if m_max <= m_min {
        return l_max;
    }
    let t = (m.clamp(m_min, m_max) - m_min) as f64 / (m_max - m_min) as f64;
    (l_max as f64 + t * (l_min as f64 - l_max as f64)).round() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;
    use crate::diversity::entropy;
    use crate::generator::{generate, Distribution, GenConfig};
    use crate::solver::enumerate_models;

    fn cfg(variant: Variant, mu: usize, iterations: usize, seed: u64) -> RunConfig {
        RunConfig {
            mu,
            iterations,
            l: 3,
            seed,
            ..RunConfig::new(variant)
        }
    }

    #[test]
    fn basic_exhausts_three_models() {
        // x1 ∨ x2 over two variables: exactly three models.
        let mut f = parse_dimacs("p cnf 2 1\n1 2 0\n").unwrap();
        let original = f.clone();
        let r = basic_enumeration(&mut f, &cfg(Variant::Basic, 20, 0, 0)).unwrap();
        assert_eq!(f, original);
        let mut got = r.population.members().to_vec();
        got.sort();
        assert_eq!(got, enumerate_models(&f, usize::MAX).unwrap());
        assert_eq!(r.trajectory.final_unsat(), 1);
    }

    #[test]
    fn basic_on_unconstrained_formula() {
        let mut f = Formula::new(5);
        let r = basic_enumeration(&mut f, &cfg(Variant::Basic, 20, 0, 0)).unwrap();
        let mut got = r.population.members().to_vec();
        assert_eq!(got.len(), 20);
        got.sort();
        got.dedup();
        assert_eq!(got.len(), 20);
        assert_eq!(f.scope_depth(), 0);
    }

    #[test]
    fn bitflip_rejects_unsat_formula() {
        let mut f = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n").unwrap();
        assert!(matches!(
            bitflip_ea(&mut f, &cfg(Variant::Bitflip, 4, 5, 0)),
            Err(Error::Unsatisfiable)
        ));
    }

    #[test]
    fn duplicate_offspring_leaves_entropy_unchanged() {
        let x = |v: &[u8]| Assignment::new(v.iter().map(|&b| b == 1).collect());
        let m = Measure::h1(3);
        let mut p =
            Population::from_members(3, 3, vec![x(&[1, 0, 0]), x(&[0, 1, 0]), x(&[0, 0, 1])]);
        let before = p.entropy(&m);
        p.push(x(&[0, 1, 0]));
        let idx = p.least_contributor(&m);
        p.remove(idx);
        assert_eq!(p.entropy(&m), before);
    }

    fn small_instance(seed: u64) -> Formula {
        generate(&GenConfig::new(12, 30, 3, Distribution::Uniform).with_seed(seed))
            .unwrap()
            .formula
    }

    #[test]
    fn edo_fixsets_reproduce_members() {
        for variant in [Variant::EdoMutation, Variant::EdoCrossover] {
            let mut f = small_instance(1);
            let c = cfg(variant, 6, 150, 5);
            let r = edo_ea(&mut f, &c).unwrap();
            assert_eq!(r.fixsets.len(), r.population.len());
            for (y, x) in r.fixsets.iter().zip(r.population.members()) {
                assert_eq!(
                    model_for_fixset(&mut f, y, &c.solver).unwrap().as_ref(),
                    Some(x)
                );
            }
            assert_eq!(f.scope_depth(), 0);
        }
    }

    #[test]
    fn evolutionary_runs_are_monotone_and_feasible() {
        for (seed, variant) in [
            (1, Variant::Bitflip),
            (2, Variant::EdoMutation),
            (3, Variant::EdoCrossover),
        ] {
            for measure in [MeasureKind::H1, MeasureKind::H2] {
                let mut f = small_instance(seed);
                let c = RunConfig {
                    measure,
                    ..cfg(variant, 5, 200, seed)
                };
                let r = run(&mut f, &c).unwrap();
                let series = r.trajectory.series(measure);
                assert_eq!(series.len(), 201);
                for (w, h) in r.trajectory.records.windows(2).zip(series.windows(2)) {
                    assert!(w[1].unsat_count >= w[0].unsat_count);
                    if w[0].size == 5 {
                        assert_eq!(w[1].size, 5);
                        assert!(h[1] >= h[0], "{variant} {measure} decreased");
                    }
                }
                let models = enumerate_models(&f, usize::MAX).unwrap();
                for x in r.population.members() {
                    assert!(models.contains(x));
                }
                let exact = entropy(r.population.members(), &Measure::h1(12));
                assert!((exact - r.h1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unsat_count_steps_only_on_rejections() {
        let mut f = small_instance(4);
        let r = edo_ea(&mut f, &cfg(Variant::EdoMutation, 4, 300, 9)).unwrap();
        for w in r.trajectory.records.windows(2) {
            let step = w[1].unsat_count - w[0].unsat_count;
            assert!(step <= 1);
            if step == 1 {
                assert!(!w[1].accepted);
                // An unsat iteration leaves the population untouched.
                assert_eq!((w[1].h1, w[1].h2), (w[0].h1, w[0].h2));
            }
        }
        // One solve per iteration after initialisation.
        assert!(r.solver_calls >= 4 + 300);
    }

    #[test]
    fn init_failure_is_reported() {
        // One model over ten forced variables: a random full fix-set is
        // satisfiable with probability 2^-10.
        let text = format!(
            "p cnf 10 10\n{}",
            (1..=10).map(|v| format!("{v} 0\n")).collect::<String>()
        );
        let mut f = parse_dimacs(&text).unwrap();
        let c = RunConfig {
            l: 10,
            ..cfg(Variant::EdoMutation, 2, 10, 0)
        };
        match edo_ea(&mut f, &c) {
            Err(Error::InitFailure { attempts, .. }) => assert_eq!(attempts, 100),
            other => panic!("{other:?}"),
        }
        assert_eq!(f.scope_depth(), 0);
    }

    #[test]
    fn config_validation() {
        let mut f = Formula::new(3);
        assert!(run(&mut f, &cfg(Variant::Bitflip, 1, 1, 0)).is_err());
        let c = RunConfig {
            l: 4,
            ..cfg(Variant::EdoMutation, 3, 1, 0)
        };
        assert!(run(&mut f, &c).is_err());
    }

    #[test]
    fn l_schedule_endpoints() {
        assert_eq!(l_schedule(210, 210, 380, 10, 4), 10);
        assert_eq!(l_schedule(380, 210, 380, 10, 4), 4);
        assert_eq!(l_schedule(300, 210, 380, 10, 4), 7);
        assert_eq!(l_schedule(270, 270, 270, 10, 4), 10);
    }

    #[test]
    fn runs_are_deterministic() {
        for variant in Variant::ALL {
            let c = cfg(variant, 5, 100, 11);
            let a = run(&mut small_instance(2), &c).unwrap();
            let b = run(&mut small_instance(2), &c).unwrap();
            assert_eq!(a.population, b.population);
            assert_eq!(a.trajectory, b.trajectory);
        }
    }
}
