//! Random k-CNF instances with uniform or power-law variable occurrence.
//!
//! Each clause draws `k` distinct variables. Under the power-law model variable
//! `i` (1-indexed) is drawn with probability proportional to `i^(-1/(β-1))`,
//! repeats within a clause are redrawn, and every literal is negated with
//! probability 1/2. [`gen_satisfiable`] rejects whole formulas until the solver
//! finds one satisfiable.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Clause, Formula, Literal};
use crate::error::{Error, Result};
use crate::solver::{solve, SolverConfig};

pub const DEFAULT_BETA: f64 = 2.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform,
    PowerLaw { beta: f64 },
}

impl Distribution {
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::PowerLaw { .. } => "powerlaw",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform => f.write_str("uniform"),
            Distribution::PowerLaw { beta } => write!(f, "powerlaw:{beta}"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// `uniform`, `powerlaw` (β = 2.75) or `powerlaw:<β>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, beta) = match s.split_once(':') {
            Some((n, b)) => (
                n,
                Some(
                    b.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad exponent `{b}`")))?,
                ),
            ),
            None => (s, None),
        };
        match (name, beta) {
            ("uniform", None) => Ok(Distribution::Uniform),
            ("powerlaw", b) => Ok(Distribution::PowerLaw {
                beta: b.unwrap_or(DEFAULT_BETA),
            }),
            _ => Err(Error::Config(format!("unknown distribution `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub dist: Distribution,
    pub seed: u64,
    pub max_rejects: usize,
}

impl GenConfig {
    pub fn new(n: usize, m: usize, k: usize, dist: Distribution) -> Self {
        GenConfig {
            n,
            m,
            k,
            dist,
            seed: 0,
            max_rejects: 1000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(Error::Config(format!(
                "clause length k={} must lie in 1..=n={}",
                self.k, self.n
            )));
        }
        if let Distribution::PowerLaw { beta } = self.dist {
            if beta.is_nan() || beta <= 2.0 {
                return Err(Error::Config(format!(
                    "power-law exponent {beta} must exceed 2"
                )));
            }
        }
        Ok(())
    }

    /// `<dist>_n<n>_m<m>_k<k>_seed<seed>.cnf`
    pub fn file_name(&self) -> String {
        format!(
            "{}_n{}_m{}_k{}_seed{}.cnf",
            self.dist.name(),
            self.n,
            self.m,
            self.k,
            self.seed
        )
    }

    /// DIMACS comment recording the full configuration.
    pub fn comment(&self) -> String {
        let beta = match self.dist {
            Distribution::PowerLaw { beta } => format!(" beta={beta}"),
            Distribution::Uniform => String::new(),
        };
        format!(
            "satdiv-gen dist={}{beta} n={} m={} k={} seed={} max_rejects={}",
            self.dist.name(),
            self.n,
            self.m,
            self.k,
            self.seed,
            self.max_rejects
        )
    }
}

/// Draws clauses for one configuration.
#[derive(Debug, Clone)]
pub struct ClauseSampler {
    n: usize,
    k: usize,
    weights: Option<WeightedIndex<f64>>,
}

impl ClauseSampler {
    pub fn new(cfg: &GenConfig) -> Result<Self> {
        cfg.validate()?;
        let weights = match cfg.dist {
            Distribution::Uniform => None,
            Distribution::PowerLaw { beta } => {
                let exp = -1.0 / (beta - 1.0);
                let w: Vec<f64> = (1..=cfg.n).map(|i| (i as f64).powf(exp)).collect();
                Some(WeightedIndex::new(w).expect("positive weights"))
            }
        };
        Ok(ClauseSampler {
            n: cfg.n,
            k: cfg.k,
            weights,
        })
    }

    pub fn clause<R: Rng + ?Sized>(&self, rng: &mut R) -> Clause {
        let vars: Vec<usize> = match &self.weights {
            None => index::sample(rng, self.n, self.k).into_vec(),
            Some(w) => {
                let mut picked = Vec::with_capacity(self.k);
                while picked.len() < self.k {
                    let v = w.sample(rng);
                    if !picked.contains(&v) {
                        picked.push(v);
                    }
                }
                picked
            }
        };
        let lits = vars
            .into_iter()
            .map(|v| Literal::new(v as u32 + 1, rng.gen_bool(0.5)))
            .collect();
        Clause::new(lits).expect("distinct variables")
    }
}

/// One clause for `cfg`. Prefer [`ClauseSampler`] when drawing many.
pub fn gen_clause<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<Clause> {
    Ok(ClauseSampler::new(cfg)?.clause(rng))
}

/// An `m`-clause formula without the satisfiability check. Panics on an
/// invalid configuration.
pub fn gen_formula<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Formula {
    let sampler = ClauseSampler::new(cfg).expect("valid generator config");
    sample_formula(cfg, &sampler, rng)
}

fn sample_formula<R: Rng + ?Sized>(
    cfg: &GenConfig,
    sampler: &ClauseSampler,
    rng: &mut R,
) -> Formula {
    let mut f = Formula::new(cfg.n);
    for _ in 0..cfg.m {
        f.add_clause(sampler.clause(rng)).expect("in range");
    }
    f
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub formula: Formula,
    pub rejects: usize,
}

/// Draws whole formulas until one is satisfiable.
pub fn gen_satisfiable<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<Generated> {
    let sampler = ClauseSampler::new(cfg)?;
    let solver = SolverConfig::default();
    let mut rejects = 0;
    loop {
        let formula = sample_formula(cfg, &sampler, rng);
        if solve(&formula, &solver)?.is_sat() {
            return Ok(Generated { formula, rejects });
        }
        rejects += 1;
        if rejects > cfg.max_rejects {
            return Err(Error::Generation { rejects });
        }
    }
}

/// [`gen_satisfiable`] seeded from `cfg.seed`.
pub fn generate(cfg: &GenConfig) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    gen_satisfiable(cfg, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_dimacs, write_dimacs};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn full_width_clause_mentions_every_variable() {
        let cfg = GenConfig::new(6, 1, 6, Distribution::Uniform);
        let mut r = rng(1);
        for _ in 0..20 {
            let c = gen_clause(&cfg, &mut r).unwrap();
            let mut vars: Vec<u32> = c.literals().iter().map(|l| l.var).collect();
            vars.sort();
            assert_eq!(vars, (1..=6).collect::<Vec<_>>());
        }
        let pl = GenConfig::new(6, 1, 6, Distribution::PowerLaw { beta: 2.75 });
        assert_eq!(gen_clause(&pl, &mut r).unwrap().len(), 6);
    }

    #[test]
    fn uniform_occurrence_frequencies() {
        // Each variable appears in a clause with probability 3/100.
        let cfg = GenConfig::new(100, 1, 3, Distribution::Uniform);
        let s = ClauseSampler::new(&cfg).unwrap();
        let mut r = rng(2);
        let draws = 100_000;
        let mut counts = vec![0usize; 100];
        for _ in 0..draws {
            for l in s.clause(&mut r).literals() {
                counts[l.index()] += 1;
            }
        }
        let p = 0.03;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() < 4.0 * sd, "{c}");
        }
    }

    #[test]
    fn powerlaw_rank_frequency_slope() {
        let cfg = GenConfig::new(100, 1, 3, Distribution::PowerLaw { beta: 2.75 });
        let s = ClauseSampler::new(&cfg).unwrap();
        let mut r = rng(3);
        let mut counts = vec![0usize; 100];
        for _ in 0..100_000 {
            for l in s.clause(&mut r).literals() {
                counts[l.index()] += 1;
            }
        }
        // Least-squares slope of log frequency against log rank.
        let pts: Vec<(f64, f64)> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (((i + 1) as f64).ln(), (c as f64).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((slope - (-1.0 / 1.75)).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn negation_is_fair() {
        let cfg = GenConfig::new(50, 1, 3, Distribution::PowerLaw { beta: 2.75 });
        let s = ClauseSampler::new(&cfg).unwrap();
        let mut r = rng(4);
        let neg: usize = (0..20_000)
            .flat_map(|_| s.clause(&mut r).literals().to_vec())
            .filter(|l| l.negated)
            .count();
        let frac = neg as f64 / 60_000.0;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn low_ratio_accepted_without_rejects() {
        let mut r = rng(5);
        let cfg = GenConfig::new(100, 210, 3, Distribution::Uniform);
        let mut total_rejects = 0;
        for _ in 0..100 {
            let g = gen_satisfiable(&cfg, &mut r).unwrap();
            total_rejects += g.rejects;
            assert_eq!(g.formula.num_base_clauses(), 210);
            assert_eq!(g.formula.occurrence_counts().1, 630);
            assert!(solve(&g.formula, &SolverConfig::default())
                .unwrap()
                .is_sat());
        }
        assert_eq!(total_rejects, 0);
    }

    #[test]
    fn empty_formula_is_trivially_satisfiable() {
        let g = generate(&GenConfig::new(10, 0, 3, Distribution::Uniform)).unwrap();
        assert_eq!(g.rejects, 0);
        assert_eq!(g.formula.num_base_clauses(), 0);
    }

    #[test]
    fn rejection_bound_reported() {
        // Far beyond the threshold: practically never satisfiable.
        let mut cfg = GenConfig::new(10, 200, 3, Distribution::Uniform);
        cfg.max_rejects = 3;
        assert!(matches!(
            generate(&cfg),
            Err(Error::Generation { rejects: 4 })
        ));
    }

    #[test]
    fn reproducible_and_round_trips() {
        let cfg = GenConfig::new(100, 250, 3, Distribution::PowerLaw { beta: 2.75 }).with_seed(42);
        let a = generate(&cfg).unwrap().formula;
        let b = generate(&cfg).unwrap().formula;
        assert_eq!(a, b);
        let back = parse_dimacs(&write_dimacs(&a)).unwrap();
        assert_eq!(back.base_clauses(), a.base_clauses());
    }

    #[test]
    fn config_validation() {
        assert!(GenConfig::new(2, 1, 3, Distribution::Uniform)
            .validate()
            .is_err());
        assert!(
            GenConfig::new(5, 1, 3, Distribution::PowerLaw { beta: 2.0 })
                .validate()
                .is_err()
        );
        assert_eq!(
            "powerlaw:2.5".parse::<Distribution>().unwrap(),
            Distribution::PowerLaw { beta: 2.5 }
        );
        assert_eq!(
            GenConfig::new(100, 210, 3, Distribution::Uniform)
                .with_seed(9)
                .file_name(),
            "uniform_n100_m210_k3_seed9.cnf"
        );
    }
}
