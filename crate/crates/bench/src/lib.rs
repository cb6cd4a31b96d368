//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use satdiv::generator::generate;
use satdiv::{Assignment, Distribution, Formula, GenConfig, Population};

/// A satisfiable 3-CNF instance with `n` variables and `m` clauses.
pub fn instance(n: usize, m: usize, dist: Distribution, seed: u64) -> Formula {
    generate(&GenConfig::new(n, m, 3, dist).with_seed(seed))
        .expect("satisfiable instance within the reject budget")
        .formula
}

/// `size` uniformly random assignments over `n` variables.
pub fn random_population(n: usize, mu: usize, size: usize, seed: u64) -> Population {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = (0..size)
        .map(|_| Assignment::new((0..n).map(|_| rng.gen()).collect()))
        .collect();
    Population::from_members(n, mu, members)
}
