//! Variation operators: bit-flip selection of variables to fix, and the
//! fix-set mutation and crossover of the EDO algorithm.

use rand::seq::index;
use rand::Rng;

use crate::cnf::Assignment;
use crate::error::{Error, Result};

/// An ordered list of `(variable, value)` pairs fixed before solving.
/// Variables are 1-indexed and pairwise distinct.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FixSet(Vec<(u32, bool)>);

impl FixSet {
    pub fn from_entries(entries: Vec<(u32, bool)>) -> Result<Self> {
        for (i, &(v, _)) in entries.iter().enumerate() {
            if v == 0 {
                return Err(Error::Config("fix-set variable index 0".into()));
            }
            if entries[..i].iter().any(|&(w, _)| w == v) {
                return Err(Error::Config(format!("variable {v} fixed twice")));
            }
        }
        Ok(FixSet(entries))
    }

    pub fn entries(&self) -> &[(u32, bool)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.0.iter().any(|&(v, _)| v == var)
    }

    /// Checks distinctness and that every index lies in `1..=n`.
    pub fn is_valid_for(&self, n: usize) -> bool {
        self.0.len() <= n
            && self.0.iter().enumerate().all(|(i, &(v, _))| {
                v >= 1 && v as usize <= n && !self.0[..i].iter().any(|&(w, _)| w == v)
            })
    }

    /// Does `x` agree with every fixed value?
    pub fn agrees_with(&self, x: &Assignment) -> bool {
        self.0.iter().all(|&(v, b)| x.get(v as usize - 1) == b)
    }

    fn unfixed(&self, n: usize) -> Vec<u32> {
        let mut fixed = vec![false; n + 1];
        for &(v, _) in &self.0 {
            fixed[v as usize] = true;
        }
        (1..=n as u32).filter(|&v| !fixed[v as usize]).collect()
    }
}

/// `l` distinct variables drawn without replacement, each with a fair-coin
/// value. Used to seed the EDO population.
pub fn random_fixset<R: Rng + ?Sized>(n: usize, l: usize, rng: &mut R) -> FixSet {
    let l = l.min(n);
    let picks = index::sample(rng, n, l);
    FixSet(
        picks
            .into_iter()
            .map(|i| (i as u32 + 1, rng.gen_bool(0.5)))
            .collect(),
    )
}

/// Includes each variable independently with probability `1/n`, carrying the
/// flipped value of `x`.
pub fn bitflip_fixset<R: Rng + ?Sized>(x: &Assignment, rng: &mut R) -> FixSet {
    let n = x.len();
    if n == 0 {
        return FixSet::default();
    }
    let p = 1.0 / n as f64;
    FixSet(
        (0..n)
            .filter(|_| rng.gen_bool(p))
            .map(|i| (i as u32 + 1, !x.get(i)))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationAction {
    /// Fix one more variable.
    Add,
    /// Unfix one variable.
    Remove,
    /// Replace a fixed variable with an unfixed one, keeping its value.
    Switch,
}

impl MutationAction {
    pub fn is_feasible(self, len: usize, n: usize) -> bool {
        match self {
            MutationAction::Add => len < n,
            MutationAction::Remove => len > 0,
            MutationAction::Switch => len > 0 && len < n,
        }
    }
}

/// Applies one of add, remove or switch, chosen uniformly among the actions
/// feasible for `y`. Returns `y` unchanged only when `n == 0`.
pub fn fixset_mutation<R: Rng + ?Sized>(y: &FixSet, n: usize, rng: &mut R) -> FixSet {
    let feasible: Vec<MutationAction> = [
        MutationAction::Add,
        MutationAction::Remove,
        MutationAction::Switch,
    ]
    .into_iter()
    .filter(|a| a.is_feasible(y.len(), n))
    .collect();
    if feasible.is_empty() {
        return y.clone();
    }
    let action = feasible[rng.gen_range(0..feasible.len())];
    apply_mutation(y, n, action, rng)
}

/// Applies a specific mutation action. Panics if `action` is infeasible.
pub fn apply_mutation<R: Rng + ?Sized>(
    y: &FixSet,
    n: usize,
    action: MutationAction,
    rng: &mut R,
) -> FixSet {
    assert!(
        action.is_feasible(y.len(), n),
        "{action:?} infeasible for |y|={} n={n}",
        y.len()
    );
    let mut out = y.0.clone();
    match action {
        MutationAction::Add => {
            let free = y.unfixed(n);
            let v = free[rng.gen_range(0..free.len())];
            out.push((v, rng.gen_bool(0.5)));
        }
        MutationAction::Remove => {
            out.remove(rng.gen_range(0..out.len()));
        }
        MutationAction::Switch => {
            let pos = rng.gen_range(0..out.len());
            let free = y.unfixed(n);
            out[pos].0 = free[rng.gen_range(0..free.len())];
        }
    }
    FixSet(out)
}

/// Pads the shorter parent with empty cells, takes each position from either
/// parent with probability 1/2 and drops empty cells. A variable chosen twice
/// keeps its first occurrence.
pub fn fixset_crossover<R: Rng + ?Sized>(a: &FixSet, b: &FixSet, rng: &mut R) -> FixSet {
    let len = a.len().max(b.len());
    let mut out: Vec<(u32, bool)> = Vec::with_capacity(len);
    for pos in 0..len {
        let cell = if rng.gen_bool(0.5) {
            a.0.get(pos)
        } else {
            b.0.get(pos)
        };
        if let Some(&(v, val)) = cell {
            if !out.iter().any(|&(w, _)| w == v) {
                out.push((v, val));
            }
        }
    }
    FixSet(out)
}
