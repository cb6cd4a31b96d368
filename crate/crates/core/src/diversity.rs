//! Entropy-based population diversity.
//!
//! For a population `P` and variable `i`, let `f_i` be the number of members
//! assigning `true` to `i`. Each variable contributes
//! `h(f_i) = -(f_i/|P|) ln(f_i/|P|)` (zero when `f_i = 0`). `H1` sums the
//! contributions; `H2` weights each one by the variable's literal count in the
//! formula. Both peak when every `f_i = |P|/e`, giving `H1max = n/e` and
//! `H2max = C/e`.
//!
//! The population size `|P|` is the denominator, which equals the capacity `μ`
//! whenever the population is full.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use crate::cnf::{Assignment, Formula};
use crate::error::{Error, Result};

/// Per-variable contribution `h(f)` for a population of `size` members.
#[inline]
pub fn contribution(f: u32, size: u32) -> f64 {
    debug_assert!(f <= size && size >= 1);
    if f == 0 || f == size {
        0.0
    } else {
        let p = f as f64 / size as f64;
        -p * p.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    H1,
    H2,
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::H1 => "h1",
            MeasureKind::H2 => "h2",
        })
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h1" => Ok(MeasureKind::H1),
            "h2" => Ok(MeasureKind::H2),
            _ => Err(Error::Config(format!(
                "unknown measure `{s}` (expected h1 or h2)"
            ))),
        }
    }
}

/// A diversity measure bound to a formula's variable count and, for `H2`,
/// its occurrence vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    kind: MeasureKind,
    weights: Vec<f64>,
    weight_sum: f64,
}

impl Measure {
    pub fn h1(n: usize) -> Self {
        Measure {
            kind: MeasureKind::H1,
            weights: vec![1.0; n],
            weight_sum: n as f64,
        }
    }

    /// `H2` from occurrence counts `r` (0-indexed) and total literal count `c`.
    pub fn h2(r: &[u32], c: u64) -> Result<Self> {
        let sum: u64 = r.iter().map(|&v| v as u64).sum();
        if sum != c {
            return Err(Error::Config(format!(
                "occurrence counts sum to {sum}, expected C={c}"
            )));
        }
        Ok(Measure {
            kind: MeasureKind::H2,
            weights: r.iter().map(|&v| v as f64).collect(),
            weight_sum: c as f64,
        })
    }

    pub fn for_formula(kind: MeasureKind, f: &Formula) -> Self {
        match kind {
            MeasureKind::H1 => Measure::h1(f.num_vars()),
            MeasureKind::H2 => {
                let (r, c) = f.occurrence_counts();
                Measure::h2(&r, c).expect("occurrence counts are consistent")
            }
        }
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn num_vars(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `n/e` for `H1`, `C/e` for `H2`.
    pub fn max_entropy(&self) -> f64 {
        self.weight_sum / E
    }

    /// `value / max_entropy`; zero for a measure with no weight.
    pub fn normalized(&self, value: f64) -> f64 {
        let max = self.max_entropy();
        if max > 0.0 {
            value / max
        } else {
            0.0
        }
    }

    /// Weighted entropy of per-variable true counts over `size` members.
    /// Summation runs in ascending variable order.
    pub fn entropy_from_counts(&self, counts: &[u32], size: u32) -> f64 {
        debug_assert_eq!(counts.len(), self.weights.len());
        if size == 0 {
            return 0.0;
        }
        let table = contribution_table(size);
        counts
            .iter()
            .zip(&self.weights)
            .fold(0.0, |acc, (&f, &w)| acc + w * table[f as usize])
    }
}

fn contribution_table(size: u32) -> Vec<f64> {
    (0..=size).map(|f| contribution(f, size)).collect()
}

/// Entropy of `members` computed from scratch.
pub fn entropy(members: &[Assignment], measure: &Measure) -> f64 {
    let mut counts = vec![0u32; measure.num_vars()];
    for x in members {
        for (c, &v) in counts.iter_mut().zip(x.values()) {
            *c += v as u32;
        }
    }
    measure.entropy_from_counts(&counts, members.len() as u32)
}

/// A multiset of assignments with cached per-variable true counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Assignment>,
    mu: usize,
    true_counts: Vec<u32>,
}

impl Population {
    pub fn new(num_vars: usize, mu: usize) -> Self {
        Population {
            members: Vec::with_capacity(mu + 1),
            mu,
            true_counts: vec![0; num_vars],
        }
    }

    pub fn from_members(num_vars: usize, mu: usize, members: Vec<Assignment>) -> Self {
        let mut p = Population::new(num_vars, mu);
        for x in members {
            p.push(x);
        }
        p
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Assignment] {
        &self.members
    }

    pub fn true_counts(&self) -> &[u32] {
        &self.true_counts
    }

    /// Appends a member. The population may exceed `μ` by one until the next
    /// removal.
    pub fn push(&mut self, x: Assignment) {
        assert_eq!(x.len(), self.true_counts.len(), "assignment length");
        debug_assert!(self.members.len() <= self.mu, "population over capacity");
        for (c, &v) in self.true_counts.iter_mut().zip(x.values()) {
            *c += v as u32;
        }
        self.members.push(x);
    }

    /// Removes the member at `idx`, preserving the order of the rest.
    pub fn remove(&mut self, idx: usize) -> Assignment {
        let x = self.members.remove(idx);
        for (c, &v) in self.true_counts.iter_mut().zip(x.values()) {
            *c -= v as u32;
        }
        x
    }

    pub fn entropy(&self, measure: &Measure) -> f64 {
        measure.entropy_from_counts(&self.true_counts, self.members.len() as u32)
    }

    /// Index whose removal leaves the highest entropy. Ties go to the largest
    /// index, so a just-appended offspring that adds nothing is the one removed.
    pub fn least_contributor(&self, measure: &Measure) -> usize {
        assert!(
            self.members.len() >= 2,
            "least_contributor needs two members"
        );
        let size = self.members.len() as u32 - 1;
        let table = contribution_table(size);
        let mut best = 0;
        let mut best_h = f64::NEG_INFINITY;
        for (j, x) in self.members.iter().enumerate() {
            let h: f64 = self
                .true_counts
                .iter()
                .zip(x.values())
                .zip(measure.weights())
                .fold(0.0, |acc, ((&f, &v), &w)| {
                    acc + w * table[(f - v as u32) as usize]
                });
            if h >= best_h {
                best_h = h;
                best = j;
            }
        }
        best
    }
}
