//! Kruskal-Wallis H test and pairwise Bonferroni-corrected comparisons.

use std::cmp::Ordering;
use std::fmt;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KruskalWallis {
    pub h: f64,
    pub p: f64,
    pub df: usize,
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank. Also
/// returns `Σ (t³ - t)` over tie groups.
pub fn rank_with_ties(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

/// H statistic with tie correction and its chi-squared p-value on
/// `groups - 1` degrees of freedom.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<KruskalWallis> {
    if groups.len() < 2 {
        return Err(Error::Config(
            "Kruskal-Wallis needs at least two groups".into(),
        ));
    }
    if let Some(i) = groups.iter().position(|g| g.len() < 2) {
        return Err(Error::Config(format!(
            "Kruskal-Wallis group {i} has fewer than two observations"
        )));
    }
    if groups.iter().flat_map(|g| g.iter()).any(|v| v.is_nan()) {
        return Err(Error::Config("Kruskal-Wallis input contains NaN".into()));
    }
    let df = groups.len() - 1;
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let n = all.len() as f64;
    let (ranks, ties) = rank_with_ties(&all);
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        // Every observation identical.
        return Ok(KruskalWallis { h: 0.0, p: 1.0, df });
    }

    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let rank_sum: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += rank_sum * rank_sum / g.len() as f64;
        offset += g.len();
    }
    let h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
    let h = h.max(0.0);
    let chi = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    Ok(KruskalWallis {
        h,
        p: chi.sf(h),
        df,
    })
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Outcome of one pairwise comparison, from the first group's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Significantly higher median.
    Better,
    /// Significantly lower median.
    Worse,
    /// No significant difference.
    Same,
}

impl Comparison {
    pub fn symbol(self) -> char {
        match self {
            Comparison::Better => '+',
            Comparison::Worse => '-',
            Comparison::Same => '*',
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Compares `a` against `b` with a two-group Kruskal-Wallis test at `alpha`.
pub fn compare(a: &[f64], b: &[f64], alpha: f64) -> Result<Comparison> {
    let kw = kruskal_wallis(&[a, b])?;
    if kw.p >= alpha {
        return Ok(Comparison::Same);
    }
    Ok(match median(a).total_cmp(&median(b)) {
        Ordering::Greater => Comparison::Better,
        Ordering::Less => Comparison::Worse,
        Ordering::Equal => Comparison::Same,
    })
}

/// For every group, its comparison against every other group at
/// `alpha / (number of pairs)`. Entry `[i]` lists `(j, outcome)` for `j != i`.
pub fn pairwise_bonferroni(groups: &[&[f64]], alpha: f64) -> Result<Vec<Vec<(usize, Comparison)>>> {
    let k = groups.len();
    let pairs = (k * k.saturating_sub(1) / 2).max(1);
    let corrected = alpha / pairs as f64;
    let mut out = vec![Vec::with_capacity(k.saturating_sub(1)); k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                out[i].push((j, compare(groups[i], groups[j], corrected)?));
            }
        }
    }
    Ok(out)
}
