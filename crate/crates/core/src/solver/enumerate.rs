use crate::cnf::{Assignment, Formula};
use crate::error::{Error, Result};

/// Largest variable count [`enumerate_models`] accepts.
pub const ENUMERATION_LIMIT: usize = 25;

/// All models of `f` (base and scoped clauses) by exhaustive search, at most
/// `cap` of them, in lexicographic order with `false < true` and variable 1
/// most significant.
pub fn enumerate_models(f: &Formula, cap: usize) -> Result<Vec<Assignment>> {
    let n = f.num_vars();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooManyVariables {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    // Clauses as (positive mask, negative mask) over the bit layout below.
    let bit = |var_index: usize| 1u32 << (n - 1 - var_index);
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .map(|c| {
            c.literals().iter().fold((0, 0), |(pos, neg), l| {
                if l.negated {
                    (pos, neg | bit(l.index()))
                } else {
                    (pos | bit(l.index()), neg)
                }
            })
        })
        .collect();

    let mut out = Vec::new();
    for code in 0..(1u64 << n) {
        if out.len() >= cap {
            break;
        }
        let code = code as u32;
        if masks
            .iter()
            .all(|&(pos, neg)| code & pos != 0 || !code & neg != 0)
        {
            out.push(Assignment::new(
                (0..n).map(|i| code & bit(i) != 0).collect(),
            ));
        }
    }
    Ok(out)
}
