//! CNF data model, DIMACS reading and writing, and the clause builders used by
//! the diversity algorithms.
//!
//! A [`Formula`] keeps its original clauses separate from a stack of scoped
//! clause groups. The algorithms push fixing or blocking clauses for the
//! duration of a solve and pop them again, so the base clause list never
//! changes.

use std::fmt::{self, Write as _};
use std::ops::Index;
use std::path::Path;

use crate::error::{Error, Result};
use crate::operators::FixSet;

/// A possibly negated variable. `var` is 1-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        debug_assert!(var >= 1);
        Literal { var, negated }
    }

    pub fn pos(var: u32) -> Self {
        Literal::new(var, false)
    }

    pub fn neg(var: u32) -> Self {
        Literal::new(var, true)
    }

    /// From a nonzero DIMACS integer.
    pub fn from_dimacs(lit: i64) -> Self {
        debug_assert!(lit != 0);
        Literal::new(lit.unsigned_abs() as u32, lit < 0)
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    /// 0-based variable index.
    #[inline]
    pub fn index(self) -> usize {
        self.var as usize - 1
    }

    /// Truth value of this literal under `x`.
    #[inline]
    pub fn eval(self, x: &Assignment) -> bool {
        x.get(self.index()) != self.negated
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal::new(self.var, !self.negated)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A non-empty disjunction of literals over pairwise distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause(Vec<Literal>);

impl Clause {
    /// Builds a clause, rejecting empty input, repeated variables and
    /// complementary pairs.
    pub fn new(literals: Vec<Literal>) -> Result<Self> {
        if literals.is_empty() {
            return Err(Error::InvalidClause("empty clause".into()));
        }
        if literals.iter().any(|l| l.var == 0) {
            return Err(Error::InvalidClause("variable index 0".into()));
        }
        // Clauses are short; quadratic scan beats hashing here.
        for (i, a) in literals.iter().enumerate() {
            if let Some(b) = literals[..i].iter().find(|b| b.var == a.var) {
                let what = if b.negated == a.negated {
                    "duplicate"
                } else {
                    "complementary"
                };
                return Err(Error::InvalidClause(format!(
                    "{what} literal on variable {}",
                    a.var
                )));
            }
        }
        Ok(Clause(literals))
    }

    /// Unit clause forcing `var` to `value`.
    pub fn unit(var: u32, value: bool) -> Self {
        Clause(vec![Literal::new(var, !value)])
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_satisfied_by(&self, x: &Assignment) -> bool {
        self.0.iter().any(|l| l.eval(x))
    }

    fn max_var(&self) -> u32 {
        self.0.iter().map(|l| l.var).max().unwrap_or(0)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

/// A total truth assignment. Indexing is 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all_false(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    /// Renders as zero-terminated DIMACS literals, e.g. `1 -2 3 0`.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for (i, &v) in self.0.iter().enumerate() {
            let lit = if v { i as i64 + 1 } else { -(i as i64 + 1) };
            let _ = write!(out, "{lit} ");
        }
        out.push('0');
        out
    }
}

impl Index<usize> for Assignment {
    type Output = bool;

    fn index(&self, i: usize) -> &bool {
        &self.0[i]
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(v: Vec<bool>) -> Self {
        Assignment(v)
    }
}

/// CNF formula over `n` variables with scoped temporary clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    scopes: Vec<Vec<Clause>>,
}

impl Formula {
    pub fn new(num_vars: usize) -> Self {
        Formula {
            num_vars,
            clauses: Vec::new(),
            scopes: Vec::new(),
        }
    }

    pub fn with_clauses(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        let mut f = Formula::new(num_vars);
        for c in clauses {
            f.add_clause(c)?;
        }
        Ok(f)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Appends a base clause. Only valid while no scope is open.
    pub fn add_clause(&mut self, clause: Clause) -> Result<()> {
        self.check_range(&clause)?;
        if !self.scopes.is_empty() {
            return Err(Error::InvalidClause(
                "base clauses cannot be added while a scope is open".into(),
            ));
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// The original clauses.
    pub fn base_clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Number of original clauses (`m`).
    pub fn num_base_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Base plus all scoped clauses.
    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().chain(self.scopes.iter().flatten())
    }

    /// Effective clause count, base plus scoped.
    pub fn num_clauses(&self) -> usize {
        self.clauses.len() + self.scopes.iter().map(Vec::len).sum::<usize>()
    }

    pub fn scope_depth(&self) -> usize {
        self.scopes.len()
    }

    pub fn push_scope(&mut self, clauses: Vec<Clause>) -> Result<()> {
        for c in &clauses {
            self.check_range(c)?;
        }
        self.scopes.push(clauses);
        Ok(())
    }

    /// Removes the most recently pushed clause group.
    pub fn pop_scope(&mut self) -> Result<Vec<Clause>> {
        self.scopes.pop().ok_or(Error::EmptyScopeStack)
    }

    /// True when `x` satisfies every base and scoped clause.
    pub fn is_satisfied_by(&self, x: &Assignment) -> bool {
        x.len() == self.num_vars && self.clauses().all(|c| c.is_satisfied_by(x))
    }

    /// True when `x` satisfies every base clause, ignoring scopes.
    pub fn base_satisfied_by(&self, x: &Assignment) -> bool {
        x.len() == self.num_vars && self.clauses.iter().all(|c| c.is_satisfied_by(x))
    }

    /// Per-variable occurrence counts `r` (0-indexed) over the base clauses,
    /// and the total literal count `C`.
    pub fn occurrence_counts(&self) -> (Vec<u32>, u64) {
        let mut r = vec![0u32; self.num_vars];
        let mut total = 0u64;
        for c in &self.clauses {
            for l in c.literals() {
                r[l.index()] += 1;
            }
            total += c.len() as u64;
        }
        (r, total)
    }

    fn check_range(&self, clause: &Clause) -> Result<()> {
        let v = clause.max_var();
        if v as usize > self.num_vars {
            return Err(Error::InvalidClause(format!(
                "variable {v} exceeds n={}",
                self.num_vars
            )));
        }
        Ok(())
    }
}

/// The clause falsified by `x` and by no other assignment.
pub fn blocking_clause(x: &Assignment) -> Clause {
    Clause(
        (0..x.len())
            .map(|i| Literal::new(i as u32 + 1, x.get(i)))
            .collect(),
    )
}

/// One unit clause per fixed variable.
pub fn fixing_clauses(y: &FixSet) -> Vec<Clause> {
    y.entries()
        .iter()
        .map(|&(var, value)| Clause::unit(var, value))
        .collect()
}

/// Parses DIMACS CNF text.
///
/// Comment lines (`c ...`) may appear anywhere. Clauses may span lines. A
/// line starting with `%` ends the clause section, as in the SATLIB files.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<(usize, usize)> = None;
    let mut formula = Formula::new(0);
    let mut current: Vec<Literal> = Vec::new();
    let mut clause_line = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(line_no, "duplicate header"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(Error::parse(line_no, "expected header `p cnf <n> <m>`"));
            }
            let n = parts[2]
                .parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("bad variable count `{}`", parts[2])))?;
            let m = parts[3]
                .parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("bad clause count `{}`", parts[3])))?;
            header = Some((n, m));
            formula = Formula::new(n);
            continue;
        }
        let Some((n, m)) = header else {
            return Err(Error::parse(line_no, "clause before `p cnf` header"));
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad literal `{tok}`")))?;
            if current.is_empty() {
                clause_line = line_no;
            }
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::parse(line_no, "empty clause"));
                }
                if formula.clauses.len() == m {
                    return Err(Error::parse(
                        line_no,
                        format!("more than the {m} clauses declared in the header"),
                    ));
                }
                let clause = Clause::new(std::mem::take(&mut current))
                    .map_err(|e| Error::parse(clause_line, e.to_string()))?;
                formula.clauses.push(clause);
            } else {
                if lit.unsigned_abs() as usize > n {
                    return Err(Error::parse(
                        line_no,
                        format!("literal {lit} exceeds n={n}"),
                    ));
                }
                current.push(Literal::from_dimacs(lit));
            }
        }
    }

    let Some((_, m)) = header else {
        return Err(Error::parse(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(Error::parse(clause_line, "clause not terminated by 0"));
    }
    if formula.clauses.len() != m {
        return Err(Error::parse(
            last_line.max(1),
            format!(
                "header declares {m} clauses but {} were found",
                formula.clauses.len()
            ),
        ));
    }
    Ok(formula)
}

/// Serialises the base clauses in DIMACS CNF.
pub fn write_dimacs(f: &Formula) -> String {
    write_dimacs_with_comments(f, &[])
}

pub fn write_dimacs_with_comments(f: &Formula, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(out, "p cnf {} {}", f.num_vars, f.clauses.len());
    for c in &f.clauses {
        let _ = writeln!(out, "{c}");
    }
    out
}

pub fn read_dimacs_file(path: impl AsRef<Path>) -> Result<Formula> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dimacs(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(v: &[i64]) -> Vec<Literal> {
        v.iter().map(|&l| Literal::from_dimacs(l)).collect()
    }

    fn clause(v: &[i64]) -> Clause {
        Clause::new(lits(v)).unwrap()
    }

    #[test]
    fn parses_two_clause_formula() {
        let f = parse_dimacs("p cnf 2 2\n1 -2 0\n-1 2 0\n").unwrap();
        assert_eq!(f.num_vars(), 2);
        assert_eq!(f.base_clauses(), &[clause(&[1, -2]), clause(&[-1, 2])]);
    }

    #[test]
    fn parses_unit_and_comments() {
        let f = parse_dimacs("c hello\np cnf 1 1\nc mid\n1 0\n").unwrap();
        assert_eq!(f.base_clauses(), &[clause(&[1])]);
    }

    #[test]
    fn clause_spanning_lines() {
        let f = parse_dimacs("p cnf 3 1\n1 2\n3 0\n").unwrap();
        assert_eq!(f.base_clauses(), &[clause(&[1, 2, 3])]);
    }

    #[test]
    fn rejects_out_of_range_literal() {
        let err = parse_dimacs("p cnf 2 1\n3 0\n").unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("literal 3 exceeds n=2"), "{msg}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_malformed_input() {
        for (text, line) in [
            ("p cnf x 1\n1 0\n", 1),
            ("p dnf 1 1\n1 0\n", 1),
            ("1 0\n", 1),
            ("p cnf 2 2\n1 0\n", 2),
            ("p cnf 2 1\n1 0\n2 0\n", 3),
            ("p cnf 2 1\n0\n", 2),
            ("p cnf 2 1\n1 -1 0\n", 2),
            ("p cnf 2 1\n1 2\n", 2),
            ("c only comments\n", 1),
        ] {
            match parse_dimacs(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn writes_dimacs() {
        let f = Formula::with_clauses(1, vec![clause(&[1])]).unwrap();
        assert_eq!(write_dimacs(&f), "p cnf 1 1\n1 0\n");
        let f = Formula::with_clauses(2, vec![clause(&[-1, 2])]).unwrap();
        assert_eq!(write_dimacs(&f), "p cnf 2 1\n-1 2 0\n");
    }

    #[test]
    fn clause_rejects_duplicates_and_tautologies() {
        assert!(Clause::new(lits(&[1, 1])).is_err());
        assert!(Clause::new(lits(&[1, -1])).is_err());
        assert!(Clause::new(vec![]).is_err());
    }

    #[test]
    fn blocking_clause_definition() {
        let x = Assignment::new(vec![true, false, true]);
        assert_eq!(blocking_clause(&x), clause(&[-1, 2, -3]));
        assert_eq!(blocking_clause(&Assignment::new(vec![false])), clause(&[1]));
    }

    #[test]
    fn blocking_clause_excludes_exactly_one_assignment() {
        for n in 1..=8usize {
            let all: Vec<Assignment> = (0..1u32 << n)
                .map(|bits| Assignment::new((0..n).map(|i| bits >> i & 1 == 1).collect()))
                .collect();
            for x in &all {
                let b = blocking_clause(x);
                assert_eq!(b.len(), n);
                for y in &all {
                    assert_eq!(b.is_satisfied_by(y), y != x);
                }
            }
        }
    }

    #[test]
    fn fixing_clause_definition() {
        let y = FixSet::from_entries(vec![(3, true), (7, false)]).unwrap();
        assert_eq!(fixing_clauses(&y), vec![clause(&[3]), clause(&[-7])]);
        assert!(fixing_clauses(&FixSet::default()).is_empty());
    }

    #[test]
    fn scopes_are_lifo() {
        let mut f = Formula::with_clauses(3, vec![clause(&[1, 2]), clause(&[-2, 3])]).unwrap();
        let original = f.clone();
        f.push_scope(vec![clause(&[1]), clause(&[2])]).unwrap();
        assert_eq!(f.num_clauses(), 4);
        f.push_scope(vec![clause(&[-3])]).unwrap();
        assert_eq!(f.num_clauses(), 5);
        assert_eq!(f.pop_scope().unwrap(), vec![clause(&[-3])]);
        assert_eq!(f.num_clauses(), 4);
        f.pop_scope().unwrap();
        assert_eq!(f, original);
        assert!(matches!(f.pop_scope(), Err(Error::EmptyScopeStack)));
    }

    #[test]
    fn scope_clause_range_checked() {
        let mut f = Formula::new(2);
        assert!(f.push_scope(vec![clause(&[3])]).is_err());
        assert_eq!(f.scope_depth(), 0);
    }

    #[test]
    fn occurrence_counts_by_hand() {
        let f = Formula::with_clauses(3, vec![clause(&[1, -2]), clause(&[1, 3])]).unwrap();
        assert_eq!(f.occurrence_counts(), (vec![2, 1, 1], 4));
    }

    #[test]
    fn scoped_clauses_affect_satisfaction() {
        let mut f = Formula::with_clauses(2, vec![clause(&[1, 2])]).unwrap();
        let x = Assignment::new(vec![true, false]);
        assert!(f.is_satisfied_by(&x));
        f.push_scope(vec![clause(&[-1])]).unwrap();
        assert!(!f.is_satisfied_by(&x));
        assert!(f.base_satisfied_by(&x));
    }
}
