//! Conflict-driven clause learning over two watched literals.
//!
//! Branching uses decaying variable activities with saved phases (initially
//! false). Conflicts are analysed to the first unique implication point and
//! restarts follow a geometric conflict schedule. Learnt clauses are thinned at
//! restarts once they outnumber the original clauses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SolverConfig;
use crate::cnf::{Assignment, Formula};

/// Literal code: `2 * var + sign`, where sign 1 means negated. Variables are
/// 0-indexed here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, negated: bool) -> Lit {
        Lit((var as u32) << 1 | negated as u32)
    }

    #[inline]
    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    fn negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unset,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

#[derive(Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
}

/// Binary max-heap of variables ordered by activity, smaller index first on
/// ties.
#[derive(Debug, Default)]
struct VarOrder {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarOrder {
    fn new(n: usize) -> Self {
        VarOrder {
            heap: Vec::with_capacity(n),
            pos: vec![None; n],
        }
    }

    #[inline]
    fn before(a: usize, b: usize, act: &[f64]) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::before(v, p, act) {
                break;
            }
            self.heap[i] = p;
            self.pos[p] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let len = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && Self::before(self.heap[right], self.heap[left], act) {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if !Self::before(c, v, act) {
                break;
            }
            self.heap[i] = c;
            self.pos[c] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
}

pub(crate) struct Cdcl {
    num_vars: usize,
    clauses: Vec<ClauseData>,
    num_original: usize,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    var_decay: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    restart_first: u64,
    restart_factor: f64,
    /// Set when the clause set is unsatisfiable at level 0.
    inconsistent: bool,
    pub stats: SolveStats,
}

impl Cdcl {
    pub fn new(f: &Formula, cfg: &SolverConfig) -> Self {
        let n = f.num_vars();
        let mut s = Cdcl {
            num_vars: n,
            clauses: Vec::with_capacity(f.num_clauses()),
            num_original: 0,
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![Value::Unset; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            var_decay: cfg.var_decay,
            order: VarOrder::new(n),
            phase: vec![false; n],
            seen: vec![false; n],
            restart_first: cfg.restart_first.max(1),
            restart_factor: cfg.restart_factor.max(1.0),
            inconsistent: false,
            stats: SolveStats::default(),
        };
        if cfg.seed != 0 {
            // Tiny activity jitter; it only changes the initial branching order.
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for a in &mut s.activity {
                *a = rng.gen::<f64>() * 1e-5;
            }
        }
        for v in 0..n {
            s.order.insert(v, &s.activity);
        }
        for c in f.clauses() {
            let lits: Vec<Lit> = c
                .literals()
                .iter()
                .map(|l| Lit::new(l.index(), l.negated))
                .collect();
            s.add_original(lits);
            if s.inconsistent {
                break;
            }
        }
        s.num_original = s.clauses.len();
        s
    }

    fn add_original(&mut self, lits: Vec<Lit>) {
        if lits.len() == 1 {
            let l = lits[0];
            match self.value(l) {
                Value::True => {}
                Value::False => self.inconsistent = true,
                Value::Unset => self.enqueue(l, None),
            }
            return;
        }
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            lits,
            learnt: false,
        });
    }

    #[inline]
    fn value(&self, l: Lit) -> Value {
        match self.assigns[l.var()] {
            Value::Unset => Value::Unset,
            Value::True if l.negated() => Value::False,
            Value::False if l.negated() => Value::True,
            v => v,
        }
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var();
        debug_assert_eq!(self.assigns[v], Value::Unset);
        self.assigns[v] = if l.negated() {
            Value::False
        } else {
            Value::True
        };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation. Returns the conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut keep = 0;
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Value::True {
                    ws[keep] = w;
                    keep += 1;
                    continue;
                }
                let cref = w.cref as usize;
                let lits = &mut self.clauses[cref].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if first != w.blocker && self.value(first) == Value::True {
                    ws[keep] = Watcher {
                        cref: w.cref,
                        blocker: first,
                    };
                    keep += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[cref].lits.len() {
                    let cand = self.clauses[cref].lits[k];
                    if self.value(cand) != Value::False {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[cand.code()].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[keep] = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                keep += 1;
                if self.value(first) == Value::False {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[keep] = ws[i];
                        keep += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(keep);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first,
    /// highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level();

        loop {
            let start = usize::from(p.is_some());
            let len = self.clauses[confl as usize].lits.len();
            for k in start..len {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[lit.var()] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();

        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[max_i].var()] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var()];
        }
        (learnt, bt)
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var();
            self.phase[v] = !l.negated();
            self.assigns[v] = Value::Unset;
            self.reason[v] = None;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v] == Value::Unset {
                return Some(Lit::new(v, !self.phase[v]));
            }
        }
        None
    }

    /// Drops the longer half of the learnt clauses. Only called at level 0.
    fn reduce_learnts(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        let mut learnt_idx: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| self.clauses[i].learnt)
            .collect();
        learnt_idx.sort_by_key(|&i| (self.clauses[i].lits.len(), i));
        let keep_n = learnt_idx.len() / 2;
        let mut keep = vec![true; self.clauses.len()];
        for &i in &learnt_idx[keep_n..] {
            if self.clauses[i].lits.len() > 2 {
                keep[i] = false;
            }
        }
        let old = std::mem::take(&mut self.clauses);
        self.clauses = old
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect();
        // Level-0 reasons are never inspected by analysis.
        for v in 0..self.num_vars {
            if self.assigns[v] != Value::Unset {
                self.reason[v] = None;
            }
        }
        for w in &mut self.watches {
            w.clear();
        }
        for (i, c) in self.clauses.iter().enumerate() {
            self.watches[c.lits[0].code()].push(Watcher {
                cref: i as u32,
                blocker: c.lits[1],
            });
            self.watches[c.lits[1].code()].push(Watcher {
                cref: i as u32,
                blocker: c.lits[0],
            });
        }
    }

    /// Runs the search to completion. `None` means unsatisfiable.
    pub fn solve(&mut self) -> Option<Assignment> {
        if self.inconsistent || self.propagate().is_some() {
            return None;
        }
        let mut budget = self.restart_first as f64;
        let mut conflicts_since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    return None;
                }
                let (learnt, bt) = self.analyze(confl);
                self.backtrack(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.clauses.len() as u32;
                    self.watches[learnt[0].code()].push(Watcher {
                        cref,
                        blocker: learnt[1],
                    });
                    self.watches[learnt[1].code()].push(Watcher {
                        cref,
                        blocker: learnt[0],
                    });
                    let asserting = learnt[0];
                    self.clauses.push(ClauseData {
                        lits: learnt,
                        learnt: true,
                    });
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= self.var_decay;
            } else if conflicts_since_restart as f64 >= budget {
                self.stats.restarts += 1;
                conflicts_since_restart = 0;
                budget *= self.restart_factor;
                self.backtrack(0);
                let learnts = self.clauses.len() - self.num_original;
                if learnts > self.num_original.max(1000) {
                    self.reduce_learnts();
                }
            } else {
                match self.pick_branch() {
                    None => return Some(self.model()),
                    Some(l) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, None);
                    }
                }
            }
        }
    }

    fn model(&self) -> Assignment {
        Assignment::new(self.assigns.iter().map(|&v| v == Value::True).collect())
    }

    #[cfg(test)]
    fn learnt_count(&self) -> usize {
        self.clauses.iter().filter(|c| c.learnt).count()
    }
}
