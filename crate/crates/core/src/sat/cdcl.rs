//! Conflict-driven clause learning solver.
//!
//! Two watched literals with blockers, first-UIP learning with recursive
//! minimisation, VSIDS with a binary heap, phase saving, Luby restarts and
//! LBD-based deletion of learnt clauses.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Assignment, CnfFormula, Lit};

type CRef = u32;
const NO_REASON: CRef = u32::MAX;

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

/// Internal literal code: `2 * var + negated`, with 0-based variables.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct L(u32);

impl L {
    fn from_lit(lit: Lit) -> L {
        L(2 * (lit.var().index() - 1) + u32::from(!lit.is_positive()))
    }
    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }
    fn neg(self) -> L {
        L(self.0 ^ 1)
    }
    fn sign(self) -> bool {
        self.0 & 1 == 1
    }
    fn idx(self) -> usize {
        self.0 as usize
    }
}

struct Clause {
    lits: Vec<L>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watch {
    cref: CRef,
    blocker: L,
}

/// Max-heap of variables keyed by activity.
struct VarHeap {
    heap: Vec<u32>,
    index: Vec<i32>,
}

impl VarHeap {
    fn new(n: usize) -> VarHeap {
        VarHeap {
            heap: Vec::with_capacity(n),
            index: vec![-1; n],
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.index[v] >= 0
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.index[self.heap[i] as usize] = i as i32;
            i = p;
        }
        self.heap[i] = v;
        self.index[v as usize] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.index[self.heap[i] as usize] = i as i32;
            i = c;
        }
        self.heap[i] = v;
        self.index[v as usize] = i as i32;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v as u32);
        let i = self.heap.len() - 1;
        self.index[v] = i as i32;
        self.up(i, act);
    }

    fn bump(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.up(self.index[v] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.index[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last as usize] = 0;
            self.down(0, act);
        }
        Some(top as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CdclOutcome {
    Sat(Assignment),
    Unsat,
    Timeout,
}

#[derive(Debug, Clone, Default)]
pub struct CdclStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnts_deleted: u64,
}

pub struct Cdcl {
    num_vars: usize,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<CRef>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    trail: Vec<L>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<u8>,
    learnts: Vec<CRef>,
    ok: bool,
    pub stats: CdclStats,
}

const VAR_DECAY: f64 = 0.95;
const CLA_DECAY: f64 = 0.999;
const RESTART_UNIT: u64 = 100;
const REDUCE_FIRST: u64 = 2000;
const REDUCE_INC: u64 = 300;

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

impl Cdcl {
    /// Loads a formula. The seed perturbs the initial variable order so that
    /// different seeds explore different parts of the search space.
    pub fn new(formula: &CnfFormula, seed: u64) -> Cdcl {
        let n = formula.num_vars() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let activity: Vec<f64> = (0..n)
            .map(|_| {
                if seed == 0 {
                    0.0
                } else {
                    rng.gen::<f64>() * 1e-5
                }
            })
            .collect();
        let mut s = Cdcl {
            num_vars: n,
            clauses: Vec::with_capacity(formula.num_clauses()),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            polarity: vec![true; n],
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::new(n),
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![0; n],
            learnts: Vec::new(),
            ok: true,
            stats: CdclStats::default(),
        };
        for v in 0..n {
            s.heap.insert(v, &s.activity);
        }
        for clause in formula.clauses() {
            let lits: Vec<L> = clause.iter().map(|&l| L::from_lit(l)).collect();
            if !s.add_input_clause(lits) {
                break;
            }
        }
        s
    }

    fn value(&self, l: L) -> i8 {
        let a = self.assigns[l.var()];
        if l.sign() {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: L, reason: CRef) {
        let v = l.var();
        self.assigns[v] = if l.sign() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn add_input_clause(&mut self, mut lits: Vec<L>) -> bool {
        if !self.ok {
            return false;
        }
        lits.sort_by_key(|l| l.0);
        lits.dedup();
        let mut kept = Vec::with_capacity(lits.len());
        for (i, &l) in lits.iter().enumerate() {
            if i + 1 < lits.len() && lits[i + 1] == l.neg() {
                return true;
            }
            match self.value(l) {
                TRUE => return true,
                FALSE => {}
                _ => kept.push(l),
            }
        }
        match kept.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(kept[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(kept, false, 0);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<L>, learnt: bool, lbd: u32) -> CRef {
        let cref = self.clauses.len() as CRef;
        self.watches[lits[0].neg().idx()].push(Watch {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].neg().idx()].push(Watch {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            lbd,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    /// Unit propagation; returns a conflicting clause.
    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p.neg();
            let mut ws = std::mem::take(&mut self.watches[p.idx()]);
            let mut i = 0;
            let mut j = 0;
            'watches: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                let clause = &mut self.clauses[cref as usize];
                if clause.deleted {
                    continue;
                }
                if clause.lits[0] == false_lit {
                    clause.lits.swap(0, 1);
                }
                let first = clause.lits[0];
                let nw = Watch {
                    cref,
                    blocker: first,
                };
                if first != w.blocker && self.value(first) == TRUE {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let clause = &mut self.clauses[cref as usize];
                for k in 2..clause.lits.len() {
                    let l = clause.lits[k];
                    let a = self.assigns[l.var()];
                    let val = if l.sign() { -a } else { a };
                    if val != FALSE {
                        clause.lits.swap(1, k);
                        let watch_on = clause.lits[1].neg().idx();
                        self.watches[watch_on].push(nw);
                        continue 'watches;
                    }
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == FALSE {
                    conflict = Some(cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, cref);
                }
            }
            ws.truncate(j);
            let slot = &mut self.watches[p.idx()];
            // Anything pushed onto this list while it was taken belongs to other
            // clauses and must be kept.
            ws.append(slot);
            *slot = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bump(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut conflict: CRef) -> (Vec<L>, u32) {
        let mut learnt = vec![L(0)];
        let mut pending = 0;
        let mut p: Option<L> = None;
        let mut index = self.trail.len();
        loop {
            self.bump_clause(conflict);
            let lits = self.clauses[conflict as usize].lits.clone();
            let start = usize::from(p.is_some());
            for &q in &lits[start..] {
                let v = q.var();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    self.seen[v] = 1;
                    self.bump_var(v);
                    if self.level[v] >= self.decision_level() {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] != 0 {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            conflict = self.reason[lit.var()];
            self.seen[lit.var()] = 0;
            pending -= 1;
            if pending == 0 {
                break;
            }
        }
        learnt[0] = p.unwrap().neg();

        // recursive minimisation
        let abstract_levels = learnt[1..]
            .iter()
            .fold(0u32, |acc, l| acc | self.abstract_level(l.var()));
        let mut to_clear: Vec<usize> = learnt.iter().map(|l| l.var()).collect();
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            if self.reason[l.var()] == NO_REASON
                || !self.redundant(l, abstract_levels, &mut to_clear)
            {
                kept.push(l);
            }
        }
        for v in to_clear {
            self.seen[v] = 0;
        }
        let mut learnt = kept;

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var()]
        };
        (learnt, backjump)
    }

    fn redundant(&mut self, p: L, abstract_levels: u32, to_clear: &mut Vec<usize>) -> bool {
        let mut stack = vec![p];
        let top = to_clear.len();
        while let Some(q) = stack.pop() {
            let cref = self.reason[q.var()];
            let len = self.clauses[cref as usize].lits.len();
            for k in 1..len {
                let l = self.clauses[cref as usize].lits[k];
                let v = l.var();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    if self.reason[v] != NO_REASON
                        && (self.abstract_level(v) & abstract_levels) != 0
                    {
                        self.seen[v] = 1;
                        stack.push(l);
                        to_clear.push(v);
                    } else {
                        for &u in &to_clear[top..] {
                            self.seen[u] = 0;
                        }
                        to_clear.truncate(top);
                        return false;
                    }
                }
            }
        }
        true
    }

    fn lbd(&self, lits: &[L]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[l.var()]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var();
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.polarity[v] = l.sign();
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<L> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(L(2 * v as u32 + u32::from(self.polarity[v])));
            }
        }
        None
    }

    fn locked(&self, cref: CRef) -> bool {
        let c = &self.clauses[cref as usize];
        let v = c.lits[0].var();
        self.reason[v] == cref && self.value(c.lits[0]) == TRUE
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<CRef> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| !self.clauses[c as usize].deleted)
            .collect();
        cands.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            cb.lbd
                .cmp(&ca.lbd)
                .then(ca.activity.partial_cmp(&cb.activity).unwrap())
        });
        let limit = cands.len() / 2;
        let mut removed = 0;
        for &c in &cands {
            if removed >= limit {
                break;
            }
            let clause = &self.clauses[c as usize];
            if clause.lbd <= 2 || clause.lits.len() <= 2 || self.locked(c) {
                continue;
            }
            let clause = &mut self.clauses[c as usize];
            clause.deleted = true;
            clause.lits = Vec::new();
            removed += 1;
        }
        self.stats.learnts_deleted += removed as u64;
        let clauses = &self.clauses;
        self.learnts.retain(|&c| !clauses[c as usize].deleted);
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
    }

    /// Runs the search until a verdict or the deadline.
    pub fn solve(&mut self, deadline: Option<Instant>) -> CdclOutcome {
        if !self.ok {
            return CdclOutcome::Unsat;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return CdclOutcome::Unsat;
        }
        let mut restart_round = 0u64;
        let mut next_reduce = REDUCE_FIRST;
        let mut reduces = 0u64;
        loop {
            let budget = (luby(2.0, restart_round) * RESTART_UNIT as f64) as u64;
            restart_round += 1;
            let mut conflicts_here = 0u64;
            loop {
                if let Some(conflict) = self.propagate() {
                    self.stats.conflicts += 1;
                    conflicts_here += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return CdclOutcome::Unsat;
                    }
                    let (learnt, backjump) = self.analyze(conflict);
                    self.cancel_until(backjump);
                    if learnt.len() == 1 {
                        self.enqueue(learnt[0], NO_REASON);
                    } else {
                        let lbd = self.lbd(&learnt);
                        let asserting = learnt[0];
                        let cref = self.attach(learnt, true, lbd);
                        self.bump_clause(cref);
                        self.enqueue(asserting, cref);
                    }
                    self.var_inc /= VAR_DECAY;
                    self.cla_inc /= CLA_DECAY;
                    if self.stats.conflicts.is_multiple_of(512) {
                        if let Some(d) = deadline {
                            if Instant::now() >= d {
                                self.cancel_until(0);
                                return CdclOutcome::Timeout;
                            }
                        }
                    }
                } else {
                    if conflicts_here >= budget {
                        self.stats.restarts += 1;
                        self.cancel_until(0);
                        break;
                    }
                    if self.stats.conflicts >= next_reduce {
                        reduces += 1;
                        next_reduce = self.stats.conflicts + REDUCE_FIRST + reduces * REDUCE_INC;
                        self.reduce_db();
                    }
                    match self.pick_branch() {
                        None => return CdclOutcome::Sat(self.model()),
                        Some(l) => {
                            self.stats.decisions += 1;
                            if self.stats.decisions.is_multiple_of(4096) {
                                if let Some(d) = deadline {
                                    if Instant::now() >= d {
                                        self.cancel_until(0);
                                        return CdclOutcome::Timeout;
                                    }
                                }
                            }
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(l, NO_REASON);
                        }
                    }
                }
            }
        }
    }

    fn model(&self) -> Assignment {
        Assignment::from_values(self.assigns.iter().map(|&a| a == TRUE))
    }

    /// Level-0 values after loading the clauses plus `units`, or `None` if
    /// propagation alone reaches a conflict.
    pub fn root_values(&mut self, units: &[Lit]) -> Option<Vec<Option<bool>>> {
        for &u in units {
            if !self.add_input_clause(vec![L::from_lit(u)]) {
                return None;
            }
        }
        if !self.ok || self.propagate().is_some() {
            self.ok = false;
            return None;
        }
        Some(
            self.assigns
                .iter()
                .map(|&a| match a {
                    TRUE => Some(true),
                    FALSE => Some(false),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }
}

/// Propagates `units` over `formula` at the root; `None` means a conflict.
/// Entry `v - 1` holds the value of variable `v`.
pub fn unit_propagate(formula: &CnfFormula, units: &[Lit]) -> Option<Vec<Option<bool>>> {
    let mut s = Cdcl::new(formula, 0);
    s.root_values(units)
}

/// Convenience wrapper used by tests and the driver.
pub fn solve_formula(formula: &CnfFormula, seed: u64, deadline: Option<Instant>) -> CdclOutcome {
    let mut s = Cdcl::new(formula, seed);
    match s.solve(deadline) {
        CdclOutcome::Sat(mut a) => {
            a.resize(formula.num_vars());
            CdclOutcome::Sat(a)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::satisfiable;

    fn formula(num_vars: u32, clauses: &[Vec<i32>]) -> CnfFormula {
        let mut f = CnfFormula::new();
        for _ in 0..num_vars {
            f.new_var();
        }
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&x| Lit::from_dimacs(x)).collect();
            f.add_clause(&lits).unwrap();
        }
        f
    }

    #[test]
    fn trivial_verdicts() {
        assert_eq!(
            solve_formula(&formula(1, &[vec![1], vec![-1]]), 0, None),
            CdclOutcome::Unsat
        );
        let f = formula(2, &[vec![1, 2]]);
        let CdclOutcome::Sat(a) = solve_formula(&f, 0, None) else {
            panic!()
        };
        assert!(a.satisfies(&f));
        assert_eq!(
            solve_formula(&formula(0, &[]), 0, None),
            CdclOutcome::Sat(Assignment::new(0))
        );
        assert_eq!(
            solve_formula(&formula(2, &[vec![]]), 0, None),
            CdclOutcome::Unsat
        );
    }

    #[test]
    fn luby_sequence() {
        let seq: Vec<f64> = (0..15).map(|i| luby(2.0, i)).collect();
        assert_eq!(
            seq,
            vec![1., 1., 2., 1., 1., 2., 4., 1., 1., 2., 1., 1., 2., 4., 8.]
        );
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 6 pigeons, 5 holes
        let (p, h) = (6, 5);
        let var = |i: i32, j: i32| i * h + j + 1;
        let mut clauses = Vec::new();
        for i in 0..p {
            clauses.push((0..h).map(|j| var(i, j)).collect());
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    clauses.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        let f = formula((p * h) as u32, &clauses);
        assert_eq!(solve_formula(&f, 3, None), CdclOutcome::Unsat);
    }

    #[test]
    fn random_3cnf_matches_enumeration() {
        for seed in 0..500u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 20;
            let m = rng.gen_range(60..110);
            let clauses: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.gen_range(1..=n);
                            if rng.gen_bool(0.5) {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let f = formula(n as u32, &clauses);
            let expect = satisfiable(&f);
            match solve_formula(&f, seed, None) {
                CdclOutcome::Sat(a) => {
                    assert!(expect, "seed {seed}: solver SAT, oracle UNSAT");
                    assert!(a.satisfies(&f));
                }
                CdclOutcome::Unsat => assert!(!expect, "seed {seed}: solver UNSAT, oracle SAT"),
                CdclOutcome::Timeout => unreachable!(),
            }
        }
    }

    #[test]
    fn root_propagation() {
        let f = formula(3, &[vec![-1, 2], vec![-2, 3]]);
        let vals = unit_propagate(&f, &[Lit::from_dimacs(1)]).unwrap();
        assert_eq!(vals, vec![Some(true), Some(true), Some(true)]);
        assert!(unit_propagate(&f, &[Lit::from_dimacs(1), Lit::from_dimacs(-3)]).is_none());
    }
}
