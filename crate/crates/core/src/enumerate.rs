//! Exhaustive model enumeration for small formulas.
//!
//! A plain backtracking search with unit propagation over occurrence lists,
//! kept deliberately separate from the CDCL solver so it can serve as an
//! independent oracle for the encoders and for the solver itself.

use std::collections::BTreeSet;

use crate::cnf::{Assignment, CnfFormula, Lit, Var};

struct Enumerator<'a> {
    clauses: &'a [Vec<Lit>],
    /// occurrences[code(l)] = clauses containing l
    occurrences: Vec<Vec<usize>>,
    values: Vec<Option<bool>>,
    trail: Vec<Var>,
}

fn code(lit: Lit) -> usize {
    let v = lit.var().index() as usize;
    2 * v + usize::from(!lit.is_positive())
}

impl<'a> Enumerator<'a> {
    fn new(formula: &'a CnfFormula) -> Enumerator<'a> {
        let n = formula.num_vars() as usize;
        let mut occurrences = vec![Vec::new(); 2 * n + 2];
        for (ci, clause) in formula.clauses().iter().enumerate() {
            for &l in clause {
                occurrences[code(l)].push(ci);
            }
        }
        Enumerator {
            clauses: formula.clauses(),
            occurrences,
            values: vec![None; n + 1],
            trail: Vec::new(),
        }
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.values[l.var().index() as usize].map(|v| v == l.is_positive())
    }

    fn assign(&mut self, l: Lit) {
        self.values[l.var().index() as usize] = Some(l.is_positive());
        self.trail.push(l.var());
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let v = self.trail.pop().unwrap();
            self.values[v.index() as usize] = None;
        }
    }

    /// Propagates from trail position `from`; false on conflict.
    fn propagate(&mut self, mut from: usize) -> bool {
        while from < self.trail.len() {
            let var = self.trail[from];
            from += 1;
            let value = self.values[var.index() as usize].unwrap();
            let falsified = Lit::new(var, !value);
            for k in 0..self.occurrences[code(falsified)].len() {
                let ci = self.occurrences[code(falsified)][k];
                let mut unassigned = None;
                let mut open = 0;
                let mut satisfied = false;
                for &l in &self.clauses[ci] {
                    match self.lit_value(l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match open {
                    0 => return false,
                    1 => self.assign(unassigned.unwrap()),
                    _ => {}
                }
            }
        }
        true
    }

    fn search<F: FnMut(&Assignment) -> bool>(&mut self, visit: &mut F) -> bool {
        let Some(next) = (1..self.values.len()).find(|&v| self.values[v].is_none()) else {
            let assignment = Assignment::from_values(self.values[1..].iter().map(|v| v.unwrap()));
            return visit(&assignment);
        };
        let var = Var::new(next as u32);
        for value in [false, true] {
            let mark = self.trail.len();
            self.assign(Lit::new(var, value));
            if self.propagate(mark) && !self.search(visit) {
                self.undo_to(mark);
                return false;
            }
            self.undo_to(mark);
        }
        true
    }
}

/// Calls `visit` on every total model; stop early by returning `false`.
pub fn for_each_model<F: FnMut(&Assignment) -> bool>(formula: &CnfFormula, mut visit: F) {
    if formula.clauses().iter().any(|c| c.is_empty()) {
        return;
    }
    let mut e = Enumerator::new(formula);
    for clause in formula.clauses() {
        if clause.len() == 1 {
            match e.lit_value(clause[0]) {
                Some(true) => {}
                Some(false) => return,
                None => e.assign(clause[0]),
            }
        }
    }
    if !e.propagate(0) {
        return;
    }
    e.search(&mut visit);
}

pub fn all_models(formula: &CnfFormula) -> Vec<Assignment> {
    let mut out = Vec::new();
    for_each_model(formula, |a| {
        out.push(a.clone());
        true
    });
    out
}

pub fn count_models(formula: &CnfFormula) -> u64 {
    let mut n = 0;
    for_each_model(formula, |_| {
        n += 1;
        true
    });
    n
}

pub fn satisfiable(formula: &CnfFormula) -> bool {
    let mut found = false;
    for_each_model(formula, |_| {
        found = true;
        false
    });
    found
}

/// Distinct images of all models under `decode`, sorted.
pub fn project<F: FnMut(&Assignment) -> Vec<i64>>(
    formula: &CnfFormula,
    mut decode: F,
) -> Vec<Vec<i64>> {
    let mut seen = BTreeSet::new();
    for_each_model(formula, |a| {
        seen.insert(decode(a));
        true
    });
    seen.into_iter().collect()
}
