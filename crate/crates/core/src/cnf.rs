//! Propositional substrate: variables, literals, clause storage and DIMACS I/O.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Not;

use thiserror::Error;

/// A propositional variable, numbered from 1 as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variables are numbered from 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

/// A signed occurrence of a variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        let v = var.0 as i32;
        Lit(if positive { v } else { -v })
    }

    /// Builds a literal from its DIMACS integer form. Panics on 0.
    pub fn from_dimacs(value: i32) -> Lit {
        assert!(
            value != 0,
            "0 is the DIMACS clause terminator, not a literal"
        );
        Lit(value)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("literal {lit} refers to variable {var} but only {num_vars} are allocated")]
    UnallocatedVar { lit: i32, var: u32, num_vars: u32 },
}

/// A CNF formula under construction. Variables are handed out by a counter, so a
/// fixed construction sequence always yields the same numbering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new() -> CnfFormula {
        CnfFormula::default()
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    pub fn new_lit(&mut self) -> Lit {
        self.new_var().positive()
    }

    pub fn new_lits(&mut self, count: usize) -> Vec<Lit> {
        (0..count).map(|_| self.new_lit()).collect()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Appends a clause. Repeated literals are collapsed (first occurrence kept)
    /// and a clause containing both `l` and `!l` is dropped. An empty slice is
    /// stored as the empty clause, which makes the formula unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), CnfError> {
        let mut clause: Vec<Lit> = Vec::with_capacity(lits.len());
        for &lit in lits {
            let var = lit.var().0;
            if var > self.num_vars {
                return Err(CnfError::UnallocatedVar {
                    lit: lit.0,
                    var,
                    num_vars: self.num_vars,
                });
            }
            if clause.contains(&!lit) {
                return Ok(());
            }
            if !clause.contains(&lit) {
                clause.push(lit);
            }
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Writes the formula in DIMACS CNF.
    pub fn write_dimacs<W: Write>(&self, sink: W) -> io::Result<()> {
        self.write_dimacs_with_comments(&[], sink)
    }

    /// Writes `c ` comment lines, then the `p cnf` header, then one clause per line.
    pub fn write_dimacs_with_comments<W: Write>(
        &self,
        comments: &[String],
        sink: W,
    ) -> io::Result<()> {
        let mut out = io::BufWriter::new(sink);
        for comment in comments {
            for line in comment.lines() {
                writeln!(out, "c {line}")?;
            }
        }
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for clause in &self.clauses {
            for lit in clause {
                write!(out, "{} ", lit.0)?;
            }
            out.write_all(b"0\n")?;
        }
        out.flush()
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("DIMACS output is ASCII")
    }
}

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads a DIMACS CNF file. Clauses may span lines; the header counts are
/// checked against what was read.
pub fn read_dimacs<R: BufRead>(reader: R) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut formula = CnfFormula::new();
    let mut pending: Vec<Lit> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed == "%" {
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(DimacsError::Syntax {
                    line: lineno,
                    message: format!("bad header {trimmed:?}"),
                });
            }
            let parse = |s: &str| {
                s.parse::<u64>().map_err(|_| DimacsError::Syntax {
                    line: lineno,
                    message: format!("bad header count {s:?}"),
                })
            };
            let vars = parse(parts[2])? as u32;
            let clauses = parse(parts[3])? as usize;
            header = Some((vars, clauses));
            for _ in 0..vars {
                formula.new_var();
            }
            continue;
        }
        if header.is_none() {
            return Err(DimacsError::Syntax {
                line: lineno,
                message: "clause before header".into(),
            });
        }
        for tok in trimmed.split_whitespace() {
            let value: i32 = tok.parse().map_err(|_| DimacsError::Syntax {
                line: lineno,
                message: format!("bad literal {tok:?}"),
            })?;
            if value == 0 {
                // Stored verbatim: a reader must not re-simplify what it is given.
                formula.clauses.push(std::mem::take(&mut pending));
            } else {
                let lit = Lit(value);
                if lit.var().0 > formula.num_vars {
                    return Err(DimacsError::Syntax {
                        line: lineno,
                        message: format!("literal {value} exceeds declared variable count"),
                    });
                }
                pending.push(lit);
            }
        }
    }
    let Some((_, declared)) = header else {
        return Err(DimacsError::Syntax {
            line: 0,
            message: "missing p cnf header".into(),
        });
    };
    if !pending.is_empty() {
        formula.clauses.push(pending);
    }
    if formula.clauses.len() != declared {
        return Err(DimacsError::Syntax {
            line: 0,
            message: format!(
                "header declares {declared} clauses, found {}",
                formula.clauses.len()
            ),
        });
    }
    Ok(formula)
}

/// A total truth assignment over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    /// All variables false.
    pub fn new(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![false; num_vars as usize + 1],
        }
    }

    pub fn from_values(values: impl IntoIterator<Item = bool>) -> Assignment {
        let mut all = vec![false];
        all.extend(values);
        Assignment { values: all }
    }

    pub fn num_vars(&self) -> u32 {
        (self.values.len() - 1) as u32
    }

    pub fn value(&self, var: Var) -> bool {
        self.values.get(var.0 as usize).copied().unwrap_or(false)
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        let idx = var.0 as usize;
        if idx >= self.values.len() {
            self.values.resize(idx + 1, false);
        }
        self.values[idx] = value;
    }

    /// Extends (with false) or truncates to exactly `num_vars` variables.
    pub fn resize(&mut self, num_vars: u32) {
        self.values.resize(num_vars as usize + 1, false);
    }

    /// Index of the first clause not satisfied, if any.
    pub fn first_violated(&self, formula: &CnfFormula) -> Option<usize> {
        formula
            .clauses()
            .iter()
            .position(|clause| !clause.iter().any(|&l| self.lit_value(l)))
    }

    pub fn satisfies(&self, formula: &CnfFormula) -> bool {
        self.first_violated(formula).is_none()
    }
}

/// Result of reading a solver's output in the SAT-competition convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverOutput {
    Sat(Assignment),
    Unsat,
    Unknown(String),
}

/// Parses `s SATISFIABLE` / `s UNSATISFIABLE` status lines and `v` value lines.
/// Variables never mentioned in a `v` line are false.
pub fn parse_solver_output(text: &str) -> SolverOutput {
    let mut status: Option<bool> = None;
    let mut assignment = Assignment::new(0);
    let mut terminated = false;
    for line in text.lines() {
        let line = line.trim_end();
        if let Some(rest) = line.strip_prefix("s ") {
            match rest.trim() {
                "SATISFIABLE" => status = Some(true),
                "UNSATISFIABLE" => status = Some(false),
                other => return SolverOutput::Unknown(format!("solver reported status {other:?}")),
            }
        } else if let Some(rest) = line.strip_prefix('v') {
            if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
                continue;
            }
            for tok in rest.split_whitespace() {
                let Ok(value) = tok.parse::<i32>() else {
                    return SolverOutput::Unknown(format!("bad value token {tok:?}"));
                };
                if value == 0 {
                    terminated = true;
                } else {
                    let lit = Lit(value);
                    assignment.set(lit.var(), lit.is_positive());
                }
            }
        }
    }
    match status {
        Some(true) if terminated => SolverOutput::Sat(assignment),
        Some(true) => SolverOutput::Unknown("SATISFIABLE without terminated value lines".into()),
        Some(false) => SolverOutput::Unsat,
        None => SolverOutput::Unknown("no status line in solver output".into()),
    }
}
