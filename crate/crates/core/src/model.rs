//! The LCM model of the puzzle as CNF.
//!
//! For a bound `maxL`, the model looks for digits and a common multiple
//! `L = l_1 <= maxL` of the divisors `yz_i = 10 y_i + z_i` with
//! `sum x_i * (L / yz_i) = L`. Constraint groups are emitted in a fixed order
//! (digits and counting, symmetry breaking and the redundant bound, the
//! quotients, the weighted sum) so the same instance always yields the same
//! DIMACS bytes.

use std::fmt::Write as _;
use std::io::{self, BufRead};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula, Lit};
use crate::encode::{
    binary_array_sum_eq, binary_eq_reif, binary_times, bool_array_sum_eq, channel_int2binary,
    int_array_lin_eq, int_array_max, int_array_min, int_array_sum_eq, int_arrays_lex, int_eq_reif,
    int_leq, new_binary, new_int, DecodeError, EncodeError, IntVar,
};
use crate::verify::{count_cap, Solution, Triple};

/// Instances at or above this size have no known solution.
pub const KNOWN_UNSOLVABLE_FROM: usize = 45;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("n must be at least 1")]
    ZeroFractions,
    #[error("maxL must be at least 11, got {0}")]
    MaxLTooSmall(u64),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("decoded {what} disagree: {detail}")]
    Inconsistent { what: &'static str, detail: String },
    #[error("variable map line {line}: {message}")]
    Map { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PuzzleInstance {
    n: usize,
    max_l: u64,
}

impl PuzzleInstance {
    pub fn new(n: usize, max_l: u64) -> Result<PuzzleInstance, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroFractions);
        }
        if max_l < 11 {
            return Err(ModelError::MaxLTooSmall(max_l));
        }
        Ok(PuzzleInstance { n, max_l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_l(&self) -> u64 {
        self.max_l
    }

    /// Upper bound of every quotient `d_i = L / yz_i`.
    pub fn max_quotient(&self) -> u64 {
        self.max_l.div_ceil(11)
    }
}

/// `3n` digit slots can only cover all nine digits when `n >= 3`.
pub fn counting_feasible(n: usize) -> bool {
    3 * n >= 9
}

/// Variables of one encoded instance. Vectors are 0-based: `x[0]` is `x_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelVars {
    pub x: Vec<IntVar>,
    pub y: Vec<IntVar>,
    pub z: Vec<IntVar>,
    pub yz: Vec<IntVar>,
    /// `dig[k][j-1] <-> slot_k = j` over the slots `[x.., y.., z..]`.
    pub dig: Vec<[Lit; 9]>,
    /// `s[j-1]` counts the occurrences of digit `j`.
    pub s: Vec<IntVar>,
    pub r: IntVar,
    pub min: IntVar,
    pub max: IntVar,
    pub d: Vec<IntVar>,
    pub ell: Vec<IntVar>,
    pub t: Vec<IntVar>,
    pub a: Vec<Lit>,
    pub b: Vec<Lit>,
    pub c: Vec<Lit>,
}

pub fn build_model(instance: &PuzzleInstance) -> Result<(CnfFormula, ModelVars), ModelError> {
    let n = instance.n;
    let mut f = CnfFormula::new();

    // Digits, divisors and digit counts.
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        x.push(new_int(&mut f, 1, 9)?);
        y.push(new_int(&mut f, 1, 9)?);
        z.push(new_int(&mut f, 1, 9)?);
    }
    let mut yz = Vec::with_capacity(n);
    for _ in 0..n {
        yz.push(new_int(&mut f, 11, 99)?);
    }
    for v in x.iter_mut().chain(yz.iter_mut()) {
        channel_int2binary(&mut f, v)?;
    }
    for i in 0..n {
        int_array_lin_eq(&mut f, &[10, 1], &[&y[i], &z[i]], &yz[i])?;
    }
    let slots: Vec<&IntVar> = x.iter().chain(&y).chain(&z).collect();
    let mut dig = Vec::with_capacity(slots.len());
    for slot in &slots {
        let mut row = [Lit::from_dimacs(1); 9];
        for (j, lit) in row.iter_mut().enumerate() {
            *lit = f.new_lit();
            int_eq_reif(&mut f, slot, j as i64 + 1, *lit)?;
        }
        dig.push(row);
    }
    let cap = count_cap(n) as i64;
    let mut s = Vec::with_capacity(9);
    for j in 0..9 {
        let sj = new_int(&mut f, 1, cap)?;
        let column: Vec<Lit> = dig.iter().map(|row| row[j]).collect();
        bool_array_sum_eq(&mut f, &column, &sj)?;
        s.push(sj);
    }

    // Symmetry breaking and the redundant bound min yz <= sum x <= max yz.
    for i in 0..n.saturating_sub(1) {
        int_arrays_lex(
            &mut f,
            &[&y[i], &z[i], &x[i]],
            &[&y[i + 1], &z[i + 1], &x[i + 1]],
        )?;
    }
    let r = new_int(&mut f, n as i64, 9 * n as i64)?;
    let xs: Vec<&IntVar> = x.iter().collect();
    int_array_sum_eq(&mut f, &xs, &r)?;
    let yzs: Vec<&IntVar> = yz.iter().collect();
    let min = new_int(&mut f, 11, 99)?;
    let max = new_int(&mut f, 11, 99)?;
    int_array_min(&mut f, &yzs, &min)?;
    int_array_max(&mut f, &yzs, &max)?;
    int_leq(&mut f, &min, &r)?;
    int_leq(&mut f, &r, &max)?;

    // l_i = yz_i * d_i, and every l_i agrees with l_1 (equal divisors share
    // their quotient instead).
    let max_l = instance.max_l as i64;
    let max_d = instance.max_quotient() as i64;
    let mut ell = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for yzi in &yz {
        let li = new_binary(&mut f, 1, max_l)?;
        let di = new_binary(&mut f, 1, max_d)?;
        binary_times(&mut f, yzi, &di, &li)?;
        ell.push(li);
        d.push(di);
    }
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n.saturating_sub(1) {
        let ai = f.new_lit();
        let bi = f.new_lit();
        let ci = f.new_lit();
        binary_eq_reif(&mut f, &yz[i], &yz[i + 1], ai)?;
        binary_eq_reif(&mut f, &d[i], &d[i + 1], bi)?;
        binary_eq_reif(&mut f, &ell[i + 1], &ell[0], ci)?;
        f.add_clause(&[!ai, bi]).map_err(EncodeError::from)?;
        f.add_clause(&[ai, ci]).map_err(EncodeError::from)?;
        a.push(ai);
        b.push(bi);
        c.push(ci);
    }

    // sum x_i * d_i = l_1
    let mut t = Vec::with_capacity(n);
    for i in 0..n {
        let ti = new_binary(&mut f, 1, 9 * max_d)?;
        binary_times(&mut f, &x[i], &d[i], &ti)?;
        t.push(ti);
    }
    let ts: Vec<&IntVar> = t.iter().collect();
    binary_array_sum_eq(&mut f, &ts, &ell[0])?;

    let vars = ModelVars {
        x,
        y,
        z,
        yz,
        dig,
        s,
        r,
        min,
        max,
        d,
        ell,
        t,
        a,
        b,
        c,
    };
    Ok((f, vars))
}

/// Reads the digits and `L = l_1` off a satisfying assignment, checking that
/// both views of every channelled variable agree.
pub fn decode_solution(
    assignment: &Assignment,
    vars: &ModelVars,
    instance: &PuzzleInstance,
) -> Result<Solution, ModelError> {
    let digit = |v: &IntVar| -> Result<u8, ModelError> { Ok(v.decode(assignment)? as u8) };
    let mut triples = Vec::with_capacity(instance.n);
    for i in 0..instance.n {
        let t = Triple::new(digit(&vars.x[i])?, digit(&vars.y[i])?, digit(&vars.z[i])?);
        let yz = vars.yz[i].decode(assignment)?;
        if yz != i64::from(t.divisor()) {
            return Err(ModelError::Inconsistent {
                what: "divisor views",
                detail: format!("fraction {}: yz = {yz}, digits {}{}", i + 1, t.y, t.z),
            });
        }
        triples.push(t);
    }
    let l = vars.ell[0].decode(assignment)?;
    Ok(Solution {
        n: instance.n,
        triples,
        l: Some(l as u64),
    })
}

/// Unit literals fixing every view of `var` to `value`.
fn fix(var: &IntVar, value: i64, out: &mut Vec<Lit>) {
    if let Some(order) = var.unary_view() {
        for (k, &lit) in order.iter().enumerate() {
            let threshold = var.lb() + k as i64 + 1;
            out.push(if value >= threshold { lit } else { !lit });
        }
    }
    if let Some(bits) = var.binary_view() {
        for (k, &lit) in bits.iter().enumerate() {
            out.push(if (value >> k) & 1 == 1 { lit } else { !lit });
        }
    }
}

/// Units fixing digits, divisors, `d_i = L / yz_i`, `l_i = L` and
/// `t_i = x_i d_i` to the values of a known solution with reported `L`.
/// Returns `None` when `L` is missing or not a multiple of some divisor.
pub fn witness_units(vars: &ModelVars, sol: &Solution) -> Option<Vec<Lit>> {
    let l = sol.l? as i64;
    let mut units = Vec::new();
    for (i, t) in sol.triples.iter().enumerate() {
        let divisor = i64::from(t.divisor());
        if l % divisor != 0 {
            return None;
        }
        let q = l / divisor;
        fix(&vars.x[i], i64::from(t.x), &mut units);
        fix(&vars.y[i], i64::from(t.y), &mut units);
        fix(&vars.z[i], i64::from(t.z), &mut units);
        fix(&vars.yz[i], divisor, &mut units);
        fix(&vars.d[i], q, &mut units);
        fix(&vars.ell[i], l, &mut units);
        fix(&vars.t[i], i64::from(t.x) * q, &mut units);
    }
    Some(units)
}

fn push_int(out: &mut String, name: &str, index: &str, v: &IntVar) {
    write!(out, "{name} {index} {} {}", v.lb(), v.ub()).unwrap();
    if let Some(u) = v.unary_view() {
        out.push_str(" u");
        for l in u {
            write!(out, " {}", l.to_dimacs()).unwrap();
        }
    }
    if let Some(b) = v.binary_view() {
        out.push_str(" b");
        for l in b {
            write!(out, " {}", l.to_dimacs()).unwrap();
        }
    }
    out.push('\n');
}

const MAP_MAGIC: &str = "nfrac-map";

impl ModelVars {
    /// Text sidecar with one line per symbol: `name index lb ub [u lits] [b lits]`
    /// for integers, `name index l lit` for literals. `dig` is indexed `k:j`.
    pub fn to_map_string(&self, instance: &PuzzleInstance) -> String {
        let mut out = format!("{MAP_MAGIC} 1 {} {}\n", instance.n, instance.max_l);
        let groups: [(&str, &Vec<IntVar>); 4] = [
            ("x", &self.x),
            ("y", &self.y),
            ("z", &self.z),
            ("yz", &self.yz),
        ];
        for (name, vars) in groups {
            for (i, v) in vars.iter().enumerate() {
                push_int(&mut out, name, &(i + 1).to_string(), v);
            }
        }
        for (k, row) in self.dig.iter().enumerate() {
            for (j, lit) in row.iter().enumerate() {
                writeln!(out, "dig {}:{} l {}", k + 1, j + 1, lit.to_dimacs()).unwrap();
            }
        }
        for (j, v) in self.s.iter().enumerate() {
            push_int(&mut out, "s", &(j + 1).to_string(), v);
        }
        push_int(&mut out, "r", "1", &self.r);
        push_int(&mut out, "min", "1", &self.min);
        push_int(&mut out, "max", "1", &self.max);
        let groups: [(&str, &Vec<IntVar>); 3] =
            [("d", &self.d), ("ell", &self.ell), ("t", &self.t)];
        for (name, vars) in groups {
            for (i, v) in vars.iter().enumerate() {
                push_int(&mut out, name, &(i + 1).to_string(), v);
            }
        }
        for (name, lits) in [("a", &self.a), ("b", &self.b), ("c", &self.c)] {
            for (i, lit) in lits.iter().enumerate() {
                writeln!(out, "{name} {} l {}", i + 1, lit.to_dimacs()).unwrap();
            }
        }
        out
    }

    /// Parses a sidecar written by [`ModelVars::to_map_string`].
    pub fn read_map<R: BufRead>(reader: R) -> Result<(PuzzleInstance, ModelVars), ModelError> {
        let mut lines = reader.lines().enumerate();
        let bad = |line: usize, message: String| ModelError::Map { line, message };
        let header = match lines.next() {
            Some((_, l)) => l?,
            None => return Err(bad(1, "empty file".into())),
        };
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != MAP_MAGIC || h[1] != "1" {
            return Err(bad(1, format!("unrecognised header {header:?}")));
        }
        let n: usize = h[2].parse().map_err(|_| bad(1, "bad n".into()))?;
        let max_l: u64 = h[3].parse().map_err(|_| bad(1, "bad maxL".into()))?;
        let instance = PuzzleInstance::new(n, max_l)?;

        let mut ints: std::collections::HashMap<(String, String), IntVar> = Default::default();
        let mut lits: std::collections::HashMap<(String, String), Lit> = Default::default();
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.is_empty() {
                continue;
            }
            if tok.len() < 3 {
                return Err(bad(lineno, "too few fields".into()));
            }
            let key = (tok[0].to_string(), tok[1].to_string());
            let lit = |s: &str| -> Result<Lit, ModelError> {
                match s.parse::<i32>() {
                    Ok(v) if v != 0 => Ok(Lit::from_dimacs(v)),
                    _ => Err(bad(lineno, format!("bad literal {s:?}"))),
                }
            };
            if tok[2] == "l" {
                if tok.len() != 4 {
                    return Err(bad(lineno, "literal lines have 4 fields".into()));
                }
                lits.insert(key, lit(tok[3])?);
                continue;
            }
            let lb: i64 = tok[2]
                .parse()
                .map_err(|_| bad(lineno, "bad lower bound".into()))?;
            let ub: i64 = tok
                .get(3)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(lineno, "bad upper bound".into()))?;
            let (mut unary, mut binary): (Option<Vec<Lit>>, Option<Vec<Lit>>) = (None, None);
            let mut in_binary = None;
            for s in &tok[4..] {
                match (*s, in_binary) {
                    ("u", None) => {
                        unary = Some(Vec::new());
                        in_binary = Some(false);
                    }
                    ("u", Some(false)) | ("b", Some(true)) => {
                        return Err(bad(lineno, "repeated view marker".into()));
                    }
                    ("b", _) => {
                        binary = Some(Vec::new());
                        in_binary = Some(true);
                    }
                    (s, Some(false)) => unary.as_mut().unwrap().push(lit(s)?),
                    (s, Some(true)) => binary.as_mut().unwrap().push(lit(s)?),
                    (_, None) => return Err(bad(lineno, "literal outside a view".into())),
                }
            }
            let var = IntVar::from_views(lb, ub, unary, binary)
                .map_err(|e| bad(lineno, e.to_string()))?;
            ints.insert(key, var);
        }

        let missing = |name: &str, index: String| ModelError::Map {
            line: 0,
            message: format!("missing {name} {index}"),
        };
        let mut int_group = |name: &str, count: usize| -> Result<Vec<IntVar>, ModelError> {
            (1..=count)
                .map(|i| {
                    ints.remove(&(name.to_string(), i.to_string()))
                        .ok_or_else(|| missing(name, i.to_string()))
                })
                .collect()
        };
        let x = int_group("x", n)?;
        let y = int_group("y", n)?;
        let z = int_group("z", n)?;
        let yz = int_group("yz", n)?;
        let s = int_group("s", 9)?;
        let r = int_group("r", 1)?.remove(0);
        let min = int_group("min", 1)?.remove(0);
        let max = int_group("max", 1)?.remove(0);
        let d = int_group("d", n)?;
        let ell = int_group("ell", n)?;
        let t = int_group("t", n)?;
        let mut lit_group = |name: &str, count: usize| -> Result<Vec<Lit>, ModelError> {
            (1..=count)
                .map(|i| {
                    lits.remove(&(name.to_string(), i.to_string()))
                        .ok_or_else(|| missing(name, i.to_string()))
                })
                .collect()
        };
        let a = lit_group("a", n - 1)?;
        let b = lit_group("b", n - 1)?;
        let c = lit_group("c", n - 1)?;
        let mut dig = Vec::with_capacity(3 * n);
        for k in 1..=3 * n {
            let mut row = [Lit::from_dimacs(1); 9];
            for (j, slot) in row.iter_mut().enumerate() {
                let index = format!("{k}:{}", j + 1);
                *slot = lits
                    .remove(&("dig".to_string(), index.clone()))
                    .ok_or_else(|| missing("dig", index))?;
            }
            dig.push(row);
        }
        let vars = ModelVars {
            x,
            y,
            z,
            yz,
            dig,
            s,
            r,
            min,
            max,
            d,
            ell,
            t,
            a,
            b,
            c,
        };
        Ok((instance, vars))
    }
}

/// Hex SHA-256 of the sidecar text, recorded in the DIMACS header comments so
/// a map can be matched to its CNF.
pub fn map_digest(map_text: &str) -> String {
    hex::encode(Sha256::digest(map_text.as_bytes()))
}

/// Comment lines written above the DIMACS header.
pub fn dimacs_comments(instance: &PuzzleInstance, map_text: &str) -> Vec<String> {
    vec![
        format!("n-fractions n={} maxL={}", instance.n, instance.max_l),
        format!("map-sha256 {}", map_digest(map_text)),
    ]
}
