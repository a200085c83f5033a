//! Encoders over order-encoded integers.

use super::{emit, equate, new_int, Bit, EncodeError, IntVar, Result};
use crate::cnf::{CnfFormula, Lit};

const MAX_SUPPORT_TUPLES: u128 = 4_000_000;

/// `sum(coeffs[i] * vars[i]) = result` for positive coefficients.
///
/// Every tuple of thresholds `(u_1..u_k)` yields two clauses:
/// `/\ x_i >= u_i -> result >= sum c_i u_i` and
/// `/\ x_i <= u_i -> result <= sum c_i u_i`. The cost is the product of the
/// domain sizes, which is fine for `10*y + z = yz` and for the pairwise nodes
/// of an adder tree.
pub fn int_array_lin_eq(
    formula: &mut CnfFormula,
    coeffs: &[i64],
    vars: &[&IntVar],
    result: &IntVar,
) -> Result<()> {
    if coeffs.len() != vars.len() {
        return Err(EncodeError::LengthMismatch {
            what: "int_array_lin_eq",
            left: coeffs.len(),
            right: vars.len(),
        });
    }
    if coeffs.iter().any(|&c| c <= 0) {
        return Err(EncodeError::NonPositiveCoefficient("int_array_lin_eq"));
    }
    for v in vars {
        v.require_unary("int_array_lin_eq")?;
    }
    result.require_unary("int_array_lin_eq")?;
    let tuples: u128 = vars.iter().map(|v| (v.ub() - v.lb() + 1) as u128).product();
    if tuples > MAX_SUPPORT_TUPLES {
        return Err(EncodeError::TooManyTuples(tuples));
    }

    let mut point: Vec<i64> = vars.iter().map(|v| v.lb()).collect();
    let mut clause: Vec<Bit> = Vec::with_capacity(vars.len() + 1);
    loop {
        let total: i64 = coeffs.iter().zip(&point).map(|(c, u)| c * u).sum();

        clause.clear();
        clause.extend(vars.iter().zip(&point).map(|(x, &u)| !x.ge(u)));
        clause.push(result.ge(total));
        emit(formula, &clause)?;

        clause.clear();
        clause.extend(vars.iter().zip(&point).map(|(x, &u)| x.ge(u + 1)));
        clause.push(!result.ge(total + 1));
        emit(formula, &clause)?;

        // odometer step
        let mut k = 0;
        loop {
            if k == point.len() {
                return Ok(());
            }
            if point[k] < vars[k].ub() {
                point[k] += 1;
                break;
            }
            point[k] = vars[k].lb();
            k += 1;
        }
    }
}

/// `b <-> (x = c)`. A constant outside the domain forces `b` false.
pub fn int_eq_reif(formula: &mut CnfFormula, x: &IntVar, c: i64, b: Lit) -> Result<()> {
    x.require_unary("int_eq_reif")?;
    let at_least = x.ge(c);
    let above = x.ge(c + 1);
    let b = Bit::Lit(b);
    emit(formula, &[!b, at_least])?;
    emit(formula, &[!b, !above])?;
    emit(formula, &[b, !at_least, above])
}

/// `p | (q & r)` as a fresh literal, folding constants.
fn or_and(formula: &mut CnfFormula, p: Bit, q: Bit, r: Bit) -> Result<Bit> {
    match (p, q, r) {
        (Bit::Const(true), _, _) => Ok(Bit::TRUE),
        (_, Bit::Const(false), _) | (_, _, Bit::Const(false)) => Ok(p),
        (Bit::Const(false), Bit::Const(true), _) => Ok(r),
        (Bit::Const(false), _, Bit::Const(true)) => Ok(q),
        _ => {
            let z = Bit::Lit(formula.new_lit());
            emit(formula, &[!p, z])?;
            emit(formula, &[!q, !r, z])?;
            emit(formula, &[!z, p, q])?;
            emit(formula, &[!z, p, r])?;
            Ok(z)
        }
    }
}

/// `sum(bits) = s` via a sequential counter whose outputs are tied to the
/// order literals of `s`. The counter is cut at `s.ub + 1`.
pub fn bool_array_sum_eq(formula: &mut CnfFormula, bits: &[Lit], s: &IntVar) -> Result<()> {
    s.require_unary("bool_array_sum_eq")?;
    let cap = (s.ub().max(0) + 1) as usize;
    // counts[k] <-> at least k of the bits seen so far; counts[0] is true.
    let mut counts: Vec<Bit> = vec![Bit::TRUE];
    for &b in bits {
        let b = Bit::Lit(b);
        let seen = counts.len() - 1;
        let top = (seen + 1).min(cap);
        let mut next = Vec::with_capacity(top + 1);
        next.push(Bit::TRUE);
        for k in 1..=top {
            let keep = counts.get(k).copied().unwrap_or(Bit::FALSE);
            next.push(or_and(formula, keep, counts[k - 1], b)?);
        }
        counts = next;
    }
    for k in 1..=cap as i64 {
        let count_ge = counts.get(k as usize).copied().unwrap_or(Bit::FALSE);
        equate(formula, s.ge(k), count_ge)?;
    }
    Ok(())
}

/// `xs <=_lex ys` (non-strict).
///
/// `p_k` holds while the prefixes before position `k` are equal and `lt_k`
/// holds iff `xs[k] < ys[k]`; `p_k` forces `xs[k] <= ys[k]`.
pub fn int_arrays_lex(formula: &mut CnfFormula, xs: &[&IntVar], ys: &[&IntVar]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(EncodeError::LengthMismatch {
            what: "int_arrays_lex",
            left: xs.len(),
            right: ys.len(),
        });
    }
    let mut prefix_eq = Bit::TRUE;
    for (k, (x, y)) in xs.iter().zip(ys).enumerate() {
        x.require_unary("int_arrays_lex")?;
        y.require_unary("int_arrays_lex")?;
        let lo = x.lb().min(y.lb());
        let hi = x.ub().max(y.ub()) + 1;
        for v in lo..=hi {
            emit(formula, &[!prefix_eq, !x.ge(v), y.ge(v)])?;
        }
        if k + 1 == xs.len() {
            break;
        }
        let lt = Bit::Lit(formula.new_lit());
        for v in lo..=hi {
            emit(formula, &[!y.ge(v), x.ge(v), lt])?;
            emit(formula, &[!lt, !x.ge(v), y.ge(v + 1)])?;
        }
        let next = Bit::Lit(formula.new_lit());
        emit(formula, &[!prefix_eq, lt, next])?;
        emit(formula, &[!next, prefix_eq])?;
        emit(formula, &[!next, !lt])?;
        prefix_eq = next;
    }
    Ok(())
}

/// `sum(vars) = r` through a balanced tree of pairwise order-encoded sums.
pub fn int_array_sum_eq(formula: &mut CnfFormula, vars: &[&IntVar], r: &IntVar) -> Result<()> {
    for v in vars {
        v.require_unary("int_array_sum_eq")?;
    }
    r.require_unary("int_array_sum_eq")?;
    if vars.len() <= 2 {
        let coeffs = vec![1; vars.len()];
        return int_array_lin_eq(formula, &coeffs, vars, r);
    }
    let mut level: Vec<IntVar> = vars.iter().map(|&v| v.clone()).collect();
    while level.len() > 2 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut iter = level.chunks(2);
        for pair in &mut iter {
            match pair {
                [a, b] => {
                    let sum = new_int(formula, a.lb() + b.lb(), a.ub() + b.ub())?;
                    int_array_lin_eq(formula, &[1, 1], &[a, b], &sum)?;
                    next.push(sum);
                }
                [a] => next.push(a.clone()),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    int_array_lin_eq(formula, &[1, 1], &[&level[0], &level[1]], r)
}

fn check_nonempty(vars: &[&IntVar], what: &'static str) -> Result<()> {
    if vars.is_empty() {
        return Err(EncodeError::EmptyArgument(what));
    }
    for v in vars {
        v.require_unary(what)?;
    }
    Ok(())
}

fn value_range(vars: &[&IntVar], extra: &IntVar) -> (i64, i64) {
    let lo = vars
        .iter()
        .map(|v| v.lb())
        .chain([extra.lb()])
        .min()
        .unwrap();
    let hi = vars
        .iter()
        .map(|v| v.ub())
        .chain([extra.ub()])
        .max()
        .unwrap();
    (lo, hi)
}

/// `m = min(vars)`: `m >= v <-> /\ x_i >= v` for every threshold.
pub fn int_array_min(formula: &mut CnfFormula, vars: &[&IntVar], m: &IntVar) -> Result<()> {
    check_nonempty(vars, "int_array_min")?;
    m.require_unary("int_array_min")?;
    let (lo, hi) = value_range(vars, m);
    for v in lo + 1..=hi {
        let mut all = Vec::with_capacity(vars.len() + 1);
        for x in vars {
            emit(formula, &[!m.ge(v), x.ge(v)])?;
            all.push(!x.ge(v));
        }
        all.push(m.ge(v));
        emit(formula, &all)?;
    }
    Ok(())
}

/// `m = max(vars)`: `m >= v <-> \/ x_i >= v` for every threshold.
pub fn int_array_max(formula: &mut CnfFormula, vars: &[&IntVar], m: &IntVar) -> Result<()> {
    check_nonempty(vars, "int_array_max")?;
    m.require_unary("int_array_max")?;
    let (lo, hi) = value_range(vars, m);
    for v in lo + 1..=hi {
        let mut any = Vec::with_capacity(vars.len() + 1);
        for x in vars {
            emit(formula, &[m.ge(v), !x.ge(v)])?;
            any.push(x.ge(v));
        }
        any.push(!m.ge(v));
        emit(formula, &any)?;
    }
    Ok(())
}

/// `a <= b`.
pub fn int_leq(formula: &mut CnfFormula, a: &IntVar, b: &IntVar) -> Result<()> {
    a.require_unary("int_leq")?;
    b.require_unary("int_leq")?;
    let lo = a.lb().min(b.lb());
    let hi = a.ub().max(b.ub());
    for v in lo + 1..=hi {
        emit(formula, &[!a.ge(v), b.ge(v)])?;
    }
    Ok(())
}
