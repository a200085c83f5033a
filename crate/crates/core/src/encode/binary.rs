//! Bit-vector circuits: comparators against constants, adders, multipliers.
//!
//! Gate outputs are fully defined (both implication directions), so every
//! auxiliary variable is a function of the inputs.

use super::{emit, equate, Bit, IntVar, Result};
use crate::cnf::{CnfFormula, Lit};

/// `guard -> bits >= c` (unsigned).
pub(crate) fn geq_const(formula: &mut CnfFormula, bits: &[Bit], c: i64, guard: Bit) -> Result<()> {
    if c <= 0 {
        return Ok(());
    }
    let width = bits.len();
    if width < 63 && c >= 1i64 << width {
        return emit(formula, &[!guard]);
    }
    for i in (0..width).filter(|&i| c >> i & 1 == 1) {
        let mut clause = vec![!guard, bits[i]];
        clause.extend((i + 1..width).filter(|&j| c >> j & 1 == 0).map(|j| bits[j]));
        emit(formula, &clause)?;
    }
    Ok(())
}

/// `guard -> bits <= c` (unsigned).
pub(crate) fn leq_const(formula: &mut CnfFormula, bits: &[Bit], c: i64, guard: Bit) -> Result<()> {
    if c < 0 {
        return emit(formula, &[!guard]);
    }
    let width = bits.len();
    if width < 63 && c >= (1i64 << width) - 1 {
        return Ok(());
    }
    for i in (0..width).filter(|&i| c >> i & 1 == 0) {
        let mut clause = vec![!guard, !bits[i]];
        clause.extend(
            (i + 1..width)
                .filter(|&j| c >> j & 1 == 1)
                .map(|j| !bits[j]),
        );
        emit(formula, &clause)?;
    }
    Ok(())
}

fn fresh(formula: &mut CnfFormula) -> Bit {
    Bit::Lit(formula.new_lit())
}

fn and2(formula: &mut CnfFormula, a: Bit, b: Bit) -> Result<Bit> {
    Ok(match (a, b) {
        (Bit::Const(false), _) | (_, Bit::Const(false)) => Bit::FALSE,
        (Bit::Const(true), x) | (x, Bit::Const(true)) => x,
        _ if a == b => a,
        _ if a == !b => Bit::FALSE,
        _ => {
            let z = fresh(formula);
            emit(formula, &[!z, a])?;
            emit(formula, &[!z, b])?;
            emit(formula, &[z, !a, !b])?;
            z
        }
    })
}

fn or2(formula: &mut CnfFormula, a: Bit, b: Bit) -> Result<Bit> {
    Ok(!and2(formula, !a, !b)?)
}

fn xor2(formula: &mut CnfFormula, a: Bit, b: Bit) -> Result<Bit> {
    Ok(match (a, b) {
        (Bit::Const(c), x) | (x, Bit::Const(c)) => {
            if c {
                !x
            } else {
                x
            }
        }
        _ if a == b => Bit::FALSE,
        _ if a == !b => Bit::TRUE,
        _ => {
            let z = fresh(formula);
            emit(formula, &[!z, a, b])?;
            emit(formula, &[!z, !a, !b])?;
            emit(formula, &[z, !a, b])?;
            emit(formula, &[z, a, !b])?;
            z
        }
    })
}

/// Returns `(sum, carry)` of three input bits.
fn full_add(formula: &mut CnfFormula, a: Bit, b: Bit, c: Bit) -> Result<(Bit, Bit)> {
    let mut ones = 0;
    let mut open = Vec::with_capacity(3);
    for bit in [a, b, c] {
        match bit {
            Bit::Const(true) => ones += 1,
            Bit::Const(false) => {}
            Bit::Lit(_) => open.push(bit),
        }
    }
    match (open.len(), ones) {
        (0, k) => Ok((Bit::Const(k % 2 == 1), Bit::Const(k >= 2))),
        (1, 0) => Ok((open[0], Bit::FALSE)),
        (1, 1) => Ok((!open[0], open[0])),
        (1, _) => Ok((open[0], Bit::TRUE)),
        (2, 0) => Ok((
            xor2(formula, open[0], open[1])?,
            and2(formula, open[0], open[1])?,
        )),
        (2, _) => Ok((
            !xor2(formula, open[0], open[1])?,
            or2(formula, open[0], open[1])?,
        )),
        _ => {
            let s = fresh(formula);
            let co = fresh(formula);
            // s <-> a ^ b ^ c
            emit(formula, &[!a, !b, !c, s])?;
            emit(formula, &[!a, b, c, s])?;
            emit(formula, &[a, !b, c, s])?;
            emit(formula, &[a, b, !c, s])?;
            emit(formula, &[a, b, c, !s])?;
            emit(formula, &[a, !b, !c, !s])?;
            emit(formula, &[!a, b, !c, !s])?;
            emit(formula, &[!a, !b, c, !s])?;
            // co <-> majority(a, b, c)
            emit(formula, &[!a, !b, co])?;
            emit(formula, &[!a, !c, co])?;
            emit(formula, &[!b, !c, co])?;
            emit(formula, &[a, b, !co])?;
            emit(formula, &[a, c, !co])?;
            emit(formula, &[b, c, !co])?;
            Ok((s, co))
        }
    }
}

/// Ripple-carry sum; the result is one bit wider than the wider operand.
fn add(formula: &mut CnfFormula, a: &[Bit], b: &[Bit]) -> Result<Vec<Bit>> {
    let width = a.len().max(b.len());
    let mut out = Vec::with_capacity(width + 1);
    let mut carry = Bit::FALSE;
    for i in 0..width {
        let x = a.get(i).copied().unwrap_or(Bit::FALSE);
        let y = b.get(i).copied().unwrap_or(Bit::FALSE);
        let (s, c) = full_add(formula, x, y, carry)?;
        out.push(s);
        carry = c;
    }
    out.push(carry);
    Ok(out)
}

/// Shift-and-add product of two bit vectors, full width.
fn multiply(formula: &mut CnfFormula, a: &[Bit], b: &[Bit]) -> Result<Vec<Bit>> {
    let mut acc: Vec<Bit> = Vec::new();
    for (j, &bj) in b.iter().enumerate() {
        let mut row = vec![Bit::FALSE; j];
        for &ai in a {
            row.push(and2(formula, ai, bj)?);
        }
        acc = add(formula, &acc, &row)?;
    }
    acc.resize(a.len() + b.len(), Bit::FALSE);
    Ok(acc)
}

/// Ties computed bits to a target vector; computed bits beyond the target's
/// width must be zero, so out-of-range values are excluded rather than wrapped.
fn assign_bits(formula: &mut CnfFormula, computed: &[Bit], target: &[Lit]) -> Result<()> {
    let width = computed.len().max(target.len());
    for i in 0..width {
        let c = computed.get(i).copied().unwrap_or(Bit::FALSE);
        let t = target.get(i).map(|&l| Bit::Lit(l)).unwrap_or(Bit::FALSE);
        equate(formula, c, t)?;
    }
    Ok(())
}

/// `a * b = c` over binary views.
pub fn binary_times(formula: &mut CnfFormula, a: &IntVar, b: &IntVar, c: &IntVar) -> Result<()> {
    let abits = a.bits("binary_times")?;
    let bbits = b.bits("binary_times")?;
    c.bits("binary_times")?;
    let product = multiply(formula, &abits, &bbits)?;
    assign_bits(formula, &product, c.binary_view().unwrap())
}

/// `r <-> (a = b)` over binary views; the shorter vector is padded with zeros.
pub fn binary_eq_reif(formula: &mut CnfFormula, a: &IntVar, b: &IntVar, r: Lit) -> Result<()> {
    let abits = a.bits("binary_eq_reif")?;
    let bbits = b.bits("binary_eq_reif")?;
    let width = abits.len().max(bbits.len());
    let r = Bit::Lit(r);
    let mut any_diff = vec![r];
    for i in 0..width {
        let x = abits.get(i).copied().unwrap_or(Bit::FALSE);
        let y = bbits.get(i).copied().unwrap_or(Bit::FALSE);
        let diff = xor2(formula, x, y)?;
        emit(formula, &[!r, !diff])?;
        any_diff.push(diff);
    }
    emit(formula, &any_diff)
}

/// `sum(vars) = total` over binary views, via a balanced adder tree.
pub fn binary_array_sum_eq(
    formula: &mut CnfFormula,
    vars: &[&IntVar],
    total: &IntVar,
) -> Result<()> {
    let mut level = Vec::with_capacity(vars.len());
    for v in vars {
        level.push(v.bits("binary_array_sum_eq")?);
    }
    total.bits("binary_array_sum_eq")?;
    if level.is_empty() {
        level.push(Vec::new());
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            match pair {
                [a, b] => next.push(add(formula, a, b)?),
                [a] => next.push(a.clone()),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    assign_bits(formula, &level[0], total.binary_view().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::new_binary;
    use crate::enumerate::{project, satisfiable};

    fn fix(f: &mut CnfFormula, x: &IntVar, value: i64) {
        for (i, &b) in x.binary_view().unwrap().iter().enumerate() {
            let lit = if value >> i & 1 == 1 { b } else { !b };
            f.add_clause(&[lit]).unwrap();
        }
    }

    #[test]
    fn times_forced() {
        let mut f = CnfFormula::new();
        let a = new_binary(&mut f, 11, 99).unwrap();
        let b = new_binary(&mut f, 1, 28).unwrap();
        let c = new_binary(&mut f, 1, 300).unwrap();
        binary_times(&mut f, &a, &b, &c).unwrap();
        fix(&mut f, &a, 12);
        fix(&mut f, &b, 17);
        assert_eq!(project(&f, |m| vec![c.decode(m).unwrap()]), vec![vec![204]]);
    }

    #[test]
    fn times_identity() {
        let mut f = CnfFormula::new();
        let a = new_binary(&mut f, 1, 9).unwrap();
        let b = new_binary(&mut f, 1, 3).unwrap();
        let c = new_binary(&mut f, 1, 27).unwrap();
        binary_times(&mut f, &a, &b, &c).unwrap();
        fix(&mut f, &b, 1);
        for row in project(&f, |m| vec![a.decode(m).unwrap(), c.decode(m).unwrap()]) {
            assert_eq!(row[0], row[1]);
        }
    }

    #[test]
    fn times_full_table() {
        let mut f = CnfFormula::new();
        let a = new_binary(&mut f, 1, 7).unwrap();
        let b = new_binary(&mut f, 1, 7).unwrap();
        let c = new_binary(&mut f, 1, 49).unwrap();
        binary_times(&mut f, &a, &b, &c).unwrap();
        let got = project(&f, |m| {
            vec![
                a.decode(m).unwrap(),
                b.decode(m).unwrap(),
                c.decode(m).unwrap(),
            ]
        });
        let expect: Vec<Vec<i64>> = (1..=7)
            .flat_map(|x| (1..=7).map(move |y| vec![x, y, x * y]))
            .collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn times_overflow_is_excluded() {
        let mut f = CnfFormula::new();
        let a = new_binary(&mut f, 5, 7).unwrap();
        let b = new_binary(&mut f, 5, 7).unwrap();
        let c = new_binary(&mut f, 1, 20).unwrap();
        binary_times(&mut f, &a, &b, &c).unwrap();
        assert!(!satisfiable(&f));
    }

    #[test]
    fn eq_reif_cases() {
        let build = |x: i64, y: i64| {
            let mut f = CnfFormula::new();
            let a = new_binary(&mut f, 1, 99).unwrap();
            let b = new_binary(&mut f, 1, 99).unwrap();
            let r = f.new_lit();
            binary_eq_reif(&mut f, &a, &b, r).unwrap();
            fix(&mut f, &a, x);
            fix(&mut f, &b, y);
            project(&f, |m| vec![m.lit_value(r) as i64])
        };
        assert_eq!(build(18, 18), vec![vec![1]]);
        assert_eq!(build(11, 99), vec![vec![0]]);

        let mut f = CnfFormula::new();
        let a = new_binary(&mut f, 1, 4).unwrap();
        let b = new_binary(&mut f, 1, 2).unwrap();
        let r = f.new_lit();
        binary_eq_reif(&mut f, &a, &b, r).unwrap();
        let rows = project(&f, |m| {
            vec![
                a.decode(m).unwrap(),
                b.decode(m).unwrap(),
                m.lit_value(r) as i64,
            ]
        });
        assert_eq!(rows.len(), 8);
        for row in rows {
            assert_eq!(row[2] == 1, row[0] == row[1]);
        }
    }

    #[test]
    fn sum_cases() {
        let mut f = CnfFormula::new();
        let ts: Vec<IntVar> = (0..3)
            .map(|_| new_binary(&mut f, 1, 252).unwrap())
            .collect();
        let total = new_binary(&mut f, 1, 300).unwrap();
        let refs: Vec<&IntVar> = ts.iter().collect();
        binary_array_sum_eq(&mut f, &refs, &total).unwrap();
        for (t, v) in ts.iter().zip([153, 30, 21]) {
            fix(&mut f, t, v);
        }
        assert_eq!(
            project(&f, |m| vec![total.decode(m).unwrap()]),
            vec![vec![204]]
        );

        let mut g = CnfFormula::new();
        let x = new_binary(&mut g, 0, 5).unwrap();
        let total = new_binary(&mut g, 0, 5).unwrap();
        binary_array_sum_eq(&mut g, &[&x], &total).unwrap();
        for row in project(&g, |m| vec![x.decode(m).unwrap(), total.decode(m).unwrap()]) {
            assert_eq!(row[0], row[1]);
        }

        let mut h = CnfFormula::new();
        let xs: Vec<IntVar> = (0..3).map(|_| new_binary(&mut h, 1, 3).unwrap()).collect();
        let total = new_binary(&mut h, 6, 6).unwrap();
        let refs: Vec<&IntVar> = xs.iter().collect();
        binary_array_sum_eq(&mut h, &refs, &total).unwrap();
        let rows = project(&h, |m| xs.iter().map(|x| x.decode(m).unwrap()).collect());
        assert_eq!(rows.len(), 7);
        assert!(rows.iter().all(|r| r.iter().sum::<i64>() == 6));
    }

    #[test]
    fn const_comparators() {
        for c in 0..9 {
            let mut f = CnfFormula::new();
            let bits: Vec<Bit> = f.new_lits(3).into_iter().map(Bit::Lit).collect();
            geq_const(&mut f, &bits, c, Bit::TRUE).unwrap();
            let n = crate::enumerate::all_models(&f).len() as i64;
            assert_eq!(n, (8 - c).max(0));
            let mut g = CnfFormula::new();
            let bits: Vec<Bit> = g.new_lits(3).into_iter().map(Bit::Lit).collect();
            leq_const(&mut g, &bits, c, Bit::TRUE).unwrap();
            let n = crate::enumerate::all_models(&g).len() as i64;
            assert_eq!(n, (c + 1).min(8));
        }
    }
}
