//! Randomized equivalence checks for the integer encoders: for each generated
//! instance, the set of decoded models found by exhaustive enumeration must
//! equal the relation computed directly over the domains.

use std::collections::BTreeSet;

use nfrac_core::cnf::{Assignment, CnfFormula, Lit};
use nfrac_core::encode::{
    binary_array_sum_eq, binary_eq_reif, binary_times, bool_array_or, bool_array_sum_eq,
    channel_int2binary, int_array_lin_eq, int_array_max, int_array_min, int_array_sum_eq,
    int_arrays_lex, int_eq_reif, int_leq, new_binary, new_int, IntVar,
};
use nfrac_core::enumerate::{for_each_model, project};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Check = fn(&mut ChaCha8Rng) -> Result<(), String>;

pub const PRIMITIVES: &[(&str, Check)] = &[
    ("new_int", check_new_int),
    ("new_binary", check_new_binary),
    ("channel_int2binary", check_channel),
    ("int_array_lin_eq", check_lin_eq),
    ("int_eq_reif", check_eq_reif),
    ("bool_array_sum_eq", check_bool_sum),
    ("int_arrays_lex", check_lex),
    ("int_array_sum_eq", check_sum),
    ("int_array_min", check_min),
    ("int_array_max", check_max),
    ("int_leq", check_leq),
    ("bool_array_or", check_or),
    ("binary_times", check_times),
    ("binary_eq_reif", check_binary_eq_reif),
    ("binary_array_sum_eq", check_binary_sum),
];

/// Runs `cases` random instances of one primitive; returns the mismatches.
pub fn run(check: Check, cases: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..cases).filter_map(|_| check(rng).err()).collect()
}

/// One of the model's values: an integer or a literal read as 0/1.
enum Item<'a> {
    Int(&'a IntVar),
    Bool(Lit),
}

fn decode(items: &[Item], a: &Assignment) -> Vec<i64> {
    items
        .iter()
        .map(|item| match item {
            Item::Int(v) => v.decode(a).expect("models decode"),
            Item::Bool(l) => i64::from(a.lit_value(*l)),
        })
        .collect()
}

/// All tuples over the given inclusive ranges that satisfy `keep`.
fn relation(ranges: &[(i64, i64)], keep: impl Fn(&[i64]) -> bool) -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|r| r.0 > r.1) {
        return out;
    }
    loop {
        if keep(&cur) {
            out.insert(cur.clone());
        }
        let mut k = 0;
        loop {
            if k == ranges.len() {
                return out;
            }
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                break;
            }
            cur[k] = ranges[k].0;
            k += 1;
        }
    }
}

fn compare(
    what: &str,
    f: &CnfFormula,
    items: &[Item],
    expected: BTreeSet<Vec<i64>>,
) -> Result<(), String> {
    let got: BTreeSet<Vec<i64>> = project(f, |a| decode(items, a)).into_iter().collect();
    if got == expected {
        Ok(())
    } else {
        let extra: Vec<_> = got.difference(&expected).take(3).collect();
        let missing: Vec<_> = expected.difference(&got).take(3).collect();
        Err(format!("{what}: extra {extra:?}, missing {missing:?}"))
    }
}

fn domain(rng: &mut ChaCha8Rng, max_lb: i64, max_width: i64) -> (i64, i64) {
    let lb = rng.gen_range(0..=max_lb);
    (lb, lb + rng.gen_range(0..=max_width))
}

fn unary(f: &mut CnfFormula, d: (i64, i64)) -> IntVar {
    new_int(f, d.0, d.1).unwrap()
}

/// A variable with a binary view, either native or channelled from unary.
fn binary(f: &mut CnfFormula, rng: &mut ChaCha8Rng, d: (i64, i64)) -> IntVar {
    if rng.gen_bool(0.5) {
        new_binary(f, d.0, d.1).unwrap()
    } else {
        let mut v = new_int(f, d.0, d.1).unwrap();
        channel_int2binary(f, &mut v).unwrap();
        v
    }
}

fn check_new_int(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let d = domain(rng, 5, 8);
    let x = unary(&mut f, d);
    compare(
        &format!("new_int {d:?}"),
        &f,
        &[Item::Int(&x)],
        relation(&[d], |_| true),
    )
}

fn check_new_binary(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let d = domain(rng, 12, 20);
    let x = new_binary(&mut f, d.0, d.1).unwrap();
    compare(
        &format!("new_binary {d:?}"),
        &f,
        &[Item::Int(&x)],
        relation(&[d], |_| true),
    )
}

fn check_channel(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let d = domain(rng, 12, 14);
    let mut x = new_int(&mut f, d.0, d.1).unwrap();
    channel_int2binary(&mut f, &mut x).unwrap();
    // No auxiliaries: one model per value, and both views must agree on it.
    let mut models = 0i64;
    let mut mismatch = None;
    for_each_model(&f, |a| {
        models += 1;
        let u = x.decode_unary(a).unwrap();
        let b = x.decode_binary(a).unwrap();
        if u.is_err() || b.is_err() || u.as_ref().ok() != b.as_ref().ok() {
            mismatch = Some(format!("{u:?} vs {b:?}"));
        }
        true
    });
    if let Some(m) = mismatch {
        return Err(format!("channel {d:?}: views disagree {m}"));
    }
    if models != d.1 - d.0 + 1 {
        return Err(format!("channel {d:?}: {models} models"));
    }
    compare(
        &format!("channel {d:?}"),
        &f,
        &[Item::Int(&x)],
        relation(&[d], |_| true),
    )
}

fn check_lin_eq(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let k = rng.gen_range(1..=3);
    let coeffs: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
    let doms: Vec<(i64, i64)> = (0..k).map(|_| domain(rng, 2, 3)).collect();
    let hi: i64 = coeffs.iter().zip(&doms).map(|(c, d)| c * d.1).sum();
    let rd = (rng.gen_range(0..=hi), 0);
    let rd = (rd.0, rng.gen_range(rd.0..=hi + 2));
    let xs: Vec<IntVar> = doms.iter().map(|&d| unary(&mut f, d)).collect();
    let r = unary(&mut f, rd);
    let refs: Vec<&IntVar> = xs.iter().collect();
    int_array_lin_eq(&mut f, &coeffs, &refs, &r).unwrap();
    let mut items: Vec<Item> = xs.iter().map(Item::Int).collect();
    items.push(Item::Int(&r));
    let mut ranges = doms.clone();
    ranges.push(rd);
    let expected = relation(&ranges, |t| {
        coeffs.iter().zip(t).map(|(c, v)| c * v).sum::<i64>() == t[k]
    });
    compare(
        &format!("lin_eq {coeffs:?} {ranges:?}"),
        &f,
        &items,
        expected,
    )
}

fn check_eq_reif(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let d = domain(rng, 4, 6);
    let c = rng.gen_range(d.0 - 1..=d.1 + 1);
    let x = unary(&mut f, d);
    let b = f.new_lit();
    int_eq_reif(&mut f, &x, c, b).unwrap();
    let expected = relation(&[d, (0, 1)], |t| (t[0] == c) == (t[1] == 1));
    compare(
        &format!("eq_reif {d:?} = {c}"),
        &f,
        &[Item::Int(&x), Item::Bool(b)],
        expected,
    )
}

fn check_bool_sum(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let k = rng.gen_range(0..=6);
    let bits = f.new_lits(k);
    let sd = domain(rng, 3, 4);
    let s = unary(&mut f, sd);
    bool_array_sum_eq(&mut f, &bits, &s).unwrap();
    let mut items: Vec<Item> = bits.iter().map(|&l| Item::Bool(l)).collect();
    items.push(Item::Int(&s));
    let mut ranges = vec![(0, 1); k];
    ranges.push(sd);
    let expected = relation(&ranges, |t| t[..k].iter().sum::<i64>() == t[k]);
    compare(&format!("bool_sum k={k} s={sd:?}"), &f, &items, expected)
}

fn check_lex(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let k = rng.gen_range(1..=3);
    let doms: Vec<(i64, i64)> = (0..2 * k).map(|_| domain(rng, 2, 2)).collect();
    let vars: Vec<IntVar> = doms.iter().map(|&d| unary(&mut f, d)).collect();
    let xs: Vec<&IntVar> = vars[..k].iter().collect();
    let ys: Vec<&IntVar> = vars[k..].iter().collect();
    int_arrays_lex(&mut f, &xs, &ys).unwrap();
    let items: Vec<Item> = vars.iter().map(Item::Int).collect();
    let expected = relation(&doms, |t| t[..k] <= t[k..]);
    compare(&format!("lex {doms:?}"), &f, &items, expected)
}

fn check_sum(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let k = rng.gen_range(1..=4);
    let doms: Vec<(i64, i64)> = (0..k).map(|_| domain(rng, 2, 2)).collect();
    let hi: i64 = doms.iter().map(|d| d.1).sum();
    let lo = rng.gen_range(0..=hi);
    let rd = (lo, rng.gen_range(lo..=hi + 1));
    let xs: Vec<IntVar> = doms.iter().map(|&d| unary(&mut f, d)).collect();
    let r = unary(&mut f, rd);
    let refs: Vec<&IntVar> = xs.iter().collect();
    int_array_sum_eq(&mut f, &refs, &r).unwrap();
    let mut items: Vec<Item> = xs.iter().map(Item::Int).collect();
    items.push(Item::Int(&r));
    let mut ranges = doms.clone();
    ranges.push(rd);
    let expected = relation(&ranges, |t| t[..k].iter().sum::<i64>() == t[k]);
    compare(&format!("sum {ranges:?}"), &f, &items, expected)
}

fn check_extreme(rng: &mut ChaCha8Rng, is_min: bool) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let k = rng.gen_range(1..=3);
    let doms: Vec<(i64, i64)> = (0..k).map(|_| domain(rng, 3, 3)).collect();
    let md = domain(rng, 3, 4);
    let xs: Vec<IntVar> = doms.iter().map(|&d| unary(&mut f, d)).collect();
    let m = unary(&mut f, md);
    let refs: Vec<&IntVar> = xs.iter().collect();
    if is_min {
        int_array_min(&mut f, &refs, &m).unwrap();
    } else {
        int_array_max(&mut f, &refs, &m).unwrap();
    }
    let mut items: Vec<Item> = xs.iter().map(Item::Int).collect();
    items.push(Item::Int(&m));
    let mut ranges = doms.clone();
    ranges.push(md);
    let expected = relation(&ranges, |t| {
        let it = t[..k].iter().copied();
        t[k] == if is_min {
            it.min().unwrap()
        } else {
            it.max().unwrap()
        }
    });
    let name = if is_min { "min" } else { "max" };
    compare(&format!("{name} {ranges:?}"), &f, &items, expected)
}

fn check_min(rng: &mut ChaCha8Rng) -> Result<(), String> {
    check_extreme(rng, true)
}

fn check_max(rng: &mut ChaCha8Rng) -> Result<(), String> {
    check_extreme(rng, false)
}

fn check_leq(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let (da, db) = (domain(rng, 5, 5), domain(rng, 5, 5));
    let a = unary(&mut f, da);
    let b = unary(&mut f, db);
    int_leq(&mut f, &a, &b).unwrap();
    let expected = relation(&[da, db], |t| t[0] <= t[1]);
    compare(
        &format!("leq {da:?} {db:?}"),
        &f,
        &[Item::Int(&a), Item::Int(&b)],
        expected,
    )
}

fn check_or(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let k = rng.gen_range(1..=6);
    let vars = f.new_lits(k);
    // Mixed polarities, so the clause is not always over positive literals.
    let lits: Vec<Lit> = vars
        .iter()
        .map(|&l| if rng.gen_bool(0.5) { l } else { !l })
        .collect();
    bool_array_or(&mut f, &lits).unwrap();
    let items: Vec<Item> = vars.iter().map(|&l| Item::Bool(l)).collect();
    let polarity: Vec<bool> = lits.iter().map(|l| l.is_positive()).collect();
    let expected = relation(&vec![(0, 1); k], |t| {
        t.iter().zip(&polarity).any(|(&v, &p)| (v == 1) == p)
    });
    compare(&format!("or k={k}"), &f, &items, expected)
}

fn check_times(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let (da, db) = (domain(rng, 3, 6), domain(rng, 3, 6));
    let max = da.1 * db.1;
    let lo = rng.gen_range(0..=max);
    let dc = (lo, rng.gen_range(lo..=max + 3));
    let a = binary(&mut f, rng, da);
    let b = binary(&mut f, rng, db);
    let c = binary(&mut f, rng, dc);
    binary_times(&mut f, &a, &b, &c).unwrap();
    let expected = relation(&[da, db, dc], |t| t[0] * t[1] == t[2]);
    compare(
        &format!("times {da:?} {db:?} {dc:?}"),
        &f,
        &[Item::Int(&a), Item::Int(&b), Item::Int(&c)],
        expected,
    )
}

fn check_binary_eq_reif(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let (da, db) = (domain(rng, 6, 9), domain(rng, 6, 9));
    let a = binary(&mut f, rng, da);
    let b = binary(&mut f, rng, db);
    let r = f.new_lit();
    binary_eq_reif(&mut f, &a, &b, r).unwrap();
    let expected = relation(&[da, db, (0, 1)], |t| (t[0] == t[1]) == (t[2] == 1));
    compare(
        &format!("binary_eq_reif {da:?} {db:?}"),
        &f,
        &[Item::Int(&a), Item::Int(&b), Item::Bool(r)],
        expected,
    )
}

fn check_binary_sum(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut f = CnfFormula::new();
    let k = rng.gen_range(1..=3);
    let doms: Vec<(i64, i64)> = (0..k).map(|_| domain(rng, 3, 4)).collect();
    let hi: i64 = doms.iter().map(|d| d.1).sum();
    let lo = rng.gen_range(0..=hi);
    let dt = (lo, rng.gen_range(lo..=hi + 3));
    let xs: Vec<IntVar> = doms.iter().map(|&d| binary(&mut f, rng, d)).collect();
    let total = binary(&mut f, rng, dt);
    let refs: Vec<&IntVar> = xs.iter().collect();
    binary_array_sum_eq(&mut f, &refs, &total).unwrap();
    let mut items: Vec<Item> = xs.iter().map(Item::Int).collect();
    items.push(Item::Int(&total));
    let mut ranges = doms.clone();
    ranges.push(dt);
    let expected = relation(&ranges, |t| t[..k].iter().sum::<i64>() == t[k]);
    compare(&format!("binary_sum {ranges:?}"), &f, &items, expected)
}
