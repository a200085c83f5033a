//! Exact checks of puzzle solutions.
//!
//! Nothing here touches floating point: the fraction sum is an exact rational,
//! and the product and LCM computations use arbitrary-precision integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// One fraction `x / (10 y + z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub x: u8,
    pub y: u8,
    pub z: u8,
}

impl Triple {
    pub fn new(x: u8, y: u8, z: u8) -> Triple {
        Triple { x, y, z }
    }

    pub fn divisor(self) -> u32 {
        10 * u32::from(self.y) + u32::from(self.z)
    }

    /// Ordering key of the symmetry break: `(y, z, x)`.
    pub fn lex_key(self) -> (u8, u8, u8) {
        (self.y, self.z, self.x)
    }

    fn digits(self) -> [u8; 3] {
        [self.x, self.y, self.z]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    pub n: usize,
    pub triples: Vec<Triple>,
    /// The common multiple reported alongside the digits, if any.
    pub l: Option<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("expected {expected} triples, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("digit {0} outside 1..9")]
    DigitOutOfRange(u8),
    #[error("divisor {0} is not a two-digit number with nonzero digits")]
    BadDivisor(u64),
    #[error("solution text: {0}")]
    Parse(String),
    #[error("brute force supports n <= 4, got {0}")]
    Unsupported(usize),
}

impl Solution {
    pub fn new(triples: Vec<Triple>, l: Option<u64>) -> Solution {
        Solution {
            n: triples.len(),
            triples,
            l,
        }
    }

    fn check_structure(&self) -> Result<(), VerifyError> {
        if self.triples.len() != self.n {
            return Err(VerifyError::WrongLength {
                expected: self.n,
                found: self.triples.len(),
            });
        }
        for t in &self.triples {
            for d in t.digits() {
                if !(1..=9).contains(&d) {
                    return Err(VerifyError::DigitOutOfRange(d));
                }
            }
        }
        Ok(())
    }

    pub fn divisors(&self) -> Vec<u32> {
        self.triples.iter().map(|t| t.divisor()).collect()
    }
}

/// `n L x1 y1z1 x2 y2z2 ...`, one solution per line. Without a reported L the
/// LCM of the divisors is written.
impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = match self.l {
            Some(l) => l.to_string(),
            None => lcm_of_divisors(self).to_string(),
        };
        write!(f, "{} {}", self.n, l)?;
        for t in &self.triples {
            write!(f, " {} {}", t.x, t.divisor())?;
        }
        Ok(())
    }
}

impl FromStr for Solution {
    type Err = VerifyError;

    fn from_str(line: &str) -> Result<Solution, VerifyError> {
        let nums: Vec<u64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|_| VerifyError::Parse(format!("not a number: {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        if nums.len() < 2 {
            return Err(VerifyError::Parse(
                "expected `n L` followed by pairs".into(),
            ));
        }
        let n = nums[0] as usize;
        let pairs = &nums[2..];
        if pairs.len() != 2 * n {
            return Err(VerifyError::Parse(format!(
                "n = {n} needs {} numbers after L, found {}",
                2 * n,
                pairs.len()
            )));
        }
        let mut triples = Vec::with_capacity(n);
        for pair in pairs.chunks(2) {
            let (x, d) = (pair[0], pair[1]);
            if !(1..=9).contains(&x) {
                return Err(VerifyError::DigitOutOfRange(x.min(255) as u8));
            }
            if !(11..=99).contains(&d) || d % 10 == 0 {
                return Err(VerifyError::BadDivisor(d));
            }
            triples.push(Triple::new(x as u8, (d / 10) as u8, (d % 10) as u8));
        }
        Ok(Solution {
            n,
            triples,
            l: Some(nums[1]),
        })
    }
}

/// Parses every non-empty, non-`#` line.
pub fn parse_solutions(text: &str) -> Result<Vec<Solution>, VerifyError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub sum_is_one: bool,
    /// Occurrences of digits 1..9 (index 0 is digit 1).
    pub digit_counts: [usize; 9],
    /// Every count lies in `1..=ceil(n/3)`.
    pub counts_ok: bool,
    pub lex_sorted: bool,
    pub lcm: BigUint,
    /// `min divisor <= sum x_i <= max divisor`.
    pub redundant_bound_ok: bool,
    /// Whether the reported L is a multiple of every divisor; `None` without L.
    pub l_is_common_multiple: Option<bool>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.sum_is_one
            && self.counts_ok
            && self.lex_sorted
            && self.redundant_bound_ok
            && self.l_is_common_multiple.unwrap_or(true)
    }

    /// Names of the checks that failed.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.sum_is_one {
            out.push("sum_is_one");
        }
        if !self.counts_ok {
            out.push("counts_ok");
        }
        if !self.lex_sorted {
            out.push("lex_sorted");
        }
        if !self.redundant_bound_ok {
            out.push("redundant_bound_ok");
        }
        if self.l_is_common_multiple == Some(false) {
            out.push("l_is_common_multiple");
        }
        out
    }
}

pub fn count_cap(n: usize) -> usize {
    n.div_ceil(3)
}

/// Exact fraction sum.
pub fn fraction_sum(sol: &Solution) -> BigRational {
    sol.triples.iter().fold(BigRational::zero(), |acc, t| {
        acc + BigRational::new(BigInt::from(t.x), BigInt::from(t.divisor()))
    })
}

pub fn verify_solution(sol: &Solution) -> Result<VerifyReport, VerifyError> {
    sol.check_structure()?;
    let sum_is_one = fraction_sum(sol).is_one();

    let mut digit_counts = [0usize; 9];
    for t in &sol.triples {
        for d in t.digits() {
            digit_counts[d as usize - 1] += 1;
        }
    }
    let cap = count_cap(sol.n);
    let counts_ok = digit_counts.iter().all(|&c| (1..=cap).contains(&c));
    let lex_sorted = sol
        .triples
        .windows(2)
        .all(|w| w[0].lex_key() <= w[1].lex_key());

    let divisors = sol.divisors();
    let numerator_sum: u32 = sol.triples.iter().map(|t| u32::from(t.x)).sum();
    let redundant_bound_ok = match (divisors.iter().min(), divisors.iter().max()) {
        (Some(&lo), Some(&hi)) => lo <= numerator_sum && numerator_sum <= hi,
        _ => false,
    };
    let lcm = lcm_of_divisors(sol);
    let l_is_common_multiple = sol.l.map(|l| l > 0 && (BigUint::from(l) % &lcm).is_zero());
    Ok(VerifyReport {
        sum_is_one,
        digit_counts,
        counts_ok,
        lex_sorted,
        lcm,
        redundant_bound_ok,
        l_is_common_multiple,
    })
}

/// Least common multiple of the divisors `10 y_i + z_i` (1 for no triples).
pub fn lcm_of_divisors(sol: &Solution) -> BigUint {
    sol.triples.iter().fold(BigUint::one(), |acc, t| {
        acc.lcm(&BigUint::from(t.divisor()))
    })
}

/// Both sides of the product-model equation
/// `sum_i x_i * prod_{k != i} d_k = prod_k d_k`.
pub fn product_model_sides(sol: &Solution) -> (BigUint, BigUint) {
    let divisors: Vec<BigUint> = sol
        .triples
        .iter()
        .map(|t| BigUint::from(t.divisor()))
        .collect();
    let rhs = divisors.iter().fold(BigUint::one(), |acc, d| acc * d);
    let mut lhs = BigUint::zero();
    for (i, t) in sol.triples.iter().enumerate() {
        let others = divisors
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .fold(BigUint::one(), |acc, (_, d)| acc * d);
        lhs += others * BigUint::from(t.x);
    }
    (lhs, rhs)
}

/// The product-model equation with arbitrary-precision integers.
pub fn product_model_check(sol: &Solution) -> bool {
    let (lhs, rhs) = product_model_sides(sol);
    lhs == rhs
}

/// Triples stably sorted by `(y, z, x)`.
pub fn canonicalize(sol: &Solution) -> Solution {
    let mut triples = sol.triples.clone();
    triples.sort_by_key(|t| t.lex_key());
    Solution {
        n: sol.n,
        triples,
        l: sol.l,
    }
}

/// Every canonical solution for `n <= 4`, by exhaustive search over
/// nondecreasing sequences of triples. The last fraction is solved for
/// directly from the remainder. Reported L is the LCM of the divisors.
pub fn brute_force_solve(n: usize) -> Result<Vec<Solution>, VerifyError> {
    if n > 4 {
        return Err(VerifyError::Unsupported(n));
    }
    let mut all: Vec<Triple> = Vec::with_capacity(729);
    for y in 1..=9 {
        for z in 1..=9 {
            for x in 1..=9 {
                all.push(Triple::new(x, y, z));
            }
        }
    }
    let mut search = BruteForce {
        n,
        cap: count_cap(n),
        all,
        counts: [0; 10],
        prefix: Vec::with_capacity(n),
        found: Vec::new(),
    };
    if n > 0 {
        search.extend(0, 0, 1);
    }
    let mut found: Vec<Solution> = search
        .found
        .into_iter()
        .map(|triples| {
            let mut s = Solution::new(triples, None);
            s.l = lcm_of_divisors(&s).try_into().ok();
            s
        })
        .collect();
    found.sort_by(|a, b| {
        let ka: Vec<_> = a.triples.iter().map(|t| t.lex_key()).collect();
        let kb: Vec<_> = b.triples.iter().map(|t| t.lex_key()).collect();
        ka.cmp(&kb)
    });
    Ok(found)
}

struct BruteForce {
    n: usize,
    cap: usize,
    all: Vec<Triple>,
    counts: [usize; 10],
    prefix: Vec<Triple>,
    found: Vec<Vec<Triple>>,
}

impl BruteForce {
    fn fits(&self, t: Triple) -> bool {
        let mut c = self.counts;
        t.digits().iter().all(|&d| {
            c[d as usize] += 1;
            c[d as usize] <= self.cap
        })
    }

    fn place(&mut self, t: Triple, delta: isize) {
        for d in t.digits() {
            self.counts[d as usize] = (self.counts[d as usize] as isize + delta) as usize;
        }
    }

    fn missing(&self) -> usize {
        (1..=9).filter(|&d| self.counts[d] == 0).count()
    }

    /// `num / den` is the partial sum of the prefix, reduced.
    fn extend(&mut self, start: usize, num: u128, den: u128) {
        let remaining = self.n - self.prefix.len();
        if remaining == 1 {
            self.close(start, num, den);
            return;
        }
        for i in start..self.all.len() {
            let t = self.all[i];
            let d = u128::from(t.divisor());
            // Later fractions are at most 9/d each, so the sum must still reach 1.
            if (num * d + remaining as u128 * 9 * den) < den * d {
                // Divisors only grow from here on.
                break;
            }
            if !self.fits(t) {
                continue;
            }
            let (nn, nd) = reduce(num * d + u128::from(t.x) * den, den * d);
            if nn >= nd {
                continue;
            }
            self.place(t, 1);
            if self.missing() <= 3 * (remaining - 1) {
                self.prefix.push(t);
                self.extend(i, nn, nd);
                self.prefix.pop();
            }
            self.place(t, -1);
        }
    }

    fn close(&mut self, start: usize, num: u128, den: u128) {
        // x / d = (den - num) / den
        let rest = den - num;
        let first = self.all[start];
        for d in first.divisor()..=99 {
            if d % 10 == 0 || !(u128::from(d) * rest).is_multiple_of(den) {
                continue;
            }
            let x = u128::from(d) * rest / den;
            if !(1..=9).contains(&x) {
                continue;
            }
            let t = Triple::new(x as u8, (d / 10) as u8, (d % 10) as u8);
            if t.lex_key() < first.lex_key() || !self.fits(t) {
                continue;
            }
            self.place(t, 1);
            if self.missing() == 0 {
                let mut triples = self.prefix.clone();
                triples.push(t);
                self.found.push(triples);
            }
            self.place(t, -1);
        }
    }
}

fn reduce(num: u128, den: u128) -> (u128, u128) {
    let g = num.gcd(&den);
    (num / g, den / g)
}
