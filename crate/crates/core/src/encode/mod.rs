//! Finite-domain integer variables and the constraint encoders used by the
//! fractions model.
//!
//! An [`IntVar`] carries an order (unary) view, a bit-vector (binary) view, or
//! both. The order view stores literals `o_v <-> (x >= v)` for `v` in
//! `lb+1..=ub`; the binary view stores unsigned bits, least significant first.
//! Encoders work over [`Bit`], which folds constants so that bounds and padding
//! never allocate variables.

mod binary;
mod unary;

use std::ops::Not;

use thiserror::Error;

use crate::cnf::{Assignment, CnfError, CnfFormula, Lit};

pub use binary::{binary_array_sum_eq, binary_eq_reif, binary_times};
pub use unary::{
    bool_array_sum_eq, int_array_lin_eq, int_array_max, int_array_min, int_array_sum_eq,
    int_arrays_lex, int_eq_reif, int_leq,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("empty domain {lb}..{ub}")]
    EmptyDomain { lb: i64, ub: i64 },
    #[error("binary variables need a non-negative lower bound, got {0}")]
    NegativeBinary(i64),
    #[error("{0} needs an order-encoded (unary) view")]
    MissingUnary(&'static str),
    #[error("{0} needs a binary view")]
    MissingBinary(&'static str),
    #[error("{what}: length mismatch ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("{0}: empty argument list")]
    EmptyArgument(&'static str),
    #[error("{0}: coefficients must be positive")]
    NonPositiveCoefficient(&'static str),
    #[error("int_array_lin_eq: {0} support tuples exceed the enumeration limit")]
    TooManyTuples(u128),
    #[error("variable already has a binary view")]
    AlreadyBinary,
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

pub type Result<T, E = EncodeError> = std::result::Result<T, E>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("order literals not monotone at value {0}")]
    NonMonotone(i64),
    #[error("unary view decodes {unary} but binary view decodes {binary}")]
    ViewMismatch { unary: i64, binary: i64 },
    #[error("decoded value {value} outside {lb}..{ub}")]
    OutOfBounds { value: i64, lb: i64, ub: i64 },
}

/// A literal or a known constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bit {
    Const(bool),
    Lit(Lit),
}

impl Bit {
    pub const TRUE: Bit = Bit::Const(true);
    pub const FALSE: Bit = Bit::Const(false);

    pub fn eval(self, assignment: &Assignment) -> bool {
        match self {
            Bit::Const(b) => b,
            Bit::Lit(l) => assignment.lit_value(l),
        }
    }
}

impl From<Lit> for Bit {
    fn from(l: Lit) -> Bit {
        Bit::Lit(l)
    }
}

impl Not for Bit {
    type Output = Bit;

    fn not(self) -> Bit {
        match self {
            Bit::Const(b) => Bit::Const(!b),
            Bit::Lit(l) => Bit::Lit(!l),
        }
    }
}

/// Adds a clause over bits: satisfied constants drop the clause, false constants
/// drop out of it. A clause that folds to nothing is added as the empty clause.
pub(crate) fn emit(formula: &mut CnfFormula, bits: &[Bit]) -> Result<()> {
    let mut lits = Vec::with_capacity(bits.len());
    for bit in bits {
        match *bit {
            Bit::Const(true) => return Ok(()),
            Bit::Const(false) => {}
            Bit::Lit(l) => lits.push(l),
        }
    }
    formula.add_clause(&lits)?;
    Ok(())
}

/// `a <-> b`.
pub(crate) fn equate(formula: &mut CnfFormula, a: Bit, b: Bit) -> Result<()> {
    if a == b {
        return Ok(());
    }
    emit(formula, &[!a, b])?;
    emit(formula, &[a, !b])
}

/// Number of bits of the unsigned representation of `ub`, i.e. `ceil(log2(ub + 1))`.
pub fn binary_width(ub: i64) -> usize {
    debug_assert!(ub >= 0);
    (64 - (ub as u64).leading_zeros()) as usize
}

/// An integer variable with inclusive bounds and one or two CNF views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntVar {
    lb: i64,
    ub: i64,
    unary: Option<Vec<Lit>>,
    binary: Option<Vec<Lit>>,
}

impl IntVar {
    pub fn lb(&self) -> i64 {
        self.lb
    }

    pub fn ub(&self) -> i64 {
        self.ub
    }

    /// Order literals for `x >= lb+1 .. x >= ub`.
    pub fn unary_view(&self) -> Option<&[Lit]> {
        self.unary.as_deref()
    }

    /// Bits, least significant first.
    pub fn binary_view(&self) -> Option<&[Lit]> {
        self.binary.as_deref()
    }

    /// Rebuilds a variable from stored views, e.g. when reading a variable map.
    pub fn from_views(
        lb: i64,
        ub: i64,
        unary: Option<Vec<Lit>>,
        binary: Option<Vec<Lit>>,
    ) -> Result<IntVar> {
        if lb > ub {
            return Err(EncodeError::EmptyDomain { lb, ub });
        }
        if let Some(u) = &unary {
            if u.len() as i64 != ub - lb {
                return Err(EncodeError::LengthMismatch {
                    what: "unary view",
                    left: u.len(),
                    right: (ub - lb) as usize,
                });
            }
        }
        Ok(IntVar {
            lb,
            ub,
            unary,
            binary,
        })
    }

    /// `x >= v` in the order view, folded to a constant outside `lb+1..=ub`.
    pub fn ge(&self, v: i64) -> Bit {
        if v <= self.lb {
            Bit::TRUE
        } else if v > self.ub {
            Bit::FALSE
        } else {
            let lits = self.unary.as_ref().expect("order view required");
            Bit::Lit(lits[(v - self.lb - 1) as usize])
        }
    }

    pub(crate) fn require_unary(&self, what: &'static str) -> Result<()> {
        if self.unary.is_some() {
            Ok(())
        } else {
            Err(EncodeError::MissingUnary(what))
        }
    }

    pub(crate) fn bits(&self, what: &'static str) -> Result<Vec<Bit>> {
        self.binary
            .as_ref()
            .map(|b| b.iter().map(|&l| Bit::Lit(l)).collect())
            .ok_or(EncodeError::MissingBinary(what))
    }

    pub fn decode_unary(&self, assignment: &Assignment) -> Option<Result<i64, DecodeError>> {
        let lits = self.unary.as_ref()?;
        let mut count = 0i64;
        let mut seen_false = false;
        for (k, &l) in lits.iter().enumerate() {
            if assignment.lit_value(l) {
                if seen_false {
                    return Some(Err(DecodeError::NonMonotone(self.lb + k as i64 + 1)));
                }
                count += 1;
            } else {
                seen_false = true;
            }
        }
        Some(Ok(self.lb + count))
    }

    pub fn decode_binary(&self, assignment: &Assignment) -> Option<Result<i64, DecodeError>> {
        let bits = self.binary.as_ref()?;
        let value = bits
            .iter()
            .enumerate()
            .filter(|(_, &l)| assignment.lit_value(l))
            .map(|(i, _)| 1i64 << i)
            .sum::<i64>();
        if value < self.lb || value > self.ub {
            return Some(Err(DecodeError::OutOfBounds {
                value,
                lb: self.lb,
                ub: self.ub,
            }));
        }
        Some(Ok(value))
    }

    /// Decodes the value, checking that both views agree when both exist.
    pub fn decode(&self, assignment: &Assignment) -> Result<i64, DecodeError> {
        match (
            self.decode_unary(assignment),
            self.decode_binary(assignment),
        ) {
            (Some(u), Some(b)) => {
                let (u, b) = (u?, b?);
                if u != b {
                    return Err(DecodeError::ViewMismatch {
                        unary: u,
                        binary: b,
                    });
                }
                Ok(u)
            }
            (Some(u), None) => u,
            (None, Some(b)) => b,
            (None, None) => Ok(self.lb),
        }
    }
}

/// Order-encoded integer in `lb..=ub` with its monotonicity chain.
pub fn new_int(formula: &mut CnfFormula, lb: i64, ub: i64) -> Result<IntVar> {
    if lb > ub {
        return Err(EncodeError::EmptyDomain { lb, ub });
    }
    let lits = formula.new_lits((ub - lb) as usize);
    for pair in lits.windows(2) {
        // x >= v+1  ->  x >= v
        formula.add_clause(&[!pair[1], pair[0]])?;
    }
    Ok(IntVar {
        lb,
        ub,
        unary: Some(lits),
        binary: None,
    })
}

/// Bit-vector integer in `lb..=ub`, with clauses enforcing both bounds.
pub fn new_binary(formula: &mut CnfFormula, lb: i64, ub: i64) -> Result<IntVar> {
    if lb > ub {
        return Err(EncodeError::EmptyDomain { lb, ub });
    }
    if lb < 0 {
        return Err(EncodeError::NegativeBinary(lb));
    }
    let lits = formula.new_lits(binary_width(ub));
    let bits: Vec<Bit> = lits.iter().map(|&l| Bit::Lit(l)).collect();
    binary::geq_const(formula, &bits, lb, Bit::TRUE)?;
    binary::leq_const(formula, &bits, ub, Bit::TRUE)?;
    Ok(IntVar {
        lb,
        ub,
        unary: None,
        binary: Some(lits),
    })
}

/// Adds a binary view to an order-encoded variable. Each order literal is tied
/// to a comparison on the bits: `o_v -> bits >= v` and `!o_v -> bits <= v-1`.
pub fn channel_int2binary(formula: &mut CnfFormula, x: &mut IntVar) -> Result<()> {
    x.require_unary("channel_int2binary")?;
    if x.binary.is_some() {
        return Err(EncodeError::AlreadyBinary);
    }
    if x.lb < 0 {
        return Err(EncodeError::NegativeBinary(x.lb));
    }
    let lits = formula.new_lits(binary_width(x.ub));
    let bits: Vec<Bit> = lits.iter().map(|&l| Bit::Lit(l)).collect();
    binary::geq_const(formula, &bits, x.lb, Bit::TRUE)?;
    binary::leq_const(formula, &bits, x.ub, Bit::TRUE)?;
    for v in x.lb + 1..=x.ub {
        let o = x.ge(v);
        binary::geq_const(formula, &bits, v, o)?;
        binary::leq_const(formula, &bits, v - 1, !o)?;
    }
    x.binary = Some(lits);
    Ok(())
}

/// The single clause `lits[0] | lits[1] | ...`.
pub fn bool_array_or(formula: &mut CnfFormula, lits: &[Lit]) -> Result<()> {
    if lits.is_empty() {
        return Err(EncodeError::EmptyArgument("bool_array_or"));
    }
    formula.add_clause(lits)?;
    Ok(())
}
