//! SAT pipeline for the n-fractions puzzle (CSPLib 041).
//!
//! The puzzle asks for `3n` nonzero digits with `sum x_i / (10 y_i + z_i) = 1`
//! where every digit 1..9 occurs between 1 and `ceil(n/3)` times. The model
//! multiplies through by a common multiple `L` of the denominators, compiles
//! the resulting finite-domain constraints to CNF, and verifies every decoded
//! solution with exact rational arithmetic.

pub mod cnf;
pub mod encode;
pub mod enumerate;
pub mod model;
pub mod reference;
pub mod sat;
pub mod schedule;
pub mod verify;
