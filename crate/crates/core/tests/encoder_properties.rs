mod common;

use common::encoders::{run, PRIMITIVES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CASES: usize = 1000;

fn check(name: &str) {
    let (_, primitive) = PRIMITIVES.iter().find(|(n, _)| *n == name).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ name.len() as u64);
    let mismatches = run(*primitive, CASES, &mut rng);
    assert!(
        mismatches.is_empty(),
        "{name}: {:#?}",
        &mismatches[..mismatches.len().min(5)]
    );
}

#[test]
fn every_primitive_is_listed() {
    assert_eq!(PRIMITIVES.len(), 15);
}

#[test]
fn new_int() {
    check("new_int");
}

#[test]
fn new_binary() {
    check("new_binary");
}

#[test]
fn channel_int2binary() {
    check("channel_int2binary");
}

#[test]
fn int_array_lin_eq() {
    check("int_array_lin_eq");
}

#[test]
fn int_eq_reif() {
    check("int_eq_reif");
}

#[test]
fn bool_array_sum_eq() {
    check("bool_array_sum_eq");
}

#[test]
fn int_arrays_lex() {
    check("int_arrays_lex");
}

#[test]
fn int_array_sum_eq() {
    check("int_array_sum_eq");
}

#[test]
fn int_array_min() {
    check("int_array_min");
}

#[test]
fn int_array_max() {
    check("int_array_max");
}

#[test]
fn int_leq() {
    check("int_leq");
}

#[test]
fn bool_array_or() {
    check("bool_array_or");
}

#[test]
fn binary_times() {
    check("binary_times");
}

#[test]
fn binary_eq_reif() {
    check("binary_eq_reif");
}

#[test]
fn binary_array_sum_eq() {
    check("binary_array_sum_eq");
}
