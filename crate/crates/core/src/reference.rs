//! Published results used as test inputs: known solutions for n = 3..39 and
//! the `maxL` at which each was found.

use crate::verify::{parse_solutions, Solution};

/// One solution per line in the `n L x1 y1z1 ...` text format.
pub const KNOWN_SOLUTIONS: &str = include_str!("../data/known_solutions.txt");

/// `(n, maxL)` pairs.
pub const MAX_L_BY_N: &[(usize, u64)] = &[
    (3, 300),
    (4, 100),
    (5, 100),
    (6, 100),
    (7, 100),
    (8, 100),
    (9, 100),
    (10, 100),
    (11, 100),
    (12, 100),
    (13, 100),
    (14, 100),
    (15, 120),
    (16, 100),
    (17, 100),
    (18, 300),
    (19, 100),
    (20, 300),
    (21, 300),
    (22, 300),
    (23, 300),
    (24, 300),
    (25, 300),
    (26, 300),
    (27, 400),
    (28, 300),
    (29, 400),
    (30, 500),
    (31, 500),
    (32, 500),
    (33, 1900),
    (34, 500),
    (35, 2400),
    (36, 2400),
    (37, 2400),
    (38, 2400),
    (39, 8400),
];

pub fn known_solutions() -> Vec<Solution> {
    parse_solutions(KNOWN_SOLUTIONS).expect("bundled solutions parse")
}

pub fn published_max_l(n: usize) -> Option<u64> {
    MAX_L_BY_N.iter().find(|&&(m, _)| m == n).map(|&(_, l)| l)
}
