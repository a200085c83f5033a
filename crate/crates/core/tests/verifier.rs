use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nfrac_core::reference::known_solutions;
use nfrac_core::verify::{
    brute_force_solve, canonicalize, count_cap, fraction_sum, lcm_of_divisors, product_model_check,
    product_model_sides, verify_solution, Solution, Triple,
};

fn random_solution(rng: &mut ChaCha8Rng, n: usize) -> Solution {
    let triples = (0..n)
        .map(|_| {
            Triple::new(
                rng.gen_range(1..=9),
                rng.gen_range(1..=9),
                rng.gen_range(1..=9),
            )
        })
        .collect();
    Solution::new(triples, None)
}

#[test]
fn published_rows_verify() {
    for sol in known_solutions() {
        let r = verify_solution(&sol).unwrap();
        assert!(r.sum_is_one, "{sol}");
        assert!(r.counts_ok, "{sol}: {:?}", r.digit_counts);
        assert!(r.lex_sorted, "{sol}");
        assert!(r.redundant_bound_ok, "{sol}");
        assert!(r
            .digit_counts
            .iter()
            .all(|&c| c >= 1 && c <= count_cap(sol.n)));
    }
}

#[test]
fn published_l_is_a_common_multiple_except_n39() {
    for sol in known_solutions() {
        let l = BigUint::from(sol.l.unwrap());
        let divides = (l % lcm_of_divisors(&sol)) == BigUint::from(0u32);
        // The n = 39 row reports L = 8400, but 96 does not divide 8400.
        assert_eq!(divides, sol.n != 39, "{sol}");
    }
}

#[test]
fn product_model_agrees_on_published_rows() {
    for sol in known_solutions() {
        assert!(product_model_check(&sol), "{sol}");
    }
}

#[test]
fn product_model_agrees_on_random_assignments() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in 3..=8 {
        for _ in 0..10_000 {
            let sol = random_solution(&mut rng, n);
            let r = verify_solution(&sol).unwrap();
            assert_eq!(r.sum_is_one, product_model_check(&sol), "{sol}");
        }
    }
}

#[test]
fn product_model_agrees_on_perturbed_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for sol in known_solutions() {
        for _ in 0..20 {
            let mut s = sol.clone();
            let i = rng.gen_range(0..s.n);
            s.triples[i].x = rng.gen_range(1..=9);
            let r = verify_solution(&s).unwrap();
            assert_eq!(r.sum_is_one, product_model_check(&s), "{s}");
        }
    }
}

#[test]
fn product_overflows_32_bits_at_six_fractions() {
    let six = known_solutions().into_iter().find(|s| s.n == 6).unwrap();
    let (_, rhs) = product_model_sides(&six);
    assert_eq!(rhs, BigUint::from(2_176_782_336u64));
    assert!(rhs > BigUint::from(i32::MAX as u32));
}

#[test]
fn brute_force_contains_published_small_rows() {
    let three = brute_force_solve(3).unwrap();
    assert!(three.contains(&"3 204 9 12 5 34 7 68".parse().unwrap()));
    let four: Vec<String> = brute_force_solve(4)
        .unwrap()
        .iter()
        .map(|s| s.to_string())
        .collect();
    for sol in known_solutions().into_iter().filter(|s| s.n == 4) {
        let canon = canonicalize(&sol);
        let lcm = lcm_of_divisors(&canon).to_string();
        let expected = Solution {
            l: Some(lcm.parse().unwrap()),
            ..canon
        };
        assert!(four.contains(&expected.to_string()), "{expected}");
    }
}

/// With n = 3 every digit appears exactly once, so a plain loop over
/// permutations of 1..9 enumerates everything.
#[test]
fn brute_force_matches_permutation_search_for_three() {
    let mut expected = Vec::new();
    let mut digits = [1u8, 2, 3, 4, 5, 6, 7, 8, 9];
    permute(&mut digits, 0, &mut |d| {
        let ts: Vec<Triple> = (0..3)
            .map(|i| Triple::new(d[i], d[3 + i], d[6 + i]))
            .collect();
        let sorted = ts.windows(2).all(|w| w[0].lex_key() <= w[1].lex_key());
        let num: u64 = ts
            .iter()
            .map(|t| {
                u64::from(t.x)
                    * ts.iter()
                        .filter(|o| *o != t)
                        .map(|o| u64::from(o.divisor()))
                        .product::<u64>()
            })
            .sum();
        let den: u64 = ts.iter().map(|t| u64::from(t.divisor())).product();
        if sorted && num == den {
            expected.push(Solution::new(ts, None).to_string());
        }
    });
    expected.sort();
    let mut got: Vec<String> = brute_force_solve(3)
        .unwrap()
        .iter()
        .map(|s| s.to_string())
        .collect();
    got.sort();
    assert_eq!(got, expected);
}

fn permute(d: &mut [u8; 9], k: usize, visit: &mut dyn FnMut(&[u8; 9])) {
    if k == d.len() {
        visit(d);
        return;
    }
    for i in k..d.len() {
        d.swap(k, i);
        permute(d, k + 1, visit);
        d.swap(k, i);
    }
}

#[test]
fn brute_force_output_is_canonical_and_valid() {
    for n in 3..=4 {
        let sols = brute_force_solve(n).unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            assert_eq!(&canonicalize(s), s);
            assert!(verify_solution(s).unwrap().passed(), "{s}");
        }
        let mut sorted = sols.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), sols.len());
    }
}

fn triple() -> impl Strategy<Value = Triple> {
    (1u8..=9, 1u8..=9, 1u8..=9).prop_map(|(x, y, z)| Triple::new(x, y, z))
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(ts in prop::collection::vec(triple(), 1..10)) {
        let s = Solution::new(ts, None);
        let c = canonicalize(&s);
        prop_assert_eq!(canonicalize(&c), c.clone());
        prop_assert!(verify_solution(&c).unwrap().lex_sorted);
        prop_assert_eq!(fraction_sum(&c), fraction_sum(&s));
    }

    #[test]
    fn text_format_round_trips(ts in prop::collection::vec(triple(), 1..10), l in 1u64..100_000) {
        let s = Solution::new(ts, Some(l));
        let back: Solution = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn lcm_is_the_least_common_multiple(ts in prop::collection::vec(triple(), 1..5)) {
        let s = Solution::new(ts, None);
        let lcm: u64 = lcm_of_divisors(&s).try_into().unwrap();
        let divs = s.divisors();
        prop_assert!(divs.iter().all(|&d| lcm.is_multiple_of(u64::from(d))));
        let smallest = (1..=lcm).find(|m| divs.iter().all(|&d| m % u64::from(d) == 0));
        prop_assert_eq!(smallest, Some(lcm));
    }

    #[test]
    fn product_model_matches_exact_sum(ts in prop::collection::vec(triple(), 1..8)) {
        let s = Solution::new(ts, None);
        prop_assert_eq!(product_model_check(&s), verify_solution(&s).unwrap().sum_is_one);
    }
}
