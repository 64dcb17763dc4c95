use std::collections::BTreeMap;

use adicspace::atcheck::*;
use adicspace::laurent::{rat, LaurentPoly, Rational};
use adicspace::Error;
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Subset enumeration: `a_p = 2^{−F} Σ_{|S| ≡ p} x^{Σ_{i∈S} 2^i}` over the
/// factor exponents.
fn subset_entries(k: usize, bits: &[usize]) -> Vec<LaurentPoly> {
    let mut out: Vec<BTreeMap<BigInt, Rational>> = vec![BTreeMap::new(); k];
    let w = Rational::new(BigInt::one(), BigInt::one() << bits.len());
    for s in 0u64..(1 << bits.len()) {
        let e: BigInt = (0..bits.len())
            .filter(|t| s >> t & 1 == 1)
            .map(|t| BigInt::one() << bits[t])
            .sum();
        *out[s.count_ones() as usize % k]
            .entry(e)
            .or_insert_with(Rational::zero) += &w;
    }
    out.into_iter().map(LaurentPoly::from_terms).collect()
}

#[test]
fn product_matches_subset_enumeration() {
    for (k, m, n) in [(4, 1, 1), (3, 1, 1), (4, 1, 2), (2, 2, 1)] {
        let a = circulant_product(k, m, n, DEFAULT_BUDGET).unwrap();
        let bits: Vec<usize> = (0..n).flat_map(|j| 8 * m * j..=8 * m * j + 4 * m).collect();
        let want = subset_entries(k, &bits);
        for r in 0..k {
            for c in 0..k {
                assert_eq!(a.get(r, c), &want[(r + k - c) % k], "k={k} entry ({r},{c})");
            }
        }
        assert!(has_class_support(&a));
    }
    let a = circulant_product(4, 1, 1, DEFAULT_BUDGET).unwrap();
    // C(5,0) + C(5,4)
    assert_eq!(a.get(0, 0).len(), 6);
}

#[test]
fn single_scalar_is_the_odometer_product() {
    let a = circulant_product(1, 1, 1, DEFAULT_BUDGET).unwrap();
    let want = LaurentPoly::from_terms((0..32).map(|e| (e, rat(1, 32))));
    assert_eq!(a.get(0, 0), &want);
}

#[test]
fn budget_gate() {
    assert_eq!(monomial_budget(4, 2, 2), 1 << 20);
    assert!(circulant_product(4, 2, 2, DEFAULT_BUDGET - 1).is_err());
    match explicit_rank_one(3, 2, DEFAULT_BUDGET) {
        Err(Error::BudgetExceeded { needed, cap }) => {
            assert_eq!(needed, 4 << 26);
            assert_eq!(cap, DEFAULT_BUDGET);
        }
        other => panic!("expected BudgetExceeded, got {other:?}"),
    }
}

#[test]
fn explicit_errors_pinned() {
    // Values from an independent fraction-arithmetic expansion.
    let cases = [
        ((1, 1), rat(95, 16)),
        ((2, 1), rat(12287, 2048)),
        ((1, 2), rat(24067, 4096)),
    ];
    for ((m, n), want) in cases {
        let a = circulant_product(4, m, n, DEFAULT_BUDGET).unwrap();
        let x = explicit_rank_one(m, n, DEFAULT_BUDGET).unwrap();
        assert!(x.candidate().is_nonnegative());
        assert_eq!(
            approximation_error(&a, &x.candidate()).unwrap(),
            want,
            "(M,N)=({m},{n})"
        );
        assert_eq!(x.g_sum_norm(), rat(4, 1));
    }
}

#[test]
fn phi_norms_follow_the_roots_of_unity_filter() {
    for (m, n) in [(1, 1), (1, 2), (2, 1)] {
        let x = explicit_rank_one(m, n, DEFAULT_BUDGET).unwrap();
        let total: Rational = x.phi_norms().into_iter().sum();
        assert_eq!(total, Rational::one());
        // |‖φ_p‖ − ¼| ≤ 1/(2·√2^N)  ⇔  4·dev²·2^N ≤ 1.
        let dev = x.phi_deviation();
        assert!(Rational::from_integer(BigInt::from(4u64 << n)) * &dev * &dev <= Rational::one());
    }
}

#[test]
fn regrouping_and_class_structure() {
    for (m, n) in [(1, 1), (2, 1), (1, 2)] {
        let a = circulant_product(4, m, n, DEFAULT_BUDGET).unwrap();
        let x = explicit_rank_one(m, n, DEFAULT_BUDGET).unwrap();
        assert_eq!(x.class_violations(&a), 0);
        let direct = approximation_error(&a, &x.candidate()).unwrap();
        assert_eq!(x.regrouped_error(&a), direct, "(M,N)=({m},{n})");
    }
}

#[test]
fn greedy_improves_on_the_explicit_construction() {
    let a = circulant_product(4, 1, 1, DEFAULT_BUDGET).unwrap();
    let r = greedy_rank_one(&a, 4).unwrap();
    assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(r.candidate.is_nonnegative());
    let err = approximation_error(&a, &r.candidate).unwrap();
    assert_eq!(&err, r.trace.last().unwrap());
    assert!(err <= rat(95, 16));
    let again = greedy_rank_one(&a, 4).unwrap();
    assert_eq!(again.candidate, r.candidate);
}

#[test]
fn zero_candidate_costs_k() {
    for k in 2..=5 {
        let a = circulant_product(k, 1, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            approximation_error(&a, &RankOneCandidate::zero(k)).unwrap(),
            Rational::from_integer(k.into())
        );
    }
}
